"""Dense linear algebra on labeled tensor-product spaces.

Basis convention: computational basis, leftmost factor most significant
(big-endian). Every other module relies on this single ordering, so the
index of ``|i_1 i_2 ... i_n>`` is ``np.ravel_multi_index((i_1, ..., i_n), dims)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidOperatorError, LayoutError

# Hermiticity check on inputs to eigh.
TAU_HERM = 1e-9
# Reconstruction residual guaranteed by eigh.
TAU_EIG = 1e-10
# Default tolerance of the predicates.
TOL = 1e-9


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered tensor factors, each a ``(label, dim)`` pair."""

    factors: tuple[tuple[str, int], ...]

    def __init__(self, factors: Iterable[tuple[str, int]]):
        factors = tuple((str(label), int(dim)) for label, dim in factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate labels in layout {labels}")
        for label, dim in factors:
            if dim < 1:
                raise LayoutError(f"factor {label!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def single(cls, label: str, dim: int) -> "SpaceLayout":
        return cls([(label, dim)])

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown label {label!r}; layout has {list(self.labels)}") from None

    def __add__(self, other: "SpaceLayout") -> "SpaceLayout":
        return SpaceLayout(self.factors + other.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """A square complex matrix acting on the space described by ``layout``.

    The matrix is stored read-only. Hermiticity, positivity and trace are not
    assumed; use the predicates where they matter.
    """

    layout: SpaceLayout
    matrix: np.ndarray

    def __init__(self, layout: SpaceLayout | Iterable[tuple[str, int]], matrix):
        if not isinstance(layout, SpaceLayout):
            layout = SpaceLayout(layout)
        m = np.array(matrix, dtype=complex)
        n = layout.total_dim
        if m.shape != (n, n):
            raise LayoutError(f"matrix shape {m.shape} does not match layout dimension {n}")
        m.flags.writeable = False
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def allclose(self, other: "LabeledOperator", atol: float = 1e-10) -> bool:
        if self.layout != other.layout:
            return False
        return bool(np.max(np.abs(self.matrix - other.matrix), initial=0.0) <= atol)

    def __repr__(self):
        inner = ", ".join(f"{label}:{dim}" for label, dim in self.layout)
        return f"LabeledOperator([{inner}])"


def _as_tensor(op: LabeledOperator) -> np.ndarray:
    dims = op.dims
    return op.matrix.reshape(dims + dims)


def _from_tensor(layout: SpaceLayout, t: np.ndarray) -> LabeledOperator:
    n = layout.total_dim
    return LabeledOperator(layout, t.reshape(n, n))


def _check_labels(op: LabeledOperator, labels: Iterable[str]) -> set[str]:
    labels = set(labels)
    unknown = labels - set(op.labels)
    if unknown:
        raise LayoutError(f"unknown labels {sorted(unknown)}; operator has {list(op.labels)}")
    return labels


def tensor(a: LabeledOperator, b: LabeledOperator, *more: LabeledOperator) -> LabeledOperator:
    """Kronecker product; ``a``'s factors come first."""
    result = LabeledOperator(a.layout + b.layout, np.kron(a.matrix, b.matrix))
    for c in more:
        result = tensor(result, c)
    return result


def permute_factors(op: LabeledOperator, new_order: Sequence[str]) -> LabeledOperator:
    new_order = list(new_order)
    if sorted(new_order) != sorted(op.labels) or len(set(new_order)) != len(new_order):
        raise LayoutError(f"{new_order} is not a permutation of {list(op.labels)}")
    perm = [op.layout.index(label) for label in new_order]
    n = len(perm)
    t = _as_tensor(op).transpose(perm + [p + n for p in perm])
    layout = SpaceLayout([op.layout.factors[p] for p in perm])
    return _from_tensor(layout, t)


def partial_trace(op: LabeledOperator, labels: Iterable[str]) -> LabeledOperator:
    """Trace out ``labels``; the remaining factors keep their original order."""
    traced = _check_labels(op, labels)
    keep = [i for i, label in enumerate(op.labels) if label not in traced]
    drop = [i for i, label in enumerate(op.labels) if label in traced]
    n = len(op.labels)
    # einsum subscripts: row index k, column index n + k; traced factors share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    for i in drop:
        letters[n + i] = letters[i]
    out = [letters[i] for i in keep] + [letters[n + i] for i in keep]
    t = np.einsum("".join(letters) + "->" + "".join(out), _as_tensor(op))
    layout = SpaceLayout([op.layout.factors[i] for i in keep])
    return _from_tensor(layout, t)


def partial_transpose(op: LabeledOperator, labels: Iterable[str]) -> LabeledOperator:
    chosen = _check_labels(op, labels)
    n = len(op.labels)
    axes = list(range(2 * n))
    for i, label in enumerate(op.labels):
        if label in chosen:
            axes[i], axes[n + i] = n + i, i
    return _from_tensor(op.layout, _as_tensor(op).transpose(axes))


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, LabeledOperator) else np.asarray(op, dtype=complex)


def hermiticity_residual(op) -> float:
    m = _matrix(op)
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def eigh(op, tol: float = TAU_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns.

    Raises InvalidOperatorError if ``op`` is not Hermitian within ``tol``.
    """
    m = _matrix(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidOperatorError(f"eigh needs a square matrix, got shape {m.shape}")
    res = hermiticity_residual(m)
    if res > tol:
        raise InvalidOperatorError(f"matrix is not Hermitian (residual {res:.3e})")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return vals[::-1], vecs[:, ::-1]


def is_psd(op, tol: float = TOL) -> bool:
    m = _matrix(op)
    if hermiticity_residual(m) > tol:
        return False
    return bool(np.linalg.eigvalsh((m + m.conj().T) / 2)[0] >= -tol)


def is_unitary(op, tol: float = TOL) -> bool:
    m = _matrix(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])) <= tol)


def identity(layout: SpaceLayout | Iterable[tuple[str, int]]) -> LabeledOperator:
    if not isinstance(layout, SpaceLayout):
        layout = SpaceLayout(layout)
    return LabeledOperator(layout, np.eye(layout.total_dim))


def ket_bra(vec, layout: SpaceLayout | Iterable[tuple[str, int]]) -> LabeledOperator:
    v = np.asarray(vec, dtype=complex).ravel()
    return LabeledOperator(layout, np.outer(v, v.conj()))
