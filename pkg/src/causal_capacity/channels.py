"""CPTP maps in Kraus and Choi form.

Choi operators are unnormalized: ``J = sum_ij |i><j| (x) M(|i><j|)``, so a
trace-preserving map has ``tr J = in_dim``. The input factor comes first.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InvalidOperatorError, LayoutError
from .tensor_core import (
    TOL,
    LabeledOperator,
    SpaceLayout,
    eigh,
    hermiticity_residual,
    is_unitary,
    partial_trace,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (I2, X, Y, Z)

RANK_TOL = 1e-10


def _layout(spec, default_label: str, default_dim: int) -> SpaceLayout:
    if spec is None:
        return SpaceLayout.single(default_label, default_dim)
    if isinstance(spec, SpaceLayout):
        return spec
    if isinstance(spec, str):
        return SpaceLayout.single(spec, default_dim)
    return SpaceLayout(spec)


def _fix_phase(k: np.ndarray) -> np.ndarray:
    flat = k.ravel()
    idx = int(np.argmax(np.round(np.abs(flat), 12)))
    if abs(flat[idx]) == 0:
        return k
    return k * (abs(flat[idx]) / flat[idx])


class QuantumChannel:
    """A linear map from ``in_layout`` to ``out_layout`` given by Kraus operators or a Choi operator.

    At least one representation must be supplied; the other is derived on
    demand. Instances are treated as immutable.
    """

    def __init__(self, kraus=None, choi: LabeledOperator | None = None,
                 in_layout=None, out_layout=None):
        if kraus is None and choi is None:
            raise ValueError("a channel needs Kraus operators or a Choi operator")
        if kraus is not None:
            ks = [np.array(k, dtype=complex) for k in kraus]
            if not ks:
                raise ValueError("empty Kraus list")
            shape = ks[0].shape
            if len(shape) != 2 or any(k.shape != shape for k in ks):
                raise DimensionError("Kraus operators must be matrices of equal shape")
            out_dim, in_dim = shape
        else:
            if in_layout is None or isinstance(in_layout, str):
                in_dim = choi.dims[0]
            else:
                in_dim = _layout(in_layout, "in", 1).total_dim
            out_dim = choi.layout.total_dim // in_dim
        self.in_layout = _layout(in_layout, "in", in_dim)
        self.out_layout = _layout(out_layout, "out", out_dim)
        if self.in_layout.total_dim != in_dim or self.out_layout.total_dim != out_dim:
            raise DimensionError(
                f"layouts ({self.in_layout.total_dim}->{self.out_layout.total_dim}) "
                f"do not match operator dimensions ({in_dim}->{out_dim})")
        if set(self.in_layout.labels) & set(self.out_layout.labels):
            raise LayoutError("input and output labels must differ")
        if kraus is not None:
            for k in ks:
                k.flags.writeable = False
            self._kraus = tuple(ks)
        if choi is not None:
            if choi.layout.total_dim != in_dim * out_dim:
                raise DimensionError("Choi dimension does not match in_dim * out_dim")
            if choi.layout != self.in_layout + self.out_layout:
                choi = LabeledOperator(self.in_layout + self.out_layout, choi.matrix)
            self._choi = choi

    @property
    def in_dim(self) -> int:
        return self.in_layout.total_dim

    @property
    def out_dim(self) -> int:
        return self.out_layout.total_dim

    @cached_property
    def kraus(self) -> tuple[np.ndarray, ...]:
        if "_kraus" in self.__dict__:
            return self._kraus
        return tuple(kraus_of_choi(self._choi, in_dim=self.in_dim))

    @cached_property
    def choi(self) -> LabeledOperator:
        if "_choi" in self.__dict__:
            return self._choi
        return choi_of_kraus(self._kraus, self.in_layout, self.out_layout)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix ``S`` with ``vec(M(rho)) = S vec(rho)`` for row-major ``vec``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def __call__(self, rho) -> np.ndarray:
        """Apply the map to a raw matrix without any validation."""
        rho = np.asarray(rho, dtype=complex)
        n = self.out_dim
        return (self.superoperator @ rho.reshape(-1)).reshape(n, n)

    def kraus_residual(self) -> float:
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.in_dim)))

    def __repr__(self):
        return (f"QuantumChannel({list(self.in_layout.factors)} -> "
                f"{list(self.out_layout.factors)}, kraus_rank={len(self.kraus)})")


def choi_of_kraus(kraus: Sequence[np.ndarray], in_layout=None, out_layout=None) -> LabeledOperator:
    """``J = sum_k |K_k>><<K_k|`` on (input, output)."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ValueError("empty Kraus list")
    out_dim, in_dim = ks[0].shape
    layout = _layout(in_layout, "in", in_dim) + _layout(out_layout, "out", out_dim)
    vecs = np.stack([pure_cj(k) for k in ks])
    return LabeledOperator(layout, vecs.T @ vecs.conj())


def kraus_of_choi(choi: LabeledOperator, rank_tol: float = RANK_TOL, in_dim: int | None = None,
                  tol: float = TOL) -> list[np.ndarray]:
    """Canonical Kraus operators from the eigendecomposition of a Choi operator.

    Eigenvalues are taken in descending order and every operator's
    largest-magnitude entry is made real and positive, so the output is
    deterministic. Raises InvalidOperatorError for a non-PSD input.
    """
    if in_dim is None:
        in_dim = choi.dims[0]
    n = choi.layout.total_dim
    out_dim = n // in_dim
    vals, vecs = eigh(choi, tol=tol)
    if vals[-1] < -tol:
        raise InvalidOperatorError(f"Choi operator is not PSD (min eigenvalue {vals[-1]:.3e})")
    ks = []
    for lam, v in zip(vals, vecs.T):
        if lam <= rank_tol:
            break
        k = np.sqrt(lam) * v.reshape(in_dim, out_dim).T
        ks.append(_fix_phase(k))
    if not ks:
        ks.append(np.zeros((out_dim, in_dim), dtype=complex))
    return ks


def pure_cj(k) -> np.ndarray:
    """``|K>> = sum_i |i> (x) K|i>``; the input index is most significant."""
    k = np.asarray(k, dtype=complex)
    return k.T.reshape(-1).copy()


def unvec_pure_cj(vec, in_dim: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return vec.reshape(in_dim, -1).T.copy()


def is_cptp(c: QuantumChannel, tol: float = TOL) -> bool:
    j = c.choi
    if hermiticity_residual(j) > tol:
        return False
    if np.linalg.eigvalsh(j.matrix)[0] < -tol:
        return False
    marginal = partial_trace(j, c.out_layout.labels).matrix
    return bool(np.max(np.abs(marginal - np.eye(c.in_dim))) <= tol)


def check_state(rho, dim: int, tol: float = TOL) -> np.ndarray:
    m = rho.matrix if isinstance(rho, LabeledOperator) else np.asarray(rho, dtype=complex)
    if m.shape != (dim, dim):
        raise DimensionError(f"state has shape {m.shape}, expected ({dim}, {dim})")
    if hermiticity_residual(m) > tol:
        raise InvalidOperatorError("state is not Hermitian")
    if abs(np.trace(m) - 1) > tol:
        raise InvalidOperatorError(f"state has trace {np.trace(m).real:.6g}, expected 1")
    if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -tol:
        raise InvalidOperatorError("state is not positive semidefinite")
    return m


def apply_channel(c: QuantumChannel, rho) -> LabeledOperator:
    """``sum_k K_k rho K_k^dagger`` for a validated density matrix ``rho``."""
    m = check_state(rho, c.in_dim)
    return LabeledOperator(c.out_layout, c(m))


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """The channel ``second o first`` with Kraus set ``{L_j K_i}``."""
    if first.out_dim != second.in_dim:
        raise DimensionError(f"cannot compose {first.out_dim}-dim output into {second.in_dim}-dim input")
    kraus = [l @ k for k in first.kraus for l in second.kraus]
    out_layout = second.out_layout
    if set(out_layout.labels) & set(first.in_layout.labels):
        out_layout = None
    return QuantumChannel(kraus, in_layout=first.in_layout, out_layout=out_layout)


def _check_prob(p: float, name: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def unitary_channel(u, tol: float = TOL) -> QuantumChannel:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise InvalidOperatorError("matrix is not unitary")
    return QuantumChannel([u])


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel([np.eye(d, dtype=complex)])


def depolarizing(d: int = 2) -> QuantumChannel:
    """Completely depolarizing channel ``rho -> tr(rho) I/d``."""
    if d < 2:
        raise ValueError("depolarizing channel needs d >= 2")
    ks = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = 1 / np.sqrt(d)
            ks.append(k)
    return QuantumChannel(ks)


def pauli_depolarizing() -> QuantumChannel:
    """The qubit completely depolarizing channel written with Kraus ``{I, X, Y, Z}/2``."""
    return QuantumChannel([p / 2 for p in PAULIS])


def xy_channel() -> QuantumChannel:
    """``rho -> (X rho X + Y rho Y) / 2``."""
    return QuantumChannel([X / np.sqrt(2), Y / np.sqrt(2)])


def bit_flip(p: float) -> QuantumChannel:
    p = _check_prob(p, "p")
    return QuantumChannel([np.sqrt(1 - p) * I2, np.sqrt(p) * X])


def phase_flip(q: float) -> QuantumChannel:
    q = _check_prob(q, "q")
    return QuantumChannel([np.sqrt(1 - q) * I2, np.sqrt(q) * Z])


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry via QR of a complex Ginibre matrix with fixed diagonal phases."""
    g = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(d, d, rng)


def random_cptp(in_dim: int, out_dim: int, env_dim: int, seed) -> QuantumChannel:
    """Stinespring dilation of a Haar-random isometry ``in -> out (x) env``."""
    if env_dim < 1:
        raise ValueError("env_dim must be >= 1")
    if out_dim * env_dim < in_dim:
        raise DimensionError(f"no isometry from dimension {in_dim} into {out_dim}x{env_dim}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = haar_isometry(out_dim * env_dim, in_dim, rng).reshape(out_dim, env_dim, in_dim)
    return QuantumChannel([v[:, e, :] for e in range(env_dim)])


def choi_trace_distance(c1: QuantumChannel, c2: QuantumChannel) -> float:
    """Half the trace norm of the difference of the normalized Choi states."""
    if c1.in_dim != c2.in_dim or c1.out_dim != c2.out_dim:
        raise DimensionError("channels have different dimensions")
    diff = (c1.choi.matrix - c2.choi.matrix) / c1.in_dim
    vals = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(min(1.0, 0.5 * np.sum(np.abs(vals))))


def relabel(c: QuantumChannel, in_layout=None, out_layout=None) -> QuantumChannel:
    return QuantumChannel(c.kraus, in_layout=in_layout or c.in_layout, out_layout=out_layout or c.out_layout)


def mixture(weights: Iterable[float], channels: Sequence[QuantumChannel]) -> QuantumChannel:
    """Convex combination of channels with common dimensions."""
    weights = list(weights)
    kraus = [np.sqrt(w) * k for w, c in zip(weights, channels) for k in c.kraus if w > 0]
    first = channels[0]
    return QuantumChannel(kraus, in_layout=first.in_layout, out_layout=first.out_layout)
