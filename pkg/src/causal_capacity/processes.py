"""Pure processes, superpositions of direct pure processes, and their action on channels.

All process vectors use the slot order ``(C, P, A_I, A_O, B_I, B_O, F)``; the
control factor ``C`` is absent for a single direct process. Vectors are stored
normalized. The process matrix fed to the link product is
``W = d**3 |w><w|``, the squared norm of the constructive vector
``|T>>|U>>|V>>``, so that the induced Choi operator has trace ``d_P``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import (
    H,
    X,
    Z,
    QuantumChannel,
    choi_of_kraus,
    haar_unitary,
    is_cptp,
    pure_cj,
    random_cptp,
)
from .errors import DimensionError, InvalidOperatorError, LayoutError
from .tensor_core import (
    TOL,
    LabeledOperator,
    SpaceLayout,
    identity,
    is_unitary,
    partial_trace,
    partial_transpose,
    permute_factors,
    tensor,
)

C, P, A_I, A_O, B_I, B_O, F = "C", "P", "A_I", "A_O", "B_I", "B_O", "F"
PARTY_SLOTS = (A_I, A_O, B_I, B_O)
DIRECT_SLOTS = (P,) + PARTY_SLOTS + (F,)


class Order(enum.Enum):
    A_THEN_B = "AB"
    B_THEN_A = "BA"


@dataclass(frozen=True, eq=False)
class DirectPureProcessSpec:
    """The fixed-order circuit ``T -> M_1 -> U -> M_2 -> V``.

    For ``Order.A_THEN_B`` the first channel slot is Alice's, otherwise Bob's.
    """

    order: Order
    T: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        order = self.order if isinstance(self.order, Order) else Order(self.order)
        object.__setattr__(self, "order", order)
        for name in ("T", "U", "V"):
            m = np.array(getattr(self, name), dtype=complex)
            if not is_unitary(m, TOL):
                raise InvalidOperatorError(f"{name} is not unitary")
            m.flags.writeable = False
            object.__setattr__(self, name, m)
        if not self.T.shape == self.U.shape == self.V.shape:
            raise DimensionError("T, U, V must have the same dimension")

    @property
    def d(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class SdppSpec:
    """Equal-weight superposition of direct pure processes, one per control basis state."""

    terms: tuple[DirectPureProcessSpec, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("an SDPP needs at least one term")
        if len({t.d for t in terms}) != 1:
            raise DimensionError("all SDPP terms must share the same dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def d(self) -> int:
        return self.terms[0].d


@dataclass(frozen=True, eq=False)
class PureProcessVector:
    layout: SpaceLayout
    amplitudes: np.ndarray
    spec: DirectPureProcessSpec | SdppSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        layout = self.layout if isinstance(self.layout, SpaceLayout) else SpaceLayout(self.layout)
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != layout.total_dim:
            raise LayoutError(f"{amps.size} amplitudes for a {layout.total_dim}-dim layout")
        labels = [label for label in layout.labels if label != C]
        if labels != list(DIRECT_SLOTS) or (C in layout.labels and layout.labels[0] != C):
            raise LayoutError(f"unexpected process layout {list(layout.labels)}")
        dims = {layout.dim_of(s) for s in PARTY_SLOTS + (P, F)}
        if len(dims) != 1:
            raise DimensionError("all slots of a process must share one dimension")
        amps.flags.writeable = False
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def d(self) -> int:
        return self.layout.dim_of(A_I)

    @property
    def has_control(self) -> bool:
        return C in self.layout.labels

    @property
    def control_dim(self) -> int:
        return self.layout.dim_of(C) if self.has_control else 1

    @property
    def scale(self) -> float:
        return float(self.d ** 3)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def process_matrix(self) -> LabeledOperator:
        return LabeledOperator(self.layout, self.scale * np.outer(self.amplitudes, self.amplitudes.conj()))

    def future_layout(self) -> SpaceLayout:
        if self.has_control:
            return SpaceLayout([(C, self.control_dim), (F, self.d)])
        return SpaceLayout.single(F, self.d)


def build_direct_pure_process(spec: DirectPureProcessSpec) -> PureProcessVector:
    d = spec.d
    vec = np.kron(np.kron(pure_cj(spec.T), pure_cj(spec.U)), pure_cj(spec.V)) / d ** 1.5
    if spec.order is Order.B_THEN_A:
        # native factor order is (P, B_I, B_O, A_I, A_O, F)
        vec = vec.reshape((d,) * 6).transpose(0, 3, 4, 1, 2, 5).reshape(-1)
    layout = SpaceLayout([(s, d) for s in DIRECT_SLOTS])
    return PureProcessVector(layout, vec, spec)


def build_sdpp(spec: SdppSpec) -> PureProcessVector:
    n = len(spec.terms)
    d = spec.d
    vec = np.concatenate([build_direct_pure_process(t).amplitudes for t in spec.terms]) / np.sqrt(n)
    layout = SpaceLayout([(C, n)] + [(s, d) for s in DIRECT_SLOTS])
    return PureProcessVector(layout, vec, spec)


def build_switch() -> PureProcessVector:
    """The qubit quantum switch, written out from its two causal-order branches."""
    d = 2
    ii = pure_cj(np.eye(d))
    branch = np.kron(np.kron(ii, ii), ii).reshape((d,) * 6)
    ab = branch  # factors (P, A_I, A_O, B_I, B_O, F)
    ba = branch.transpose(0, 3, 4, 1, 2, 5)  # native (P, B_I, B_O, A_I, A_O, F)
    vec = np.concatenate([ab.ravel(), ba.ravel()]) / np.sqrt(2) / d ** 1.5
    layout = SpaceLayout([(C, 2)] + [(s, d) for s in DIRECT_SLOTS])
    spec = SdppSpec((DirectPureProcessSpec(Order.A_THEN_B, np.eye(2), np.eye(2), np.eye(2)),
                     DirectPureProcessSpec(Order.B_THEN_A, np.eye(2), np.eye(2), np.eye(2))))
    return PureProcessVector(layout, vec, spec)


def cnot_sdpp_spec() -> SdppSpec:
    i2 = np.eye(2)
    return SdppSpec((DirectPureProcessSpec(Order.A_THEN_B, i2, i2, i2),
                     DirectPureProcessSpec(Order.A_THEN_B, X, i2, i2)))


def build_cnot_sdpp() -> PureProcessVector:
    """Control in ``|+>`` applies a CNOT onto the target, which then meets ``M_A`` and ``M_B``."""
    return build_sdpp(cnot_sdpp_spec())


def salek_sdpp_spec() -> SdppSpec:
    return SdppSpec((DirectPureProcessSpec(Order.B_THEN_A, np.eye(2), H, H),
                     DirectPureProcessSpec(Order.B_THEN_A, X, H, H)))


def build_salek_sdpp() -> PureProcessVector:
    """CNOT from the control, then ``M_B``, ``H``, ``M_A``, ``H`` on the target."""
    return build_sdpp(salek_sdpp_spec())


def _pow(m: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(m, k % 2)


def shor_target_unitary(bits: Sequence[int], variant: str = "shor") -> np.ndarray:
    """Target unitary applied for control bitstring ``bits`` (four bits, first most significant).

    ``"shor"``: the Shor code restricted to its qubits 1, 2, 3, 4, 7 with the
    remaining qubits acting as controls, ``Z^(b1^b2) H Z^(b3^b4)``.
    ``"as_drawn"``: a Hadamard-sandwiched CNOT from every control, ``H X^parity H``.
    """
    b1, b2, b3, b4 = (int(b) for b in bits)
    if variant == "shor":
        return _pow(Z, b1 ^ b2) @ H @ _pow(Z, b3 ^ b4)
    if variant == "as_drawn":
        return H @ _pow(X, b1 ^ b2 ^ b3 ^ b4) @ H
    raise ValueError(f"unknown Shor SDPP variant {variant!r}")


def shor_sdpp_spec(variant: str = "shor") -> SdppSpec:
    i2 = np.eye(2)
    terms = [DirectPureProcessSpec(Order.A_THEN_B, shor_target_unitary(bits, variant), i2, i2)
             for bits in itertools.product((0, 1), repeat=4)]
    return SdppSpec(tuple(terms))


def build_shor_sdpp(variant: str = "shor") -> PureProcessVector:
    """Sixteen-term SDPP with four control qubits, both channels acting on the target in order A, B.

    The default variant protects the target against any pair of channels;
    ``"as_drawn"`` only protects against bit flips in the Hadamard frame.
    """
    return build_sdpp(shor_sdpp_spec(variant))


def _check_inputs(d: int, m_a: QuantumChannel, m_b: QuantumChannel, check: bool, tol: float):
    for name, m in (("M_A", m_a), ("M_B", m_b)):
        if m.in_dim != d or m.out_dim != d:
            raise DimensionError(f"{name} is {m.in_dim}->{m.out_dim}, the process slots have dimension {d}")
        if check and not is_cptp(m, tol):
            raise InvalidOperatorError(f"{name} is not CPTP")


def _unpack_process(w: PureProcessVector | LabeledOperator) -> tuple[int, bool, SpaceLayout]:
    labels = [label for label in w.layout.labels if label != C]
    if labels != list(DIRECT_SLOTS):
        raise LayoutError(f"unexpected process layout {list(w.layout.labels)}")
    d = w.layout.dim_of(A_I)
    has_c = C in w.layout.labels
    future = [(C, w.layout.dim_of(C))] if has_c else []
    return d, has_c, SpaceLayout(future + [(F, w.layout.dim_of(F))])


def apply_process(w: PureProcessVector | LabeledOperator, m_a: QuantumChannel, m_b: QuantumChannel,
                  check: bool = True, tol: float = TOL) -> QuantumChannel:
    """Channel from ``P`` to the future space induced by the process on ``(M_A, M_B)``.

    A ``PureProcessVector`` is contracted directly with Kraus operators of the
    two channels, giving Kraus operators of the induced map. A general
    ``LabeledOperator`` is evaluated with the link product
    ``tr_AB(W^{T_AB} (M_A (x) M_B (x) 1))`` literally.
    """
    d, has_c, future = _unpack_process(w)
    _check_inputs(d, m_a, m_b, check, tol)
    in_layout = SpaceLayout.single(P, w.layout.dim_of(P))
    if isinstance(w, PureProcessVector):
        nc = w.control_dim
        t = w.amplitudes.reshape((nc, d, d, d, d, d, d))
        # pure_cj(K)[i, o] = K[o, i]
        ka = np.stack([k.T for k in m_a.kraus])
        kb = np.stack([k.T for k in m_b.kraus])
        g = np.einsum("cpijklf,aij,bkl->abcfp", t, ka, kb, optimize=True)
        g = g.reshape(len(ka) * len(kb), nc * d, d) * np.sqrt(w.scale)
        kraus = [k for k in g if np.any(np.abs(k) > 0)] or [g[0]]
        return QuantumChannel(kraus, in_layout=in_layout, out_layout=future)
    return QuantumChannel(choi=link_product(w, m_a, m_b), in_layout=in_layout, out_layout=future)


def link_product(w: LabeledOperator, m_a: QuantumChannel, m_b: QuantumChannel) -> LabeledOperator:
    """``G = tr_{A_I A_O B_I B_O}(W^{T_{A_I A_O B_I B_O}} . M_A (x) M_B)`` ordered as ``(P, C, F)``."""
    ma = LabeledOperator([(A_I, m_a.in_dim), (A_O, m_a.out_dim)], m_a.choi.matrix)
    mb = LabeledOperator([(B_I, m_b.in_dim), (B_O, m_b.out_dim)], m_b.choi.matrix)
    rest = [(label, dim) for label, dim in w.layout if label not in PARTY_SLOTS]
    full = permute_factors(tensor(identity(rest), ma, mb), w.layout.labels)
    wt = partial_transpose(w, PARTY_SLOTS)
    g = partial_trace(LabeledOperator(w.layout, wt.matrix @ full.matrix), PARTY_SLOTS)
    order = [P] + ([C] if C in w.layout.labels else []) + [F]
    return permute_factors(g, order)


def reduced_process(w: PureProcessVector | LabeledOperator) -> LabeledOperator:
    """``(1/d^2) tr_{A_I A_O B_I B_O} W`` on ``(P, C, F)``."""
    d, has_c, _ = _unpack_process(w)
    if isinstance(w, PureProcessVector):
        nc = w.control_dim
        t = w.amplitudes.reshape((nc, d, d ** 4, d))
        r = w.scale * np.einsum("cpmf,dqmg->cpfdqg", t, t.conj())
        layout = SpaceLayout([(C, nc), (P, d), (F, d)])
        r = LabeledOperator(layout, r.reshape(layout.total_dim, layout.total_dim))
        if not has_c:
            r = partial_trace(r, [C])
    else:
        r = partial_trace(w, PARTY_SLOTS)
    order = [P] + ([C] if has_c else []) + [F]
    r = permute_factors(r, order)
    return LabeledOperator(r.layout, r.matrix / d ** 2)


@dataclass
class ValidationReport:
    passed: bool
    n_samples: int
    seed: int
    max_second_eigenvalue: float
    max_tp_violation: float
    max_psd_violation: float
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "max_second_eigenvalue": self.max_second_eigenvalue,
            "max_tp_violation": self.max_tp_violation,
            "max_psd_violation": self.max_psd_violation,
            "failures": list(self.failures),
        }


def _tp_violation(c: QuantumChannel) -> float:
    marginal = partial_trace(c.choi, c.out_layout.labels).matrix
    return float(np.max(np.abs(marginal - np.eye(c.in_dim))))


def validate_pure_process(w: PureProcessVector, n_samples: int = 50, seed: int = 0,
                          rank_tol: float = 1e-8, tol: float = TOL) -> ValidationReport:
    """Check by sampling that unitary pairs map to unitary channels and CPTP pairs to CPTP maps."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    d = w.d
    second = tp = psd = 0.0
    for _ in range(n_samples):
        ua, ub = haar_unitary(d, rng), haar_unitary(d, rng)
        c = apply_process(w, QuantumChannel([ua]), QuantumChannel([ub]), check=False)
        vals = np.linalg.eigvalsh(c.choi.matrix)[::-1]
        second = max(second, float(vals[1]) if len(vals) > 1 else 0.0)
        tp = max(tp, _tp_violation(c))
    for _ in range(n_samples):
        ma = random_cptp(d, d, int(rng.integers(1, d * d + 1)), rng)
        mb = random_cptp(d, d, int(rng.integers(1, d * d + 1)), rng)
        c = apply_process(w, ma, mb, check=False)
        psd = max(psd, float(-min(0.0, np.linalg.eigvalsh(c.choi.matrix)[0])))
        tp = max(tp, _tp_violation(c))
    failures = []
    if second > rank_tol:
        failures.append(f"unitary inputs gave a non-unitary channel (second eigenvalue {second:.3e})")
    if tp > tol:
        failures.append(f"induced map is not trace preserving (violation {tp:.3e})")
    if psd > tol:
        failures.append(f"induced map is not completely positive (violation {psd:.3e})")
    return ValidationReport(not failures, n_samples, seed, second, tp, psd, failures)


def _environment_vector(overlaps, n: int, name: str) -> np.ndarray:
    if overlaps is None:
        c = np.zeros(n, dtype=complex)
        c[0] = 1
    else:
        c = np.asarray(overlaps, dtype=complex).ravel()
    if c.size != n:
        raise DimensionError(f"{name} has {c.size} entries, expected {n}")
    if abs(np.linalg.norm(c) - 1) > TOL:
        raise InvalidOperatorError(f"{name} must describe a unit vector (norm {np.linalg.norm(c):.6g})")
    # coefficients are <eps|i>, so the ket itself carries their conjugates
    return c.conj()


def build_path_superposition(kraus_a, kraus_b, eps0_overlaps=None, eps1_overlaps=None) -> QuantumChannel:
    """Target sent along two paths, ``M_A`` on path 0 and ``M_B`` on path 1, environments traced out.

    Path 0 records ``M_A``'s Kraus index in ``E_0`` while ``E_1`` sits in
    ``|eps_1>``; path 1 does the converse. The result maps ``P`` to ``(C, F)``
    and depends on the Kraus operators chosen, not just on the two channels.
    Overlap vectors default to the first basis state.
    """
    ka = [np.asarray(k, dtype=complex) for k in kraus_a]
    kb = [np.asarray(k, dtype=complex) for k in kraus_b]
    d = ka[0].shape[1]
    if any(k.shape != (d, d) for k in ka + kb):
        raise DimensionError("all Kraus operators must be d x d with a common d")
    na, nb = len(ka), len(kb)
    eps0 = _environment_vector(eps0_overlaps, na, "eps0_overlaps")
    eps1 = _environment_vector(eps1_overlaps, nb, "eps1_overlaps")
    # isometry tensor indexed (c, target_out, e0, e1, target_in)
    v = np.zeros((2, d, na, nb, d), dtype=complex)
    for i, k in enumerate(ka):
        v[0, :, i, :, :] += np.einsum("ot,e->oet", k, eps1)
    for j, l in enumerate(kb):
        v[1, :, :, j, :] += np.einsum("ot,e->oet", l, eps0)
    v /= np.sqrt(2)
    kraus = [v[:, :, e0, e1, :].reshape(2 * d, d) for e0 in range(na) for e1 in range(nb)]
    kraus = [k for k in kraus if np.any(np.abs(k) > 0)]
    return QuantumChannel(kraus, in_layout=SpaceLayout.single(P, d),
                          out_layout=SpaceLayout([(C, 2), (F, d)]))
