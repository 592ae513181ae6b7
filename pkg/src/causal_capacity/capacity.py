"""Entropies, capacity lower bounds, and perfect-correctability certificates.

All logarithms are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import PAULIS, X, Z, QuantumChannel, check_state, compose, kraus_of_choi
from .errors import DimensionError, LayoutError
from .processes import C, F, PureProcessVector, apply_process
from .tensor_core import TOL, LabeledOperator, SpaceLayout

ZERO_EIG = 1e-15
FIDELITY_TOL = 1e-9

# Optimizer defaults for the Holevo search.
HOLEVO_N_STATES = 4
HOLEVO_RESTARTS = 32
HOLEVO_MAX_ITER = 500


def _entropy_of_eigs(vals: np.ndarray) -> float:
    vals = vals[vals > ZERO_EIG]
    return float(max(0.0, -np.sum(vals * np.log2(vals))))


def _entropy(m: np.ndarray) -> float:
    return _entropy_of_eigs(np.linalg.eigvalsh((m + m.conj().T) / 2))


def von_neumann_entropy(rho, check: bool = True) -> float:
    m = rho.matrix if isinstance(rho, LabeledOperator) else np.asarray(rho, dtype=complex)
    if check:
        check_state(m, m.shape[0])
    return _entropy(m)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


@dataclass
class Ensemble:
    probabilities: np.ndarray
    states: list[np.ndarray]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("ensemble probabilities must be non-negative and sum to 1")
        if len(p) != len(self.states):
            raise ValueError("one probability per state is required")
        self.probabilities = p
        self.states = [check_state(s, np.asarray(s).shape[0]) for s in self.states]

    @classmethod
    def uniform(cls, kets) -> "Ensemble":
        kets = [np.asarray(k, dtype=complex) for k in kets]
        states = [np.outer(k, k.conj()) / np.vdot(k, k).real for k in kets]
        return cls(np.full(len(kets), 1 / len(kets)), states)

    def to_dict(self) -> dict:
        return {"probabilities": [float(x) for x in self.probabilities],
                "states": [_matrix_json(s) for s in self.states]}


@dataclass
class CapacityReport:
    value: float
    achiever: object
    restarts: int
    seed: int
    converged: bool
    history: list[float] = field(default_factory=list)
    unclamped: Optional[float] = None

    def to_dict(self, include_history: bool = False) -> dict:
        if isinstance(self.achiever, Ensemble):
            achiever = self.achiever.to_dict()
        else:
            achiever = _matrix_json(self.achiever)
        out = {"value": float(self.value), "achiever": achiever, "restarts": self.restarts,
               "seed": self.seed, "converged": self.converged}
        if self.unclamped is not None:
            out["unclamped"] = float(self.unclamped)
        if include_history:
            out["history"] = [float(h) for h in self.history]
        return out


def _matrix_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _holevo(p: np.ndarray, outputs: list[np.ndarray]) -> float:
    avg = sum(pi * s for pi, s in zip(p, outputs))
    return _entropy(avg) - sum(pi * _entropy(s) for pi, s in zip(p, outputs))


def holevo_quantity(c: QuantumChannel, e: Ensemble) -> float:
    """``S(sum_i p_i c(rho_i)) - sum_i p_i S(c(rho_i))``."""
    for s in e.states:
        if s.shape != (c.in_dim, c.in_dim):
            raise DimensionError(f"ensemble state of shape {s.shape} on a {c.in_dim}-dim channel input")
    outputs = [c(s) for s in e.states]
    return max(0.0, _holevo(e.probabilities, outputs))


def _relative_entropies_nats(p: np.ndarray, outputs: list[np.ndarray]) -> np.ndarray:
    avg = sum(pi * s for pi, s in zip(p, outputs))
    vals, vecs = np.linalg.eigh(avg)
    log_avg = (vecs * np.log(np.clip(vals, 1e-300, None))) @ vecs.conj().T
    out = np.empty(len(outputs))
    for i, s in enumerate(outputs):
        w = np.linalg.eigvalsh(s)
        w = w[w > ZERO_EIG]
        out[i] = float(np.sum(w * np.log(w))) - float(np.real(np.trace(s @ log_avg)))
    return np.minimum(out, 50.0)


def _random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _holevo_restart(c: QuantumChannel, n_states: int, max_iter: int, rng: np.random.Generator):
    d = c.in_dim
    kets = [_random_ket(d, rng) for _ in range(n_states)]
    outputs = [c(np.outer(k, k.conj())) for k in kets]
    p = np.full(n_states, 1 / n_states)
    chi = _holevo(p, outputs)
    history = [chi]
    step = 0.3
    converged = False
    quiet = 0
    for _ in range(max_iter):
        before = chi
        # Blahut-Arimoto reweighting for the current classical-quantum channel
        w = p * np.exp(_relative_entropies_nats(p, outputs))
        p_new = w / w.sum()
        chi_new = _holevo(p_new, outputs)
        if chi_new >= chi:
            p, chi = p_new, chi_new
        accepted = False
        for i in range(n_states):
            trial = kets[i] + step * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
            trial /= np.linalg.norm(trial)
            out_i = c(np.outer(trial, trial.conj()))
            trial_outputs = outputs[:i] + [out_i] + outputs[i + 1:]
            chi_trial = _holevo(p, trial_outputs)
            if chi_trial > chi:
                kets[i], outputs, chi = trial, trial_outputs, chi_trial
                accepted = True
        step = min(1.0, step * 1.5) if accepted else max(1e-8, step * 0.6)
        history.append(chi)
        quiet = quiet + 1 if chi - before < 1e-13 else 0
        if step <= 1e-7 and quiet >= 20:
            converged = True
            break
    return chi, p, kets, history, converged


def optimize_holevo(c: QuantumChannel, n_states: int = HOLEVO_N_STATES, n_restarts: int = HOLEVO_RESTARTS,
                    max_iter: int = HOLEVO_MAX_ITER, seed: int = 0) -> CapacityReport:
    """Best Holevo quantity over pure-state ensembles, a lower bound on classical capacity.

    Each restart draws ``n_states`` random pure states from its own generator
    seeded with ``seed + restart``. Iterations alternate a Blahut-Arimoto
    reweighting of the probabilities with greedy random perturbations of
    each state; only non-decreasing moves are kept. Ties between restarts
    go to the lowest index.
    """
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    best = None
    for r in range(n_restarts):
        rng = np.random.default_rng(seed + r)
        result = _holevo_restart(c, n_states, max_iter, rng)
        if best is None or result[0] > best[0]:
            best = result
    chi, p, kets, history, converged = best
    states = [np.outer(k, k.conj()) for k in kets]
    value = float(min(max(chi, 0.0), np.log2(c.out_dim)))
    return CapacityReport(value, Ensemble(p / p.sum(), states), n_restarts, seed, converged, history, chi)


def _purification(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0, None)
    # |phi> = sum_k sqrt(l_k) |e_k> (x) |k>, system first
    return (vecs * np.sqrt(vals)).reshape(-1)


def coherent_information(c: QuantumChannel, rho, check: bool = True) -> float:
    """``S(c(rho)) - S((c (x) id)(|phi_rho><phi_rho|))`` for a purification ``phi_rho``."""
    m = check_state(rho, c.in_dim) if check else np.asarray(rho, dtype=complex)
    d = c.in_dim
    phi = _purification(m).reshape(d, d)
    joint = sum(np.outer(v, v.conj()) for v in ((k @ phi).reshape(-1) for k in c.kraus))
    return _entropy(c(m)) - _entropy(joint)


def _state_from(a: np.ndarray) -> np.ndarray:
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def optimize_coherent_information(c: QuantumChannel, n_restarts: int = 8, max_iter: int = 300,
                                  seed: int = 0) -> CapacityReport:
    """Best one-shot coherent information found by seeded random-perturbation ascent.

    Restart ``r`` uses the generator seeded with ``seed + r``; restart 0
    starts from the maximally mixed state, the others from random mixed
    states. The reported value is clamped below at zero.
    """
    d = c.in_dim
    best = None
    for r in range(n_restarts):
        rng = np.random.default_rng(seed + r)
        if r == 0:
            a = np.eye(d, dtype=complex)
        else:
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        val = coherent_information(c, _state_from(a), check=False)
        history = [val]
        step = 0.3
        converged = False
        quiet = 0
        for _ in range(max_iter):
            before = val
            trial = a + step * np.linalg.norm(a) / d * (
                rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
            t_val = coherent_information(c, _state_from(trial), check=False)
            if t_val > val:
                a, val = trial, t_val
                step = min(1.0, step * 1.5)
            else:
                step = max(1e-8, step * 0.8)
            history.append(val)
            quiet = quiet + 1 if val - before < 1e-13 else 0
            if step <= 1e-7 and quiet >= 20:
                converged = True
                break
        if best is None or val > best[0]:
            best = (val, _state_from(a), history, converged)
    val, rho, history, converged = best
    return CapacityReport(max(0.0, float(val)), rho, n_restarts, seed, converged, history, float(val))


def entanglement_fidelity(c: QuantumChannel) -> float:
    """``<Phi|(c (x) id)(|Phi><Phi|)|Phi>`` for the maximally entangled ``Phi``."""
    if c.in_dim != c.out_dim:
        raise DimensionError("entanglement fidelity needs equal input and output dimensions")
    d = c.in_dim
    return float(sum(abs(np.trace(k)) ** 2 for k in c.kraus) / d ** 2)


@dataclass
class CorrectabilityCertificate:
    correctable: bool
    lam: np.ndarray
    max_violation: float
    recovery: Optional[QuantumChannel] = None
    fidelity: Optional[float] = None

    def to_dict(self) -> dict:
        return {"correctable": self.correctable, "lambda": _matrix_json(self.lam),
                "max_violation": self.max_violation, "fidelity": self.fidelity,
                "recovery_kraus": None if self.recovery is None else [_matrix_json(k) for k in self.recovery.kraus]}


def kl_correctability(c: QuantumChannel, tol: float = 1e-8) -> CorrectabilityCertificate:
    """Knill-Laflamme test with the whole input space as code space.

    When ``G_j^dagger G_k = lambda_jk I`` holds within ``tol`` the recovery
    is built by diagonalizing ``lambda``, turning the rotated Kraus
    operators into isometries with orthogonal ranges, and measuring which
    range the state landed in before rotating back. The certificate only
    reports ``correctable`` if the recovery reaches entanglement fidelity
    ``1 - 1e-9``.
    """
    d = c.in_dim
    g = kraus_of_choi(c.choi, in_dim=d)
    n = len(g)
    lam = np.empty((n, n), dtype=complex)
    violation = 0.0
    eye = np.eye(d)
    for j in range(n):
        for k in range(n):
            m = g[j].conj().T @ g[k]
            lam[j, k] = np.trace(m) / d
            violation = max(violation, float(np.max(np.abs(m - lam[j, k] * eye))))
    if violation > tol:
        return CorrectabilityCertificate(False, lam, violation)
    vals, u = np.linalg.eigh((lam + lam.conj().T) / 2)
    recovery_kraus = []
    ranges = []
    for k in range(n):
        if vals[k] <= 1e-12:
            continue
        f = sum(u[j, k] * g[j] for j in range(n))
        w = f / np.sqrt(vals[k])
        recovery_kraus.append(w.conj().T)
        ranges.append(w)
    rest = np.eye(c.out_dim) - sum(w @ w.conj().T for w in ranges)
    r_vals, r_vecs = np.linalg.eigh((rest + rest.conj().T) / 2)
    for val, q in zip(r_vals, r_vecs.T):
        if val > 0.5:
            k = np.zeros((d, c.out_dim), dtype=complex)
            k[0] = q.conj()
            recovery_kraus.append(k)
    out_layout = SpaceLayout.single("R", d)
    recovery = QuantumChannel(recovery_kraus, in_layout=c.out_layout, out_layout=out_layout)
    fid = entanglement_fidelity(compose(recovery, c))
    return CorrectabilityCertificate(fid >= 1 - FIDELITY_TOL, lam, violation, recovery, fid)


_KET0 = np.array([[1, 0]], dtype=complex)
_KET1 = np.array([[0, 1]], dtype=complex)
_PLUS = np.array([[1, 1]], dtype=complex) / np.sqrt(2)
_MINUS = np.array([[1, -1]], dtype=complex) / np.sqrt(2)


def measure_and_correct_decoder(c: QuantumChannel, syndrome: str = "target") -> QuantumChannel:
    """Two-outcome decoder from ``(C, F)`` back to one qubit.

    ``syndrome="target"``: measure ``F`` in the computational basis and
    return the control, flipped by ``X`` on outcome 1. This is the decoder
    for the CNOT-type superpositions.
    ``syndrome="control"``: measure ``C`` in the ``|+>, |->`` basis and
    return the target, corrected by ``Z`` on outcome ``-``. This is the
    decoder for the switch, where the control flags the error.
    """
    expected = SpaceLayout([(C, 2), (F, 2)])
    if c.out_layout != expected:
        raise LayoutError(f"decoder expects output layout {expected.factors}, got {c.out_layout.factors}")
    i2 = np.eye(2)
    if syndrome == "target":
        kraus = [np.kron(i2, _KET0), np.kron(X, _KET1)]
    elif syndrome == "control":
        kraus = [np.kron(_PLUS, i2), np.kron(_MINUS, Z)]
    else:
        raise ValueError(f"unknown syndrome location {syndrome!r}")
    return QuantumChannel(kraus, in_layout=expected, out_layout=SpaceLayout.single("R", 2))


def flip_channel_parameter(c: QuantumChannel, tol: float = TOL) -> Optional[float]:
    """``p`` if ``c`` is ``(1-p) rho + p P rho P`` for a single Pauli ``P``, else None."""
    if c.in_dim != 2 or c.out_dim != 2:
        return None
    j = c.choi.matrix
    vec_i = PAULIS[0].T.reshape(-1)
    for pauli in PAULIS[1:]:
        v = pauli.T.reshape(-1)
        p = float(np.real(v.conj() @ j @ v)) / 4
        model = (1 - p) * np.outer(vec_i, vec_i) + p * np.outer(v, v.conj())
        if np.max(np.abs(model - j)) <= tol:
            return p
    return None


def exact_flip_capacity(c: QuantumChannel) -> Optional[float]:
    """Quantum capacity ``1 - h(p)`` of a single-Pauli flip channel, None for other channels."""
    p = flip_channel_parameter(c)
    return None if p is None else 1.0 - binary_entropy(p)


@dataclass
class BottleneckReport:
    q_a: float
    q_b: float
    q_composite: float
    exact_q_a: Optional[float]
    exact_q_b: Optional[float]
    exact_q_composite: Optional[float]
    assisted_rate: float
    certified: bool
    assisted_fidelity: Optional[float]
    min_individual: float
    margin: float
    violation: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bottleneck_audit(m_a: QuantumChannel, m_b: QuantumChannel, process: PureProcessVector,
                     margin: float = 1e-6, seed: int = 0, n_restarts: int = 4,
                     max_iter: int = 200) -> BottleneckReport:
    """Compare the process-assisted quantum rate with the individual channels' quantum capacities.

    Individual channels use the exact flip-channel formula when it applies
    and the coherent-information lower bound otherwise. The assisted rate is
    ``log2 d`` when the induced channel passes the Knill-Laflamme test and
    its coherent-information bound otherwise.
    """
    def bound(ch):
        lower = optimize_coherent_information(ch, n_restarts=n_restarts, max_iter=max_iter, seed=seed).value
        return lower, exact_flip_capacity(ch)

    q_a, ex_a = bound(m_a)
    q_b, ex_b = bound(m_b)
    q_ab, ex_ab = bound(compose(m_b, m_a))
    induced = apply_process(process, m_a, m_b)
    cert = kl_correctability(induced)
    if cert.correctable:
        rate = float(np.log2(induced.in_dim))
    else:
        rate = optimize_coherent_information(induced, n_restarts=n_restarts, max_iter=max_iter, seed=seed).value
    best_a = ex_a if ex_a is not None else q_a
    best_b = ex_b if ex_b is not None else q_b
    min_individual = min(best_a, best_b)
    return BottleneckReport(q_a, q_b, q_ab, ex_a, ex_b, ex_ab, rate, cert.correctable, cert.fidelity,
                            min_individual, margin, rate > min_individual + margin)
