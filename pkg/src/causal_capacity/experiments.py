"""Registry of end-to-end checks, one per communication claim, with auditable reports."""

from __future__ import annotations

import csv
import io as _io
import platform
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .capacity import (
    Ensemble,
    bottleneck_audit,
    entanglement_fidelity,
    holevo_quantity,
    kl_correctability,
    measure_and_correct_decoder,
    optimize_holevo,
)
from .channels import (
    X,
    QuantumChannel,
    bit_flip,
    choi_trace_distance,
    compose,
    depolarizing,
    identity_channel,
    pauli_depolarizing,
    phase_flip,
    pure_cj,
    random_cptp,
    xy_channel,
)
from .circuits import encoder_isometry, noisy_encoder_channel, shor_restricted_circuit
from .errors import UnknownExperimentError
from .io import dumps
from .processes import (
    DirectPureProcessSpec,
    Order,
    apply_process,
    build_cnot_sdpp,
    build_direct_pure_process,
    build_path_superposition,
    build_salek_sdpp,
    build_shor_sdpp,
    build_switch,
    reduced_process,
)

CSV_HEADER = ["name", "pass", "value", "threshold", "seed", "wall_ms"]


@dataclass
class ExperimentConfig:
    name: str
    seed: int = 0
    tolerance_overrides: dict[str, float] = field(default_factory=dict)
    tol_scale: float = 1.0


@dataclass
class ExperimentReport:
    name: str
    claim: str
    values: dict
    thresholds: dict
    passed: bool
    value: float
    threshold: float
    seed: int
    wall_ms: float = 0.0
    versions: dict = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "claim": self.claim,
            "pass": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "seed": self.seed,
            "thresholds": self.thresholds,
            "values": self.values,
            "versions": self.versions,
        }
        if include_timing:
            out["wall_ms"] = self.wall_ms
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        return cls(doc["name"], doc["claim"], doc["values"], doc["thresholds"], doc["pass"],
                   doc["value"], doc["threshold"], doc["seed"], doc.get("wall_ms", 0.0), doc["versions"])


@dataclass
class _Experiment:
    claim: str
    thresholds: dict[str, float]
    run: Callable[[int, dict], tuple[dict, bool, float, str]]


def _plain(x):
    """Convert numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.complexfloating, complex)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    return x


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _marginal_control(rho_cf: np.ndarray) -> np.ndarray:
    return np.einsum("afbf->ab", rho_cf.reshape(2, 2, 2, 2))


def _state_fidelity_pure(rho: np.ndarray, ket: np.ndarray) -> float:
    return float(np.real(ket.conj() @ rho @ ket))


PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


def _direct_identity():
    i2 = np.eye(2)
    return build_direct_pure_process(DirectPureProcessSpec(Order.A_THEN_B, i2, i2, i2))


def _ebler(seed: int, th: dict):
    dep = depolarizing(2)
    switch = optimize_holevo(apply_process(build_switch(), dep, dep), seed=seed)
    direct = optimize_holevo(apply_process(_direct_identity(), dep, dep), n_restarts=4, seed=seed)
    monotone = all(b >= a - 1e-12 for a, b in zip(switch.history, switch.history[1:]))
    values = {
        "chi_switch": switch.value,
        "chi_direct": direct.value,
        "switch_report": switch.to_dict(),
        "history_monotone": monotone,
        "control_dim": 2,
    }
    ok = switch.value >= th["chi_min"] and direct.value <= th["baseline_tol"] and monotone
    return values, ok, switch.value, "chi_min"


def _decoded_fidelity(process, m_a, m_b, syndrome):
    induced = apply_process(process, m_a, m_b)
    dec = measure_and_correct_decoder(induced, syndrome)
    return entanglement_fidelity(compose(dec, induced)), induced


def _chiribella_switch(seed: int, th: dict):
    xy = xy_channel()
    fid, induced = _decoded_fidelity(build_switch(), xy, xy, "control")
    target_decoder_fid, _ = _decoded_fidelity(build_switch(), xy, xy, "target")
    cert = kl_correctability(induced)
    values = {
        "fidelity_control_syndrome_decoder": fid,
        "fidelity_target_syndrome_decoder": target_decoder_fid,
        "kl_correctable": cert.correctable,
        "kl_max_violation": cert.max_violation,
        "kl_recovery_fidelity": cert.fidelity,
    }
    ok = fid >= 1 - th["fidelity_tol"] and cert.correctable
    return values, ok, fid, "fidelity_tol"


def _chiribella_cnot(seed: int, th: dict):
    xy = xy_channel()
    fid, induced = _decoded_fidelity(build_cnot_sdpp(), xy, xy, "target")
    cert = kl_correctability(induced)
    composed = compose(xy, xy)
    composition_err = _max_abs(composed.choi.matrix, phase_flip(0.5).choi.matrix)
    values = {
        "fidelity": fid,
        "kl_correctable": cert.correctable,
        "kl_recovery_fidelity": cert.fidelity,
        "xy_composition_vs_phase_flip_half": composition_err,
    }
    ok = fid >= 1 - th["fidelity_tol"] and cert.correctable and composition_err <= th["entry_tol"]
    return values, ok, fid, "fidelity_tol"


GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def _salek(seed: int, th: dict):
    process = build_salek_sdpp()
    audit = bottleneck_audit(bit_flip(0.5), phase_flip(0.5), process, seed=seed)
    grid = []
    ok_grid = True
    for p in GRID:
        for q in GRID:
            ma, mb = bit_flip(p), phase_flip(q)
            cert = kl_correctability(apply_process(process, ma, mb))
            fid, _ = _decoded_fidelity(process, ma, mb, "target")
            rate = 1.0 if cert.correctable else 0.0
            grid.append({"p": p, "q": q, "assisted_rate": rate, "decoded_fidelity": fid})
            ok_grid &= rate == 1.0 and fid >= 1 - th["fidelity_tol"]
    values = {"audit": audit.to_dict(), "grid": grid}
    ok = (audit.q_a <= th["capacity_tol"] and audit.q_b <= th["capacity_tol"] and audit.certified
          and audit.assisted_fidelity >= 1 - th["fidelity_tol"] and audit.violation and ok_grid)
    return values, ok, audit.assisted_rate, "fidelity_tol"


def _shor(seed: int, th: dict, n_pairs: int = 20, env_dim: int = 4, n_cross: int = 5):
    rng = np.random.default_rng(seed)
    process = build_shor_sdpp()
    drawn = build_shor_sdpp("as_drawn")
    ops, n, target, anc = shor_restricted_circuit()
    iso = encoder_isometry(ops, n, target, anc)
    samples = []
    for i in range(n_pairs):
        ma = random_cptp(2, 2, env_dim, rng)
        mb = random_cptp(2, 2, env_dim, rng)
        induced = apply_process(process, ma, mb)
        cert = kl_correctability(induced)
        entry = {"kl_correctable": cert.correctable, "kl_max_violation": cert.max_violation,
                 "recovery_fidelity": cert.fidelity,
                 "as_drawn_kl_max_violation": kl_correctability(apply_process(drawn, ma, mb)).max_violation}
        if i < n_cross:
            circuit = noisy_encoder_channel(iso, compose(mb, ma), target, n, induced.out_layout)
            entry["circuit_choi_max_diff"] = _max_abs(circuit.choi.matrix, induced.choi.matrix)
        samples.append(entry)
    min_fid = min(s["recovery_fidelity"] or 0.0 for s in samples)
    max_cross = max(s["circuit_choi_max_diff"] for s in samples[:n_cross])
    values = {"n_pairs": n_pairs, "env_dim": env_dim, "control_dim": 16, "min_recovery_fidelity": min_fid,
              "max_circuit_choi_diff": max_cross,
              "as_drawn_correctable_pairs": sum(s["as_drawn_kl_max_violation"] <= 1e-8 for s in samples),
              "samples": samples}
    ok = all(s["kl_correctable"] for s in samples) and min_fid >= 1 - th["fidelity_tol"] \
        and max_cross <= th["choi_tol"]
    return values, ok, min_fid, "fidelity_tol"


def _fourier(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def _paths(seed: int, th: dict):
    pauli = pauli_depolarizing()
    f = _fourier(4)
    remixed = QuantumChannel([sum(f[j, i] * pauli.kraus[i] for i in range(4)) for j in range(4)])
    same_channel = _max_abs(pauli.choi.matrix, remixed.choi.matrix)
    sup_pauli = build_path_superposition(pauli.kraus, pauli.kraus)
    sup_remix = build_path_superposition(remixed.kraus, remixed.kraus)
    dist = choi_trace_distance(sup_pauli, sup_remix)
    switch_diff = _max_abs(apply_process(build_switch(), pauli, pauli).choi.matrix,
                           apply_process(build_switch(), remixed, remixed).choi.matrix)
    values = {"kraus_sets_choi_max_diff": same_channel, "path_superposition_distance": dist,
              "switch_choi_max_diff": switch_diff}
    ok = same_channel <= th["entry_tol"] and dist > th["min_distance"] and switch_diff <= th["entry_tol"]
    return values, ok, dist, "min_distance"


def _reduced(seed: int, th: dict):
    eye8 = np.eye(8)
    ii = pure_cj(np.eye(2))
    pf = np.outer(ii, ii).reshape(2, 2, 2, 2)
    off = np.array([[0, 1], [1, 0]])
    # (P, C, F) ordering; |I>><<I| lives on P and F
    side = np.einsum("cd,pfqg->pcfqdg", off, pf).reshape(8, 8)
    expected_switch = eye8 / 4 + side / 8
    expected_cnot = (eye8 + np.kron(np.kron(X, X), np.eye(2))) / 4
    err_switch = _max_abs(reduced_process(build_switch()).matrix, expected_switch)
    err_cnot = _max_abs(reduced_process(build_cnot_sdpp()).matrix, expected_cnot)
    values = {"switch_max_entry_error": err_switch, "cnot_max_entry_error": err_cnot}
    worst = max(err_switch, err_cnot)
    return values, worst <= th["entry_tol"], worst, "entry_tol"


def _one_party(seed: int, th: dict):
    dep = depolarizing(2)
    w = build_cnot_sdpp()
    one = apply_process(w, dep, identity_channel(2))
    two = apply_process(w, dep, dep)
    ens = Ensemble.uniform([PLUS, MINUS])
    chi_one = holevo_quantity(one, ens)
    chi_two = holevo_quantity(two, ens)
    diff = _max_abs(one.choi.matrix, two.choi.matrix)
    values = {"chi_one_party": chi_one, "chi_two_party": chi_two, "induced_choi_max_diff": diff}
    ok = abs(chi_one - 1) <= th["chi_tol"] and abs(chi_two - 1) <= th["chi_tol"] and diff <= th["entry_tol"]
    return values, ok, chi_one, "chi_tol"


REGISTRY: dict[str, _Experiment] = {
    "ebler": _Experiment(
        "Two completely depolarizing qubit channels inside the quantum switch give a Holevo "
        "quantity of at least 0.048 bits, while the fixed-order direct process gives zero.",
        {"chi_min": 0.048, "baseline_tol": 1e-9}, _ebler),
    "chiribella_switch": _Experiment(
        "The quantum switch fed with two (X.X + Y.Y)/2 channels transmits one qubit perfectly.",
        {"fidelity_tol": 1e-9}, _chiribella_switch),
    "chiribella_cnot": _Experiment(
        "The causally ordered CNOT superposition fed with two (X.X + Y.Y)/2 channels transmits "
        "one qubit perfectly with the measure-target-and-correct decoder.",
        {"fidelity_tol": 1e-9, "entry_tol": 1e-10}, _chiribella_cnot),
    "salek_bottleneck": _Experiment(
        "With a bit-flip and a phase-flip channel the Hadamard-conjugated CNOT superposition "
        "carries one qubit perfectly although each channel alone has zero quantum capacity at p = q = 1/2.",
        {"fidelity_tol": 1e-9, "capacity_tol": 1e-6}, _salek),
    "shor_sdpp": _Experiment(
        "The sixteen-term superposition obtained from the Shor code carries one qubit perfectly "
        "for arbitrary channel pairs.",
        {"fidelity_tol": 1e-9, "choi_tol": 1e-9}, _shor),
    "paths_kraus_dependence": _Experiment(
        "Superposing two paths gives a channel that changes with the Kraus decomposition of the "
        "same noisy channels, unlike any process matrix.",
        {"entry_tol": 1e-10, "min_distance": 0.01}, _paths),
    "reduced_processes": _Experiment(
        "The reduced processes of the switch and of the CNOT superposition equal their closed forms.",
        {"entry_tol": 1e-10}, _reduced),
    "one_party_variant": _Experiment(
        "Dropping the second channel from the CNOT superposition leaves the one-bit phase-kickback "
        "protocol unchanged.",
        {"chi_tol": 1e-9, "entry_tol": 1e-10}, _one_party),
}

_TOLERANCE_KEYS = ("_tol",)


def experiment_names() -> list[str]:
    return list(REGISTRY)


def _versions() -> dict:
    return {"causal_capacity": __version__, "numpy": np.__version__, "python": platform.python_version()}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    try:
        exp = REGISTRY[config.name]
    except KeyError:
        raise UnknownExperimentError(
            f"unknown experiment {config.name!r}; choose from {', '.join(REGISTRY)}") from None
    thresholds = {}
    for key, val in exp.thresholds.items():
        thresholds[key] = val * config.tol_scale if key.endswith(_TOLERANCE_KEYS) else val
    for key, val in config.tolerance_overrides.items():
        if key not in thresholds:
            raise KeyError(f"experiment {config.name!r} has no threshold {key!r}")
        thresholds[key] = float(val)
    start = time.perf_counter()
    values, ok, value, threshold_key = exp.run(config.seed, thresholds)
    wall_ms = (time.perf_counter() - start) * 1e3
    return ExperimentReport(config.name, exp.claim, _plain(values), thresholds, bool(ok), float(value),
                            float(thresholds[threshold_key]), config.seed, wall_ms, _versions())


def report_json(reports: ExperimentReport | list[ExperimentReport], include_timing: bool = False) -> str:
    if isinstance(reports, ExperimentReport):
        return dumps(reports.to_dict(include_timing))
    return dumps({"pass": all(r.passed for r in reports),
                  "experiments": [r.to_dict(include_timing) for r in reports]})


def report_csv(reports: ExperimentReport | list[ExperimentReport]) -> str:
    if isinstance(reports, ExperimentReport):
        reports = [reports]
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in reports:
        writer.writerow([r.name, str(r.passed).lower(), repr(r.value), repr(r.threshold), r.seed,
                         f"{r.wall_ms:.1f}"])
    return buf.getvalue()


def emit_report(reports: ExperimentReport | list[ExperimentReport], fmt: str = "json", path=None,
                include_timing: bool = False) -> str:
    """Render reports as JSON or CSV; write them to ``path`` when given."""
    if fmt == "json":
        text = report_json(reports, include_timing)
    elif fmt == "csv":
        text = report_csv(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
