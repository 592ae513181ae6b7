"""JSON descriptions of channels and processes.

Matrices are row-major lists of rows; every complex entry is a ``[re, im]``
pair. A channel file holds ``in_dim``, ``out_dim`` and either ``kraus`` (a
list of matrices) or ``choi`` (one matrix). A process file holds ``kind``:
``"switch"``, ``"direct"`` (one term inline) or ``"sdpp"`` (``terms`` list),
where a term is ``{"order": "AB" | "BA", "T": ..., "U": ..., "V": ...}``.
"""

from __future__ import annotations

import json
import numbers
from pathlib import Path

import numpy as np

from .channels import QuantumChannel, is_cptp
from .errors import (
    CausalCapacityError,
    InvariantViolationError,
    ParseError,
    SchemaError,
)
from .processes import (
    DirectPureProcessSpec,
    Order,
    PureProcessVector,
    SdppSpec,
    build_direct_pure_process,
    build_sdpp,
    build_switch,
)
from .tensor_core import LabeledOperator, SpaceLayout


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in m]


def _is_number(v) -> bool:
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


def complex_from_json(v, path: str) -> complex:
    if not isinstance(v, list) or len(v) != 2 or not all(_is_number(x) for x in v):
        raise SchemaError(path, "complex scalar must be a [re, im] pair of numbers")
    return complex(v[0], v[1])


def matrix_from_json(v, path: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise SchemaError(path, "matrix must be a non-empty list of rows")
    rows = []
    for i, row in enumerate(v):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{path}[{i}]", "matrix row must be a non-empty list")
        rows.append([complex_from_json(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    if len({len(r) for r in rows}) != 1:
        raise SchemaError(path, "matrix rows have different lengths")
    m = np.array(rows, dtype=complex)
    if shape is not None and m.shape != shape:
        raise SchemaError(path, f"expected a {shape[0]}x{shape[1]} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def _layout_from_json(v, path: str) -> SpaceLayout:
    if not isinstance(v, list) or not v:
        raise SchemaError(path, "layout must be a non-empty list of [label, dim] pairs")
    factors = []
    for i, f in enumerate(v):
        if (not isinstance(f, list) or len(f) != 2 or not isinstance(f[0], str)
                or not isinstance(f[1], int) or isinstance(f[1], bool) or f[1] < 1):
            raise SchemaError(f"{path}[{i}]", "layout factor must be [label, positive int]")
        factors.append((f[0], f[1]))
    try:
        return SpaceLayout(factors)
    except CausalCapacityError as exc:
        raise SchemaError(path, str(exc)) from None


def _positive_int(doc: dict, key: str) -> int:
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise SchemaError(f"$.{key}", "must be a positive integer")
    return v


def channel_to_dict(c: QuantumChannel, representation: str = "kraus") -> dict:
    doc = {"in_dim": c.in_dim, "out_dim": c.out_dim}
    if c.in_layout.labels != ("in",):
        doc["in_layout"] = [list(f) for f in c.in_layout]
    if c.out_layout.labels != ("out",):
        doc["out_layout"] = [list(f) for f in c.out_layout]
    if representation == "kraus":
        doc["kraus"] = [matrix_to_json(k) for k in c.kraus]
    elif representation == "choi":
        doc["choi"] = matrix_to_json(c.choi.matrix)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return doc


def channel_from_dict(doc, tol: float = 1e-9) -> QuantumChannel:
    if not isinstance(doc, dict):
        raise SchemaError("$", "channel description must be a JSON object")
    in_dim = _positive_int(doc, "in_dim")
    out_dim = _positive_int(doc, "out_dim")
    in_layout = _layout_from_json(doc["in_layout"], "$.in_layout") if "in_layout" in doc else None
    out_layout = _layout_from_json(doc["out_layout"], "$.out_layout") if "out_layout" in doc else None
    for key, layout, dim in (("in_layout", in_layout, in_dim), ("out_layout", out_layout, out_dim)):
        if layout is not None and layout.total_dim != dim:
            raise SchemaError(f"$.{key}", f"layout dimension {layout.total_dim} does not match {dim}")
    if ("kraus" in doc) == ("choi" in doc):
        raise SchemaError("$", "exactly one of 'kraus' or 'choi' is required")
    try:
        if "kraus" in doc:
            ks = doc["kraus"]
            if not isinstance(ks, list) or not ks:
                raise SchemaError("$.kraus", "must be a non-empty list of matrices")
            kraus = [matrix_from_json(k, f"$.kraus[{i}]", (out_dim, in_dim)) for i, k in enumerate(ks)]
            c = QuantumChannel(kraus, in_layout=in_layout, out_layout=out_layout)
        else:
            n = in_dim * out_dim
            j = matrix_from_json(doc["choi"], "$.choi", (n, n))
            in_l = in_layout or SpaceLayout.single("in", in_dim)
            out_l = out_layout or SpaceLayout.single("out", out_dim)
            c = QuantumChannel(choi=LabeledOperator(in_l + out_l, j), in_layout=in_l, out_layout=out_l)
    except SchemaError:
        raise
    except CausalCapacityError as exc:
        raise InvariantViolationError(str(exc)) from None
    if not is_cptp(c, tol):
        raise InvariantViolationError("described map is not completely positive and trace preserving")
    return c


def _term_to_dict(t: DirectPureProcessSpec) -> dict:
    return {"order": t.order.value, "T": matrix_to_json(t.T), "U": matrix_to_json(t.U), "V": matrix_to_json(t.V)}


def process_to_dict(w: PureProcessVector) -> dict:
    if isinstance(w.spec, DirectPureProcessSpec):
        return {"kind": "direct", **_term_to_dict(w.spec)}
    if isinstance(w.spec, SdppSpec):
        return {"kind": "sdpp", "terms": [_term_to_dict(t) for t in w.spec.terms]}
    raise ValueError("process has no constructive description to serialize")


def _term_from_dict(doc, path: str) -> DirectPureProcessSpec:
    if not isinstance(doc, dict):
        raise SchemaError(path, "term must be a JSON object")
    order = doc.get("order")
    if order not in ("AB", "BA"):
        raise SchemaError(f"{path}.order", "must be 'AB' or 'BA'")
    mats = {}
    for key in ("T", "U", "V"):
        if key not in doc:
            raise SchemaError(f"{path}.{key}", "missing unitary")
        m = matrix_from_json(doc[key], f"{path}.{key}")
        if m.shape[0] != m.shape[1]:
            raise SchemaError(f"{path}.{key}", "unitary must be square")
        mats[key] = m
    try:
        return DirectPureProcessSpec(Order(order), mats["T"], mats["U"], mats["V"])
    except CausalCapacityError as exc:
        raise InvariantViolationError(f"{path}: {exc}") from None


def process_from_dict(doc) -> PureProcessVector:
    if not isinstance(doc, dict):
        raise SchemaError("$", "process description must be a JSON object")
    kind = doc.get("kind")
    if kind == "switch":
        return build_switch()
    if kind == "direct":
        return build_direct_pure_process(_term_from_dict(doc, "$"))
    if kind == "sdpp":
        terms = doc.get("terms")
        if not isinstance(terms, list) or not terms:
            raise SchemaError("$.terms", "must be a non-empty list of terms")
        specs = [_term_from_dict(t, f"$.terms[{i}]") for i, t in enumerate(terms)]
        try:
            return build_sdpp(SdppSpec(tuple(specs)))
        except CausalCapacityError as exc:
            raise InvariantViolationError(str(exc)) from None
    raise SchemaError("$.kind", "must be one of 'switch', 'direct', 'sdpp'")


def read_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None


def load_channel(path) -> QuantumChannel:
    return channel_from_dict(read_json(path))


def load_process(path) -> PureProcessVector:
    return process_from_dict(read_json(path))


def write_json(doc, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def data_path(name: str) -> Path:
    """Path of a bundled description file, e.g. ``data_path("switch.json")``."""
    return Path(__file__).parent / "data" / name
