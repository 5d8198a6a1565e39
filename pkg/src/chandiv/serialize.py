"""JSON formats for channels, generators and reports.

Complex matrices are arrays of rows whose entries are ``[re, im]`` pairs.
Floats are written with Python's shortest round-trip repr, and every
object is built in a fixed key order so output is byte-stable.
"""

from __future__ import annotations

import json
import math
import re

import numpy as np

from .channel import (
    DEFAULT_TOL,
    ChoiState,
    KrausRep,
    LinearMap,
    StructureReport,
    Tolerances,
    TransferMatrix,
    build_channel,
    convert,
)
from .errors import NegativeChoi, ParseError, SchemaError
from .markov import (
    GKSForm,
    LindbladGenerator,
    MarkovApproxResult,
    generator_from_transfer,
    make_generator,
    traceless_unitary_basis,
)

CHANNEL_FORMAT = "chandiv/1"
GENERATOR_FORMAT = "chandiv-gen/1"
REPORT_FORMAT = "chandiv-report/1"
SUITE_FORMAT = "chandiv-suite/1"


# -- primitives ---------------------------------------------------------------

def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return None
    return 0.0 if x == 0 else x


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[_num(z.real), _num(z.imag)] for z in row] for row in m]


def decode_matrix(obj, shape=None, where="matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{where}: expected a non-empty array of rows")
    n = len(obj[0])
    out = np.empty((len(obj), n), dtype=complex)
    for i, row in enumerate(obj):
        if len(row) != n:
            raise SchemaError(f"{where}: row {i} has length {len(row)}, expected {n}")
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in z)
            ):
                raise SchemaError(f"{where}[{i}][{j}]: expected [re, im]")
            out[i, j] = complex(z[0], z[1])
    if shape is not None and out.shape != tuple(shape):
        raise SchemaError(f"{where}: shape {out.shape}, expected {tuple(shape)}")
    return out


def loads(text) -> object:
    """Parse UTF-8 JSON; failures raise :class:`ParseError` with line and column."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc.reason} at byte {exc.start}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


_PAIR = re.compile(r"\[\s+(-?[0-9.eE+-]+|null),\s+(-?[0-9.eE+-]+|null)\s+\]")


def dumps(obj, indent=2) -> str:
    """Indented JSON with ``[re, im]`` pairs kept on one line."""
    text = json.dumps(obj, indent=indent, allow_nan=False, ensure_ascii=False)
    return _PAIR.sub(r"[\1, \2]", text) if indent else text


def _require(obj, key, kind, where):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise SchemaError(f"{where}.{key}: expected an integer")
    if kind is not int and not isinstance(val, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}")
    return val


def _check_format(obj, expected, where):
    fmt = _require(obj, "format", str, where)
    if fmt != expected:
        raise SchemaError(f"{where}: unknown format {fmt!r}, expected {expected!r}")


# -- channels -----------------------------------------------------------------

def channel_to_obj(ch: LinearMap, representation: str = "kraus", basis: str = "matrix_units") -> dict:
    d = ch.dim
    obj = {"format": CHANNEL_FORMAT, "dimension": d, "representation": representation}
    if representation == "kraus":
        obj["data"] = [encode_matrix(k) for k in ch.kraus]
    elif representation == "choi":
        obj["data"] = encode_matrix(ch.choi)
    elif representation == "transfer":
        if basis not in ("matrix_units", "gellmann"):
            raise SchemaError(f"unsupported transfer basis {basis!r}")
        obj["basis"] = basis
        obj["data"] = encode_matrix(convert(ch, "transfer", basis).mat)
    else:
        raise SchemaError(f"unknown representation {representation!r}")
    return obj


def channel_from_obj(obj, tol: Tolerances = DEFAULT_TOL, require_cp: bool = True, where="channel"):
    """Build a validated :class:`Channel` from a chandiv/1 object."""
    _check_format(obj, CHANNEL_FORMAT, where)
    d = _require(obj, "dimension", int, where)
    if d < 2:
        raise SchemaError(f"{where}.dimension: must be at least 2")
    rep = _require(obj, "representation", str, where)
    data = _require(obj, "data", list, where)
    if rep == "kraus":
        ops = tuple(decode_matrix(k, (d, d), f"{where}.data[{i}]") for i, k in enumerate(data))
        if not ops:
            raise SchemaError(f"{where}.data: no Kraus operators")
        r = KrausRep(ops)
    elif rep == "choi":
        r = ChoiState(decode_matrix(data, (d * d, d * d), f"{where}.data"))
    elif rep == "transfer":
        basis = _require(obj, "basis", str, where)
        if basis not in ("matrix_units", "gellmann"):
            raise SchemaError(f"{where}.basis: unknown basis {basis!r}")
        r = TransferMatrix(decode_matrix(data, (d * d, d * d), f"{where}.data"), basis)
    else:
        raise SchemaError(f"{where}.representation: unknown value {rep!r}")
    ch = build_channel(r, tol)
    if require_cp and not ch.is_cp:
        raise NegativeChoi(f"{where}: map is not completely positive "
                           f"(min Choi eigenvalue {ch.choi_eigenvalues[-1]:.3g})")
    return ch


def read_channels(text, tol: Tolerances = DEFAULT_TOL, require_cp: bool = True) -> list:
    """One channel object or an array of them."""
    obj = loads(text)
    if isinstance(obj, list):
        if not obj:
            raise SchemaError("empty channel array")
        return [channel_from_obj(o, tol, require_cp, f"channel[{i}]") for i, o in enumerate(obj)]
    return [channel_from_obj(obj, tol, require_cp)]


def read_channel_json(text, tol: Tolerances = DEFAULT_TOL, require_cp: bool = True):
    obj = loads(text)
    return channel_from_obj(obj, tol, require_cp)


def write_channel_json(ch: LinearMap, representation: str = "kraus", basis: str = "matrix_units") -> str:
    return dumps(channel_to_obj(ch, representation, basis))


# -- generators ---------------------------------------------------------------

def generator_to_obj(gen: LindbladGenerator) -> dict:
    diss = gen.dissipator
    if isinstance(diss, GKSForm) and not np.allclose(diss.basis, traceless_unitary_basis(gen.dim)):
        gen = generator_from_transfer(gen.transfer)
        diss = gen.dissipator
    if isinstance(diss, GKSForm):
        d_obj = {"kind": "gks", "basis": "unitary", "g": encode_matrix(diss.g)}
    else:
        d_obj = {"kind": "lindblad_ops", "ops": [encode_matrix(a) for a in diss]}
    return {
        "format": GENERATOR_FORMAT,
        "dimension": gen.dim,
        "hamiltonian": encode_matrix(gen.hamiltonian),
        "dissipator": d_obj,
    }


def generator_from_obj(obj, tol: Tolerances = DEFAULT_TOL) -> LindbladGenerator:
    where = "generator"
    _check_format(obj, GENERATOR_FORMAT, where)
    d = _require(obj, "dimension", int, where)
    h = decode_matrix(_require(obj, "hamiltonian", list, where), (d, d), "generator.hamiltonian")
    diss = _require(obj, "dissipator", dict, where)
    kind = _require(diss, "kind", str, "generator.dissipator")
    if kind == "lindblad_ops":
        ops = _require(diss, "ops", list, "generator.dissipator")
        dis = [decode_matrix(a, (d, d), f"generator.dissipator.ops[{i}]") for i, a in enumerate(ops)]
    elif kind == "gks":
        basis = _require(diss, "basis", str, "generator.dissipator")
        if basis != "unitary":
            raise SchemaError(f"generator.dissipator.basis: unknown basis {basis!r}")
        n = d * d - 1
        dis = GKSForm(decode_matrix(_require(diss, "g", list, "generator.dissipator"), (n, n), "generator.dissipator.g"))
    else:
        raise SchemaError(f"generator.dissipator.kind: unknown value {kind!r}")
    return make_generator(h, dis, tol)


def read_generator_json(text, tol: Tolerances = DEFAULT_TOL) -> LindbladGenerator:
    return generator_from_obj(loads(text), tol)


# -- reports ------------------------------------------------------------------

def _report(kind: str, **fields) -> dict:
    out = {"format": REPORT_FORMAT, "report": kind}
    out.update(fields)
    return out


def structure_report_obj(rep: StructureReport) -> dict:
    return _report(
        "structure",
        is_hermiticity_preserving=rep.is_hermiticity_preserving,
        is_trace_preserving=rep.is_trace_preserving,
        is_unital=rep.is_unital,
        is_completely_positive=rep.is_completely_positive,
        kraus_rank=rep.kraus_rank,
        choi_eigenvalues=[_num(w) for w in rep.choi_eigenvalues],
        det=_num(rep.det),
        purity=_num(rep.purity),
    )


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, complex):
        return [_num(v.real), _num(v.imag)]
    return v if v is None or isinstance(v, str) else str(v)


def normal_form_obj(nf) -> dict:
    if nf is None:
        return None
    return {
        "tag": nf.tag,
        "parameters": _jsonable(nf.form.parameters),
        "filters": [encode_matrix(a) for a in nf.filters],
    }


def _diagnostics(nf) -> dict:
    if nf is None:
        return {"iterations": 0, "residuals": {}}
    diag = nf.diagnostics
    residuals = {k: _jsonable(v) for k, v in sorted(diag.items()) if k != "iterations"}
    return {"iterations": int(diag.get("iterations", 0)), "residuals": residuals}


def lorentz_report_obj(nf) -> dict:
    out = _report("normal_form", **normal_form_obj(nf))
    out["diagnostics"] = _diagnostics(nf)
    return out


def classification_report_obj(rep) -> dict:
    ev = rep.evidence
    return _report(
        "classification",
        divisibility=rep.divisibility.value,
        infinitesimal=rep.infinitesimal.value,
        positive_divisible=bool(rep.positive_divisible),
        normal_form=normal_form_obj(rep.normal_form),
        evidence={
            "kraus_rank": int(ev.kraus_rank),
            "det": _num(ev.det),
            "s_min_sq": None if ev.s_min_sq is None else _num(ev.s_min_sq),
            "det_delta": None if ev.det_delta is None else _num(ev.det_delta),
        },
        diagnostics=_diagnostics(rep.normal_form),
    )


def markov_report_obj(res: MarkovApproxResult, t: float, representation: str = "kraus") -> dict:
    return _report(
        "markov_approx",
        time=_num(t),
        iterations=int(res.iterations),
        objective=_num(res.objective),
        optimal_unitary=encode_matrix(res.u0),
        semigroup_generator=generator_to_obj(res.semigroup_generator),
        dissipative_generator=generator_to_obj(res.dissipative_generator),
        channel=channel_to_obj(res.channel(t), representation),
    )


def suite_report_obj(rep, seed: int) -> dict:
    viol = [
        {"seed": int(v.seed), "description": v.description, "magnitude": _num(v.magnitude)}
        for v in rep.violations
    ]
    return {
        "format": SUITE_FORMAT,
        "suite": rep.suite,
        "seed": int(seed),
        "samples": int(rep.samples),
        "violations": viol,
        "worst_margin": _num(rep.worst_margin),
    }
