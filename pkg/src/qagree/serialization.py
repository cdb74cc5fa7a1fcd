"""Scenario files and canonical JSON text.

A scenario file is a JSON object::

    {"format_version": 1, "kind": "...", "payload": {...}}

Complex numbers are ``[re, im]`` pairs, states are lists of complex numbers
and matrices are lists of rows. Payload keys per kind:

* ``instrument``: ``kraus``
* ``dilation``: ``kraus``, ``unitary``
* ``ozawa``: ``dims`` ``[d, m1, m2]``, ``unitary``, ``sys_projectors``,
  ``meter1_projectors``, ``meter2_projectors``, ``xi1``, ``xi2``
* ``agents``: ``alice_basis``, ``bob_kraus``, ``initial_state``

:func:`dumps` writes keys in insertion order and floats with 17 significant
digits, so parsing and re-serializing a file it produced is byte-identical.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .agents import AgentScenario, make_agent_scenario
from .dilation import DilationModel, check_dilation
from .errors import DimensionMismatch, InvariantViolation, ScenarioSyntaxError
from .instruments import KrausInstrument, validate_instrument
from .ozawa import OzawaScenario, make_scenario

FORMAT_VERSION = 1
KINDS = ("instrument", "dilation", "ozawa", "agents")


def _number(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    # + 0.0 turns -0.0 into 0.0, which json would read back as the int 0
    return format(x + 0.0, ".17g")


def _scalar(x):
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    return _number(x)


def _depth(x):
    if isinstance(x, (list, tuple)):
        return 1 + max((_depth(v) for v in x), default=0)
    return 0


def _dump(obj, level, out):
    pad = "  " * level
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _dump(v, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        obj = obj.tolist() if isinstance(obj, np.ndarray) else list(obj)
        if _depth(obj) <= 2 and not any(isinstance(v, dict) for v in obj):
            # vectors and complex-number lists stay on one line
            out.append(_inline(obj))
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad + "  ")
            _dump(v, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(obj))


def _inline(obj):
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_inline(v) for v in obj) + "]"
    return _scalar(obj)


def dumps(obj):
    """Canonical text: 2-space indent, no trailing whitespace, final newline."""
    out = []
    _dump(obj, 0, out)
    return "".join(out) + "\n"


def encode_vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def encode_matrix(m):
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def scenario_to_dict(obj):
    """File-schema dict for an instrument, dilation, Ozawa or agent scenario."""
    if isinstance(obj, KrausInstrument):
        kind, payload = "instrument", {"kraus": [encode_matrix(a) for a in obj.kraus_ops]}
    elif isinstance(obj, DilationModel):
        kind = "dilation"
        payload = {
            "kraus": [encode_matrix(a) for a in obj.instrument.kraus_ops],
            "unitary": encode_matrix(obj.unitary),
        }
    elif isinstance(obj, OzawaScenario):
        kind = "ozawa"
        payload = {
            "dims": list(obj.dims),
            "unitary": encode_matrix(obj.unitary),
            "sys_projectors": [encode_matrix(p) for p in obj.sys_projectors],
            "meter1_projectors": [encode_matrix(p) for p in obj.meter1_projectors],
            "meter2_projectors": [encode_matrix(p) for p in obj.meter2_projectors],
            "xi1": encode_vector(obj.xi1),
            "xi2": encode_vector(obj.xi2),
        }
    elif isinstance(obj, AgentScenario):
        kind = "agents"
        payload = {
            "alice_basis": [encode_vector(v) for v in obj.alice_basis],
            "bob_kraus": [encode_matrix(a) for a in obj.bob_instrument.kraus_ops],
            "initial_state": encode_vector(obj.initial_state),
        }
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}


def dump_scenario(obj, path):
    text = dumps(scenario_to_dict(obj))
    Path(path).write_text(text, encoding="utf-8")
    return text


def _complex(x, field):
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in x)
    ):
        raise InvariantViolation("complex entry", detail=f"{field}: expected [re, im], got {x!r}")
    z = complex(x[0], x[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvariantViolation("finite", detail=field)
    return z


def decode_vector(data, field):
    if not isinstance(data, list) or not data:
        raise InvariantViolation("well-formed", detail=f"{field}: expected a nonempty list")
    return np.array([_complex(x, f"{field}[{i}]") for i, x in enumerate(data)], dtype=complex)


def decode_matrix(data, field, square=True):
    if not isinstance(data, list) or not data:
        raise InvariantViolation("well-formed", detail=f"{field}: expected a nonempty list of rows")
    rows = [decode_vector(r, f"{field}[{i}]") for i, r in enumerate(data)]
    if len({r.shape[0] for r in rows}) != 1:
        raise InvariantViolation("rectangular", detail=field)
    m = np.array(rows)
    if square and m.shape[0] != m.shape[1]:
        raise InvariantViolation("square", detail=f"{field} is {m.shape[0]}x{m.shape[1]}")
    return m


def _matrices(payload, key):
    data = payload[key]
    if not isinstance(data, list) or not data:
        raise InvariantViolation("well-formed", detail=f"{key}: expected a nonempty list")
    return [decode_matrix(m, f"{key}[{i}]") for i, m in enumerate(data)]


_PAYLOAD_KEYS = {
    "instrument": ("kraus",),
    "dilation": ("kraus", "unitary"),
    "ozawa": (
        "dims",
        "unitary",
        "sys_projectors",
        "meter1_projectors",
        "meter2_projectors",
        "xi1",
        "xi2",
    ),
    "agents": ("alice_basis", "bob_kraus", "initial_state"),
}


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def loads_scenario(text, require_unitary=True):
    """Parse scenario text into the matching domain object.

    ``require_unitary=False`` lets an Ozawa scenario through with a
    non-unitary coupling so that a verifier can report on it.

    Raises
    ------
    ScenarioSyntaxError
        Text is not valid JSON; carries line and column.
    InvariantViolation
        Structure or a domain invariant is violated; names the invariant.
    """
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise InvariantViolation("finite", detail=str(exc)) from None
    if not isinstance(doc, dict):
        raise InvariantViolation("schema", detail="top level must be an object")
    for key in ("format_version", "kind", "payload"):
        if key not in doc:
            raise InvariantViolation("schema", detail=f"missing key {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise InvariantViolation("format_version", detail=f"unsupported {doc['format_version']!r}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise InvariantViolation("kind", detail=f"unknown kind {kind!r}")
    payload = doc["payload"]
    if not isinstance(payload, dict):
        raise InvariantViolation("schema", detail="payload must be an object")
    for key in _PAYLOAD_KEYS[kind]:
        if key not in payload:
            raise InvariantViolation("schema", detail=f"missing payload key {key!r}")

    try:
        if kind == "instrument":
            return validate_instrument(_matrices(payload, "kraus"))
        if kind == "dilation":
            instr = validate_instrument(_matrices(payload, "kraus"))
            u = decode_matrix(payload["unitary"], "unitary")
            if u.shape[0] != instr.dim * instr.num_outcomes:
                raise InvariantViolation("dims", detail="unitary size must be d*N")
            return check_dilation(DilationModel(instr, u))
        if kind == "ozawa":
            dims = payload["dims"]
            if (
                not isinstance(dims, list)
                or len(dims) != 3
                or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in dims)
            ):
                raise InvariantViolation("dims", detail="expected [d, m1, m2] of positive integers")
            scn = make_scenario(
                decode_matrix(payload["unitary"], "unitary"),
                _matrices(payload, "sys_projectors"),
                _matrices(payload, "meter1_projectors"),
                _matrices(payload, "meter2_projectors"),
                decode_vector(payload["xi1"], "xi1"),
                decode_vector(payload["xi2"], "xi2"),
                require_unitary=require_unitary,
            )
            if list(scn.dims) != dims:
                raise InvariantViolation("dims", detail=f"declared {dims}, found {list(scn.dims)}")
            return scn
        basis = payload["alice_basis"]
        if not isinstance(basis, list) or not basis:
            raise InvariantViolation("well-formed", detail="alice_basis: expected a nonempty list")
        return make_agent_scenario(
            [decode_vector(v, f"alice_basis[{i}]") for i, v in enumerate(basis)],
            _matrices(payload, "bob_kraus"),
            decode_vector(payload["initial_state"], "initial_state"),
        )
    except DimensionMismatch as exc:
        raise InvariantViolation("dims", detail=str(exc)) from None


def parse_scenario(path, require_unitary=True):
    """Read and validate a scenario file; see :func:`loads_scenario`."""
    return loads_scenario(read_text(path), require_unitary)


def read_text(path):
    return Path(path).read_bytes().decode("utf-8")


def digest(data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()
