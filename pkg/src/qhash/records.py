"""Run manifests, result records and the key/state file formats.

Key file::

    {"manifest": {...}, "group": [5], "multipliers": [[1], [2], [3], [4]]}

State file::

    {"manifest": {...}, "group": [5], "dims": {"t": 4, "m": 1},
     "amplitudes": [[re, im], ...]}

Amplitudes are branch-major and written with 17 significant digits, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import __version__
from .errors import ParseError
from .groups import Automorphism, GroupSpec
from .hashing import HashState

KINDS = ("state", "overlap", "goodset", "bias", "montecarlo", "bounds", "sweep")

SWEEP_COLUMNS = (
    "group",
    "epsilon",
    "t",
    "seed",
    "delta",
    "is_good",
    "azuma_bound",
    "bad_rate",
    "stderr",
)


@dataclass
class RunManifest:
    command: str
    group: list[int]
    epsilon: float | list[float]
    set_size: int | list[int]
    seed: int | list[int]
    tool_version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_dict(self) -> dict:
        return asdict(self)


_num = {"type": "number"}
_int = {"type": "integer"}
_bool = {"type": "boolean"}
_residues = {"type": "array", "items": _int}
_mults = {"type": "array", "items": {"type": "array", "items": _int}}


def _obj(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "required": sorted(required), "properties": props}


_report = {
    "is_good": _bool,
    "delta": _num,
    "worst": _residues,
    "set_size": _int,
    "epsilon": _num,
    "martingale_bound": _num,
}

PAYLOAD_SCHEMAS: dict[str, dict] = {
    "state": _obj(
        {
            "dims": _obj({"t": _int, "m": _int}),
            "dimension": _int,
            "norm": _num,
            "element": _residues,
        },
        {"out": {"type": ["string", "null"]}, "amplitudes": {"type": "array"}},
    ),
    "overlap": _obj(
        {"x": {"type": "string"}, "y": {"type": "string"}, "overlap_sq": _num,
         "epsilon": _num, "below_epsilon": _bool}
    ),
    "goodset": {
        "oneOf": [
            _obj(dict(_report, multipliers=_mults, mode={"enum": ["sample", "verify"]})),
            _obj({"mode": {"const": "search"}, "found": _bool, "max_t": _int, "epsilon": _num},
                 {"t_min": _int, "multipliers": _mults, "delta": _num}),
        ]
    },
    "bias": _obj(
        {"max_abs_bias": _num, "claimed_zero": _bool, "pool_size": _int,
         "diagnostic": _bool, "per_element_bias": {"type": "array"}}
    ),
    "montecarlo": _obj(
        {"rate": _num, "bound": _num, "stderr": _num, "trials": _int, "bad": _int,
         "insufficient": _bool, "fixed_g": {"type": ["array", "null"]}},
        {"warning": {"type": ["string", "null"]}},
    ),
    "bounds": _obj(
        {"epsilon": _num, "group_order": _int, "paper_size": _int, "union_size": _int,
         "paper_azuma_bound": _num, "union_azuma_bound": _num,
         "selected": {"enum": ["paper", "union"]}, "selected_size": _int}
    ),
    "sweep": _obj({"rows": _int, "out": {"type": "string"}, "columns": {"type": "array"}}),
}


def validate_payload(kind: str, payload: dict) -> None:
    if kind not in PAYLOAD_SCHEMAS:
        raise ParseError(f"unknown record kind {kind!r}")
    try:
        jsonschema.validate(payload, PAYLOAD_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise ParseError(f"invalid {kind} payload: {exc.message}") from None


def make_record(kind: str, manifest: RunManifest, payload: dict) -> dict:
    validate_payload(kind, payload)
    return {"kind": kind, "manifest": manifest.to_dict(), "payload": payload}


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _amplitude_text(amps: np.ndarray) -> str:
    rows = (f"[{z.real:.17g}, {z.imag:.17g}]" for z in amps)
    return "[\n    " + ",\n    ".join(rows) + "\n  ]"


def write_state_file(path: str | Path, spec: GroupSpec, state: HashState, manifest: RunManifest) -> None:
    body = {
        "manifest": manifest.to_dict(),
        "group": list(spec.moduli),
        "dims": {"t": state.t, "m": state.m},
        "amplitudes": "@AMPLITUDES@",
    }
    text = dumps(body).replace('"@AMPLITUDES@"', _amplitude_text(state.amplitudes))
    Path(path).write_text(text + "\n")


def _load_json(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return data


def read_state_file(path: str | Path) -> tuple[GroupSpec, HashState, dict]:
    data = _load_json(path)
    try:
        spec = GroupSpec(tuple(data["group"]))
        t, m = int(data["dims"]["t"]), int(data["dims"]["m"])
        amps = np.array([complex(float(re), float(im)) for re, im in data["amplitudes"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed state file ({exc})") from None
    return spec, HashState(amps, t, m), data.get("manifest", {})


def write_key_file(
    path: str | Path, spec: GroupSpec, key: Sequence[Automorphism], manifest: RunManifest
) -> None:
    body = {
        "manifest": manifest.to_dict(),
        "group": list(spec.moduli),
        "multipliers": [list(k.multipliers) for k in key],
    }
    Path(path).write_text(dumps(body) + "\n")


def read_key_file(path: str | Path) -> tuple[GroupSpec, list[Automorphism], dict]:
    data = _load_json(path)
    try:
        spec = GroupSpec(tuple(data["group"]))
        key = [spec.automorphism(m) for m in data["multipliers"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed key file ({exc})") from None
    if not key:
        raise ParseError(f"{path}: key file lists no automorphisms")
    return spec, key, data.get("manifest", {})


def parse_key(spec: GroupSpec, text: str) -> list[Automorphism]:
    """Inline key syntax: automorphisms separated by commas, components by ``x``.

    ``"1,2,3,4"`` on Z_5; ``"2x3,1x1"`` on Z_3 x Z_5.
    """
    key = []
    for part in text.split(","):
        try:
            mults = [int(u) for u in part.split("x")]
        except ValueError:
            raise ParseError(f"malformed key entry {part!r}") from None
        key.append(spec.automorphism(mults))
    return key
