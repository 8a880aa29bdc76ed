"""Experiment configs: JSON schema, validation with line numbers, model builders."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from . import classical, quantum
from .errors import ConfigError
from .pointers import PointerConfig, normalize_width

_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {
            "type": "object",
            "properties": {"re": _number, "im": _number},
            "required": ["re"],
            "additionalProperties": False,
        },
    ]
}
_width = {"oneOf": [{"type": "number", "minimum": 0}, {"enum": ["accurate", "decoupled"]}]}
_pointer = {
    "type": "object",
    "properties": {"slot": {"type": "integer", "minimum": 1, "maximum": 5}, "width": _width},
    "required": ["slot", "width"],
    "additionalProperties": False,
}
_pointers = {"type": "array", "items": _pointer}


def _matrix(entry):
    row = {"type": "array", "items": entry, "minItems": 2, "maxItems": 2}
    return {"type": "array", "items": row, "minItems": 2, "maxItems": 2}


_selection = {"enum": [0, 1, None]}

CLASSICAL_SCHEMA = {
    "type": "object",
    "properties": {
        "w": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "leg1": _matrix({"type": "number", "minimum": 0, "maximum": 1}),
        "leg3": _matrix({"type": "number", "minimum": 0, "maximum": 1}),
        "P": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2},
        "pointers": _pointers,
        "preselect": _selection,
        "postselect": _selection,
    },
    "oneOf": [{"required": ["leg1", "leg3"]}, {"required": ["P"]}],
    "additionalProperties": False,
}

QUANTUM_SCHEMA = {
    "type": "object",
    "properties": {
        "leg1": _matrix(_complex),
        "leg2_diag": {"type": "array", "items": _complex, "minItems": 2, "maxItems": 2},
        "leg3": _matrix(_complex),
        "amplitudes": {"type": "array", "items": _complex, "minItems": 2, "maxItems": 2},
        "pointers": _pointers,
    },
    "oneOf": [{"required": ["leg1", "leg2_diag", "leg3"]}, {"required": ["amplitudes"]}],
    "additionalProperties": False,
}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "properties": {
        "classical": CLASSICAL_SCHEMA,
        "quantum": QUANTUM_SCHEMA,
        "pointers": _pointers,
        "sweep": {
            "type": "object",
            "properties": {
                "parameter": {"const": "width"},
                "slot": {"type": "integer", "minimum": 1, "maximum": 5},
                "values": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"enum": ["accurate", "decoupled"]}]},
                },
            },
            "required": ["parameter", "slot", "values"],
            "additionalProperties": False,
        },
        "samples": {
            "type": "object",
            "properties": {"n": {"type": "integer", "minimum": 1}, "seed": {"type": "integer", "minimum": 0}},
            "required": ["n"],
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}},
            "additionalProperties": False,
        },
        "grid": {"type": "integer", "minimum": 2},
    },
    "oneOf": [{"required": ["classical"]}, {"required": ["quantum"]}],
    "additionalProperties": False,
}


@dataclass
class ExperimentConfig:
    kind: str  # "classical" or "quantum"
    model: Any
    pointers: list[PointerConfig]
    preselect: int | None = None
    postselect: int | None = None
    sweep: dict | None = None
    samples: dict | None = None
    output: dict = field(default_factory=lambda: {"format": "csv"})
    grid: int | None = None

    @property
    def widths(self) -> dict[int, Any]:
        return {p.slot: p.width for p in self.pointers}


def _line_of(text: str, path) -> int | None:
    """1-based line of the node at ``path`` in a JSON document, if it can be found."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt = (k, v)
                    break
            if nxt is None:
                break
            line = nxt[0].start_mark.line + 1
            node = nxt[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _path_str(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _complex(v) -> complex:
    if isinstance(v, dict):
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    return complex(v)


def _pointers(items) -> list[PointerConfig]:
    return [PointerConfig(int(p["slot"]), normalize_width(p["width"])) for p in items or []]


def build_classical(doc: dict) -> classical.TransitionModel:
    if "P" in doc:
        return classical.TransitionModel.two_way(*doc["P"])
    return classical.TransitionModel(doc["leg1"], doc["leg3"], tuple(doc.get("w", (0.5, 0.5))))


def build_quantum(doc: dict):
    if "amplitudes" in doc:
        return tuple(_complex(a) for a in doc["amplitudes"])
    leg1 = [[_complex(x) for x in row] for row in doc["leg1"]]
    leg3 = [[_complex(x) for x in row] for row in doc["leg3"]]
    return quantum.AmplitudeModel(leg1, [_complex(x) for x in doc["leg2_diag"]], leg3)


def parse_config(doc: dict, text: str | None = None, source: str | None = None) -> ExperimentConfig:
    """Validate ``doc`` and build the experiment.

    A bare model document (as accepted by either model schema) is wrapped
    automatically.  ``text`` is the raw document, used to anchor errors.
    """
    prefix: tuple = ()
    if isinstance(doc, dict) and "classical" not in doc and "quantum" not in doc:
        kind = "quantum" if ("leg2_diag" in doc or "amplitudes" in doc) else "classical"
        doc = {kind: doc}
        prefix = (kind,)
    validator = jsonschema.Draft202012Validator(EXPERIMENT_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        rel = path[len(prefix):] if path[: len(prefix)] == list(prefix) else path
        line = _line_of(text, rel) if text is not None else None
        raise ConfigError(f"{_path_str(path)}: {err.message}", line, source)

    kind = "classical" if "classical" in doc else "quantum"
    mdoc = doc[kind]
    try:
        model = build_classical(mdoc) if kind == "classical" else build_quantum(mdoc)
        pointers = _pointers(mdoc.get("pointers")) + _pointers(doc.get("pointers"))
        slots = [p.slot for p in pointers]
        if len(slots) != len(set(slots)):
            raise ValueError("more than one pointer at the same slot")
    except ValueError as exc:
        anchor = [] if prefix else [kind]
        line = _line_of(text, anchor) if text is not None else None
        raise ConfigError(f"{kind}: {exc}", line, source) from None
    if kind == "classical":
        # the two-way shortcut implies selection on I0 and F1 unless overridden
        two_way = "P" in mdoc
        preselect = mdoc.get("preselect", 0 if two_way else None)
        postselect = mdoc.get("postselect", 1 if two_way else None)
    else:
        preselect, postselect = 0, 1
    return ExperimentConfig(
        kind=kind,
        model=model,
        pointers=pointers,
        preselect=preselect,
        postselect=postselect,
        sweep=doc.get("sweep"),
        samples=doc.get("samples"),
        output={"format": "csv", **doc.get("output", {})},
        grid=doc.get("grid"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, str(path)) from None
    return parse_config(doc, text, str(path))
