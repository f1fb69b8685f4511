"""Project files: JSON documents configuring one generation run."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

_BOUND = {
    "type": "object",
    "required": ["type"],
    "additionalProperties": False,
    "properties": {
        "type": {"enum": ["Number", "Boolean", "Void", "OrderedSet", "PType", "Enum", "String", "Unknown"]},
        "ranges": {"type": "array", "items": {
            "type": "object", "required": ["lo", "hi"], "additionalProperties": False,
            "properties": {"lo": {"type": "integer"}, "hi": {"type": "integer"},
                           "step": {"type": "integer", "minimum": 1}}}},
        "constants": {"type": "array", "items": {"type": "integer"}},
        "allowTrue": {"type": "boolean"},
        "allowFalse": {"type": "boolean"},
        "enum": {"type": "string"},
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "element": {"$ref": "#/$defs/bound"},
        "category": {"type": "string"},
        "literals": {"type": "array", "items": {"type": "string"}},
    },
}

_STUB_BODY = {
    "methods": {"type": "object", "additionalProperties": {
        "type": "object", "required": ["returnBound"], "additionalProperties": False,
        "properties": {"returnBound": {"$ref": "#/$defs/bound"}, "canThrow": {"type": "boolean"}}}},
    "fields": {"type": "object", "additionalProperties": {"$ref": "#/$defs/bound"}},
}

_FSM = {
    "type": "object",
    "required": ["states", "initial", "transitions"],
    "additionalProperties": False,
    "properties": {
        "states": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "initial": {"type": "string"},
        "transitions": {"type": "array", "items": {
            "type": "object", "required": ["from", "to"], "additionalProperties": False,
            "properties": {
                "from": {"type": "string"}, "to": {"type": "string"},
                "call": {"type": "string"}, "args": {"type": "array"},
                "return": {}, "throw": {"type": "boolean"},
                "load": {"type": "string"}, "store": {"type": "string"}, "value": {},
            },
            "oneOf": [{"required": ["call"]}, {"required": ["load", "value"]}, {"required": ["store"]}],
        }},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "scppkit project",
    "type": "object",
    "required": ["source", "targetClass"],
    "additionalProperties": False,
    "$defs": {"bound": _BOUND, "fsm": _FSM},
    "properties": {
        "source": {"type": "string"},
        "targetClass": {"type": "string"},
        "targetProcId": {"type": "string"},
        "instances": {"type": "object", "additionalProperties": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["transformed", "stub", "custom"]},
                "class": {"type": "string"},
                "fields": {"type": "object"},
                "members": {"type": "object", "additionalProperties": {"type": "string"}},
                "fsm": {"$ref": "#/$defs/fsm"},
                **_STUB_BODY,
            },
        }},
        "globalProcess": {
            "type": "object", "additionalProperties": False,
            "properties": {"kind": {"enum": ["stub", "custom"]}, "fsm": {"$ref": "#/$defs/fsm"}, **_STUB_BODY},
        },
        "topInterface": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "functions": {"type": "object", "additionalProperties": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"argBounds": {"type": "array", "items": {"$ref": "#/$defs/bound"}},
                                   "throwsTerminates": {"type": "boolean"}}}},
                "fields": {"type": "object", "additionalProperties": {
                    "type": "object", "additionalProperties": False,
                    "properties": {"loadable": {"type": "boolean"}, "storeBound": {"$ref": "#/$defs/bound"}}}},
                "script": {"type": "array", "items": {
                    "type": "object", "required": ["func"], "additionalProperties": False,
                    "properties": {"func": {"type": "string"}, "args": {"type": "array"}}}},
            },
        },
        "categories": {"type": "object", "additionalProperties": {
            "type": "array", "items": {"type": "string"}, "minItems": 1}},
        "hide": {"type": "array", "items": {"type": "string"}},
        "rename": {"type": "array", "items": {
            "type": "object", "required": ["pattern", "replacement"], "additionalProperties": False,
            "properties": {"pattern": {"type": "string"}, "replacement": {"type": "string"}}}},
        "limits": {
            "type": "object", "additionalProperties": False,
            "properties": {k: {"type": "integer", "minimum": 1}
                           for k in ("maxStates", "maxTransitions", "maxDepth", "maxFrames")},
        },
    },
}


class ProjectError(Exception):
    pass


def validate_project(doc) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise ProjectError(f"{pointer}: {e.message}")
    return doc


def load_project(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise ProjectError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ProjectError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    return validate_project(doc)


def save_project(project: dict, path) -> None:
    validate_project(project)
    Path(path).write_text(json.dumps(project, indent=2, sort_keys=True) + "\n")


def source_path(project: dict, project_path) -> Path:
    """The source file, resolved relative to the project file."""
    src = Path(project["source"])
    return src if src.is_absolute() else Path(project_path).parent / src


def limits_of(project: dict):
    from .statespace import Limits

    d = project.get("limits", {})
    kw = {}
    for key, name in (("maxStates", "max_states"), ("maxTransitions", "max_transitions"),
                      ("maxDepth", "max_depth"), ("maxFrames", "max_frames")):
        if key in d:
            kw[name] = d[key]
    return Limits(**kw)
