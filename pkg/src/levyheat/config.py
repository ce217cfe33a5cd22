"""JSON model configuration: schema validation, canonical form and model building.

A config is a JSON object with a ``variant`` and its parameters, a ``dim``,
an optional ``name``, an optional ``closed_form_psi`` tag (``gaussian``,
``stable(a)`` or ``semi_stable(a)``) that overrides the measure when the
exponent is evaluated, and an optional ``bernstein`` function.  Unknown keys
are rejected.  Nested measures (``core`` of a tempered tail, ``parts`` of a
composite) use the same layout without ``dim``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from . import bernstein as bn
from . import levy_model as lm
from .errors import InvalidInputError
from .io import sha256_text

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
CLOSED_FORM_RE = re.compile(rf"^(gaussian|stable\(({_NUM})\)|semi_stable\(({_NUM})\))$")

_BERNSTEIN = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind", "alpha"],
         "properties": {"kind": {"const": "power"},
                        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"enum": ["log1p", "ratio"]}}},
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {
             "kind": {"const": "triplet"},
             "a": {"type": "number", "minimum": 0},
             "b": {"type": "number", "minimum": 0},
             "atoms": {"type": "array", "items": {
                 "type": "array", "minItems": 2, "maxItems": 2,
                 "items": {"type": "number", "minimum": 0}}}}},
    ]
}

_POINT = {"oneOf": [{"type": "number"},
                    {"type": "array", "minItems": 1, "items": {"type": "number"}}]}

_COMMON = {"name": {"type": "string"}, "dim": {"type": "integer", "minimum": 1},
           "closed_form_psi": {"type": "string", "pattern": CLOSED_FORM_RE.pattern},
           "bernstein": {"$ref": "#/$defs/bernstein"}}


def _variant(name, required=(), **props):
    return {"type": "object", "additionalProperties": False,
            "required": ["variant", *required],
            "properties": {"variant": {"const": name}, **_COMMON, **props}}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {
        "bernstein": _BERNSTEIN,
        "measure": {"oneOf": [
            _variant("discrete_atoms", ["atoms"],
                     atoms={"type": "array", "minItems": 1, "items": {
                         "type": "object", "additionalProperties": False,
                         "required": ["point", "mass"],
                         "properties": {"point": _POINT,
                                        "mass": {"type": "number", "exclusiveMinimum": 0}}}},
                     symmetrize={"type": "boolean"}),
            _variant("semi_stable", ["alpha"],
                     alpha={"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2}),
            _variant("radial_density", [],
                     radius={"type": "number", "exclusiveMinimum": 0},
                     profile={"type": "object", "additionalProperties": False,
                              "required": ["kind", "exponent"],
                              "properties": {"kind": {"const": "power_law"},
                                             "exponent": {"type": "number"},
                                             "scale": {"type": "number",
                                                       "exclusiveMinimum": 0}}}),
            _variant("tempered_tail", ["beta"],
                     beta={"type": "number", "exclusiveMinimum": 1},
                     core={"$ref": "#/$defs/measure"}),
            _variant("composite", ["parts"],
                     parts={"type": "array", "minItems": 1,
                            "items": {"$ref": "#/$defs/measure"}}),
            _variant("closed_form", []),
        ]},
    },
    "allOf": [{"$ref": "#/$defs/measure"}, {"required": ["dim"]}],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)
_BY_VARIANT = {
    b["properties"]["variant"]["const"]: jsonschema.Draft202012Validator(
        {"$defs": SCHEMA["$defs"], **b})
    for b in SCHEMA["$defs"]["measure"]["oneOf"]
}


@dataclass(frozen=True)
class ModelConfig:
    """Validated config document; ``canonical`` is its normalised JSON text."""

    data: dict

    @property
    def canonical(self) -> str:
        return canonical_json(self.data)

    @property
    def sha256(self) -> str:
        return sha256_text(self.canonical)

    def build(self) -> lm.LevyModel:
        return build_model(self.data)


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _semantic_checks(doc, top=True):
    variant = doc["variant"]
    if variant == "closed_form" and "closed_form_psi" not in doc and "bernstein" not in doc:
        raise InvalidInputError("a closed_form config needs closed_form_psi or bernstein")
    if variant == "radial_density" and ("profile" in doc) == ("bernstein" in doc):
        raise InvalidInputError("radial_density needs exactly one of profile or bernstein")
    if not top and "dim" in doc:
        raise InvalidInputError("nested measures inherit dim from the top-level config")
    for sub in ([doc["core"]] if "core" in doc else []) + doc.get("parts", []):
        _semantic_checks(sub, top=False)


def parse_config(doc) -> ModelConfig:
    """Validate a decoded JSON object (or JSON text) and return a ModelConfig."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config is not valid JSON: {exc}") from exc
    validator = _VALIDATOR
    if isinstance(doc, dict) and doc.get("variant") in _BY_VARIANT:
        validator = _BY_VARIANT[doc["variant"]]
        if "dim" not in doc:
            raise InvalidInputError("config error at <root>: 'dim' is a required property")
    errors = list(validator.iter_errors(doc))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in best.absolute_path) or "<root>"
        raise InvalidInputError(f"config error at {where}: {best.message}")
    _semantic_checks(doc)
    return ModelConfig(json.loads(canonical_json(doc)))


def load_config(path) -> ModelConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def dump_config(cfg: ModelConfig) -> str:
    return json.dumps(cfg.data, sort_keys=True, indent=2) + "\n"


def bernstein_from(doc: dict) -> bn.BernsteinFn:
    kind = doc["kind"]
    if kind == "power":
        return bn.power(doc["alpha"])
    if kind == "log1p":
        return bn.log1p()
    if kind == "ratio":
        return bn.ratio()
    return bn.triplet(a=doc.get("a", 0.0), b=doc.get("b", 0.0),
                      atoms=[tuple(a) for a in doc.get("atoms", [])])


def parse_bernstein_tag(text: str) -> bn.BernsteinFn:
    """``power(0.75)``, ``log1p`` or ``ratio`` as used on the command line."""
    m = re.fullmatch(rf"power\(({_NUM})\)", text.strip())
    if m:
        return bn.power(float(m.group(1)))
    if text.strip() in ("log1p", "ratio"):
        return bernstein_from({"kind": text.strip()})
    raise InvalidInputError(f"unknown Bernstein function {text!r}")


def _closed_form(tag: str, dim: int) -> lm.ClosedFormPsi:
    m = CLOSED_FORM_RE.match(tag)
    if m.group(1) == "gaussian":
        return lm.gaussian_psi(dim)
    if m.group(2) is not None:
        return lm.stable_psi(float(m.group(2)))
    if dim != 1:
        raise InvalidInputError("the semi_stable closed form is one-dimensional")
    ss = lm.SemiStableAtoms(float(m.group(3)))
    return lm.ClosedFormPsi(tag=tag, psi=ss.psi, cumulant=ss.cumulant,
                            grad=ss.cumulant_grad, hess=ss.cumulant_hess,
                            second_moment=ss.second_moment(), has_exp_moments=True)


def _power_law(exponent: float, scale: float):
    def profile(r):
        return scale * r**-exponent
    return profile


def _measure(doc: dict, dim: int):
    variant = doc["variant"]
    name = doc.get("name")
    if variant == "discrete_atoms":
        pts = [a["point"] if isinstance(a["point"], list) else [a["point"]]
               for a in doc["atoms"]]
        if any(len(p) != dim for p in pts):
            raise InvalidInputError(f"atom points must have {dim} coordinates")
        masses = [a["mass"] for a in doc["atoms"]]
        kw = {"name": name} if name else {}
        if doc.get("symmetrize", True):
            return lm.DiscreteAtoms.symmetric(pts, masses, **kw)
        return lm.DiscreteAtoms(pts, masses, **kw)
    if dim != 1 and variant in ("semi_stable", "tempered_tail"):
        raise InvalidInputError(f"{variant} measures are one-dimensional")
    if variant == "semi_stable":
        return lm.SemiStableAtoms(doc["alpha"], name=name)
    if variant == "radial_density":
        if "bernstein" in doc:
            return bn.build_psi1(bernstein_from(doc["bernstein"]), dim).measure
        prof = doc["profile"]
        return lm.RadialDensity(_power_law(prof["exponent"], prof.get("scale", 1.0)),
                                doc.get("radius", 1.0), dim)
    if variant == "tempered_tail":
        core = _measure(doc["core"], dim) if "core" in doc else None
        return lm.TemperedTail(doc["beta"], core, name=name)
    if variant == "composite":
        return lm.Composite([_measure(p, dim) for p in doc["parts"]],
                            **({"name": name} if name else {}))
    return None


def build_model(doc: dict) -> lm.LevyModel:
    dim = doc["dim"]
    measure = _measure(doc, dim)
    f = bernstein_from(doc["bernstein"]) if "bernstein" in doc else None
    closed = None
    if "closed_form_psi" in doc:
        closed = _closed_form(doc["closed_form_psi"], dim)
    elif measure is None:
        closed = lm.subordinate_psi(f)
    name = doc.get("name") or (closed.tag if closed is not None else measure.name)
    return lm.LevyModel(measure=measure, dim=dim, closed_form=closed, name=name,
                        bernstein=f, meta={"variant": doc["variant"]})
