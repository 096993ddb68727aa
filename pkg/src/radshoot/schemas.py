"""JSON Schemas for the machine-readable files written by the command line.

The schemas are plain dictionaries (draft 2020-12) so that any validator can
consume them; the package itself never imports one.
"""

from __future__ import annotations

DRAFT = "https://json-schema.org/draft/2020-12/schema"

_number_or_null = {"type": ["number", "null"]}
_verdict = {"enum": ["pass", "fail", "inconclusive"]}
_tag = {"enum": ["N", "P", "Undetermined"]}

_bracket = {
    "type": "object",
    "required": ["alpha_lo", "alpha_hi", "alpha", "width", "tag_lo", "tag_hi"],
    "properties": {
        "alpha_lo": {"type": "number"},
        "alpha_hi": {"type": "number"},
        "alpha": {"type": "number"},
        "width": {"type": "number", "minimum": 0},
        "tag_lo": _tag,
        "tag_hi": _tag,
        "R_lo": _number_or_null,
        "R_hi": _number_or_null,
    },
}

VERIFY = {
    "$schema": DRAFT,
    "title": "hypothesis report",
    "type": "object",
    "required": ["verdict", "b", "beta", "hypotheses"],
    "properties": {
        "verdict": _verdict,
        "b": {"type": "number"},
        "beta": {"type": "number"},
        "hypotheses": {
            "type": "object",
            "patternProperties": {
                "^H[1-6]$": {
                    "type": "object",
                    "required": ["verdict", "witness", "detail"],
                    "properties": {
                        "verdict": _verdict,
                        "margin": {"type": ["number", "string", "null"]},
                        "witness": {"type": "object"},
                        "detail": {"type": "string"},
                    },
                },
            },
            "additionalProperties": False,
        },
        "grid": {"type": "object"},
    },
}

GROUND_STATES = {
    "$schema": DRAFT,
    "title": "ground-state scan summary",
    "type": "object",
    "required": ["alpha_star", "alpha_max", "n_samples", "n_brackets", "brackets"],
    "properties": {
        "config": {"type": "string"},
        "alpha_star": {"type": "number"},
        "alpha_max": {"type": "number"},
        "n_samples": {"type": "integer", "minimum": 0},
        "n_brackets": {"type": "integer", "minimum": 0},
        "brackets": {"type": "array", "items": _bracket},
        "alphas": {"type": "object", "additionalProperties": _number_or_null},
    },
}

UNDETERMINED = {
    "$schema": DRAFT,
    "title": "undetermined shots",
    "type": "array",
    "items": {
        "type": "object",
        "required": ["alpha", "reason"],
        "properties": {"alpha": {"type": "number"}, "reason": {"type": "string"}},
    },
}

_block = {
    "type": "object",
    "required": ["i", "alpha", "eps", "start", "amplitude_sq", "tag"],
    "properties": {
        "i": {"type": "integer", "minimum": 2},
        "alpha": {"type": "number"},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "start": {"type": "number"},
        "amplitude_sq": {"type": "number", "exclusiveMinimum": 0},
        "tag": _tag,
        "diagnostics": {"type": "object"},
    },
}

TUNING = {
    "$schema": DRAFT,
    "title": "chain tuning",
    "type": "object",
    "required": ["k", "base", "kinds", "alpha_star", "alpha0", "eps0", "blocks"],
    "properties": {
        "k": {"type": "integer", "minimum": 2},
        "base": {"type": "object", "required": ["p", "N"]},
        "kinds": {"type": "array", "items": {"type": "object", "required": ["kind"]}},
        "alpha_star": {"type": "number"},
        "alpha_star_bracket": {"type": "array", "items": {"type": "number"},
                               "minItems": 2, "maxItems": 2},
        "alpha0": {"type": ["number", "null"]},
        "eps0": {"type": "number"},
        "blocks": {"type": "array", "items": _block},
        "escape": {"type": ["object", "null"]},
        "brackets": {"type": "array", "items": _bracket},
        "claim_violations": {"type": "array", "items": {"type": "string"}},
    },
}

REPRODUCE = {
    "$schema": DRAFT,
    "title": "reproduction report",
    "type": "object",
    "required": ["example", "passed", "checks"],
    "properties": {
        "example": {"enum": [2, 3, 4]},
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "expected", "observed", "passed"],
                "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"}},
            },
        },
        "summary": {"type": "object"},
    },
}

CLASSIFY = {
    "$schema": DRAFT,
    "title": "single shot",
    "type": "object",
    "required": ["alpha", "tag", "R", "reason"],
    "properties": {
        "alpha": {"type": "number"},
        "tag": _tag,
        "R": _number_or_null,
        "reason": {"type": "string"},
        "r_final": {"type": "number"},
        "u_final": {"type": "number"},
        "v_final": {"type": "number"},
    },
}

SCHEMAS = {
    "verify": VERIFY,
    "ground-states": GROUND_STATES,
    "undetermined": UNDETERMINED,
    "tune": TUNING,
    "reproduce": REPRODUCE,
    "classify": CLASSIFY,
}
