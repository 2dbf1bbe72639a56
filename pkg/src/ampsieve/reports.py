"""JSON rendering of reports and the schemas the CLI output follows.

Exact rationals are written as ``"num/den"`` strings with a ``<name>_float``
sibling holding the double approximation.
"""

from __future__ import annotations

import dataclasses
import json
import math
from fractions import Fraction

import numpy as np


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _plain(value):
    if isinstance(value, Fraction):
        return frac_str(value)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(value)
    if isinstance(value, dict):
        return to_jsonable(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def to_jsonable(obj) -> dict:
    """Flatten a dataclass or dict; every Fraction gains a ``_float`` sibling."""
    items = obj.items() if isinstance(obj, dict) else ((f.name, getattr(obj, f.name)) for f in dataclasses.fields(obj))
    out = {}
    for key, value in items:
        key = str(key)
        out[key] = _plain(value)
        if isinstance(value, Fraction):
            out[f"{key}_float"] = float(value)
    return out


def dumps(record: dict) -> str:
    """Deterministic serialisation: sorted keys, fixed separators, trailing newline."""
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+/[0-9]+$"}
NUMBER = {"type": "number"}
NULLABLE_RATIONAL = {"anyOf": [RATIONAL, {"type": "null"}]}
NULLABLE_NUMBER = {"anyOf": [NUMBER, {"type": "null"}]}


def _envelope(command: str, result_schema: dict) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"ampsieve {command} report",
        "type": "object",
        "required": ["command", "params", "result", "passed"],
        "properties": {
            "command": {"const": command},
            "params": {"type": "object"},
            "result": result_schema,
            "passed": {"type": "boolean"},
        },
    }


_SIEVE_REPORT = {
    "type": "object",
    "required": ["N", "Q", "Delta", "H", "K", "A", "B", "bound_als", "bound_rls", "bound_weaker", "sifted_count"],
    "properties": {
        "N": {"type": "integer"},
        "Q": {"type": "integer"},
        "Delta": RATIONAL,
        "H": RATIONAL,
        "K": RATIONAL,
        "A": RATIONAL,
        "B": RATIONAL,
        "bound_als": RATIONAL,
        "bound_rls": NULLABLE_RATIONAL,
        "bound_weaker": RATIONAL,
        "sifted_count": {"type": ["integer", "null"]},
    },
}

_EXPERIMENT_REPORT = {
    "type": "object",
    "required": [
        "probability", "probability_normalized", "total_mass", "H", "H_squarefree", "bound",
        "bound_squarefree", "ratio", "A1", "B1", "amplified_moment", "measured_const", "chain_holds", "metadata",
    ],
    "properties": {
        "probability": NUMBER,
        "probability_normalized": NUMBER,
        "total_mass": NUMBER,
        "H": RATIONAL,
        "H_squarefree": RATIONAL,
        "bound": NUMBER,
        "bound_squarefree": NUMBER,
        "ratio": NUMBER,
        "A1": RATIONAL,
        "B1": RATIONAL,
        "amplified_moment": NUMBER,
        "measured_const": NUMBER,
        "chain_holds": {"type": "boolean"},
        "metadata": {"type": "object"},
    },
}

SCHEMAS: dict[str, dict] = {
    "classical-bound": _envelope("classical-bound", {
        "type": "object",
        "required": ["report", "count", "als_ok", "weaker_ok", "rls_ok"],
        "properties": {
            "report": _SIEVE_REPORT,
            "count": {"type": "integer"},
            "als_ok": {"type": "boolean"},
            "weaker_ok": {"type": "boolean"},
            "rls_ok": {"type": ["boolean", "null"]},
        },
    }),
    "sift": _envelope("sift", {
        "type": "object",
        "required": ["count", "members"],
        "properties": {"count": {"type": "integer"}, "members": {"type": "array", "items": {"type": "integer"}}},
    }),
    "dual-check": _envelope("dual-check", {
        "type": "object",
        "required": ["rows"],
        "properties": {"rows": {"type": "array", "items": {
            "type": "object",
            "required": ["N", "Q", "delta", "gram_extreme", "max_hls_ratio", "max_dls_ratio", "passed"],
            "properties": {
                "N": {"type": "integer"}, "Q": {"type": "integer"}, "delta": {"type": "integer"},
                "gram_extreme": NUMBER, "max_hls_ratio": NUMBER, "max_dls_ratio": NUMBER,
                "passed": {"type": "boolean"},
            },
        }}},
    }),
    "squares-demo": _envelope("squares-demo", {
        "type": "object",
        "required": ["rows", "fitted_constant"],
        "properties": {
            "fitted_constant": NUMBER,
            "rows": {"type": "array", "items": {
                "type": "object",
                "required": ["N", "Q", "count", "bound_als", "bound_weaker", "weaker_over_als", "log_quarter"],
                "properties": {
                    "N": {"type": "integer"}, "Q": {"type": "integer"}, "count": {"type": "integer"},
                    "bound_als": RATIONAL, "bound_weaker": RATIONAL,
                    "weaker_over_als": NUMBER, "log_quarter": NUMBER,
                },
            }},
        },
    }),
    "modform-cor1": _envelope("modform-cor1", {
        "type": "object",
        "required": ["lhs", "lhs_stderr", "sum_sigma2", "normalizer", "ratio", "s", "N", "primes", "total_mass"],
        "properties": {
            "lhs": NUMBER, "lhs_stderr": NUMBER, "sum_sigma2": RATIONAL, "normalizer": NUMBER,
            "ratio": NULLABLE_NUMBER, "s": {"type": "integer"}, "N": {"type": "integer"},
            "primes": {"type": "array", "items": {"type": "integer"}}, "total_mass": NUMBER,
        },
    }),
    "modform-cor2": _envelope("modform-cor2", _EXPERIMENT_REPORT),
    "sign-change": _envelope("sign-change", {
        "type": "object",
        "required": ["level_q", "A", "Q", "N", "s", "sieved", "set_probability", "members", "sieve",
                     "psi_gamma_sum", "lower_bound_target", "h_meets_lower_bound"],
        "properties": {
            "level_q": {"type": "integer"}, "Q": {"type": "integer"}, "N": {"type": "integer"},
            "sieved": {"type": "boolean"}, "set_probability": NUMBER, "members": {"type": "integer"},
            "sieve": {"anyOf": [_EXPERIMENT_REPORT, {"type": "null"}]},
            "psi_gamma_sum": NULLABLE_RATIONAL, "lower_bound_target": NULLABLE_NUMBER,
            "h_meets_lower_bound": {"type": ["boolean", "null"]},
        },
    }),
    "verify-minorant": _envelope("verify-minorant", {
        "type": "object",
        "required": ["poly", "minorizes", "exact_check", "beta0", "beta0_quadrature", "delta", "sigma2", "gamma"],
        "properties": {
            "poly": {"type": "object", "required": ["beta", "delta"]},
            "minorizes": {"type": "boolean"},
            "exact_check": {"type": ["boolean", "null"]},
            "beta0": RATIONAL, "beta0_quadrature": NUMBER, "delta": RATIONAL, "sigma2": RATIONAL,
            "gamma": NULLABLE_RATIONAL,
        },
    }),
}
