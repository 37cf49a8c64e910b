"""Parsing and formatting of exact rationals for the JSON file formats.

Rationals travel as JSON integers or as strings ``"p/q"`` with ``q > 0``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Any

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class SchemaError(ValueError):
    """Input document does not follow the expected schema.

    ``key`` names the offending key (dotted path) so that command-line
    front ends can report it.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_rational(value: Any, key: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise SchemaError(key, f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if m is None:
            raise SchemaError(key, f"malformed rational {value!r}")
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise SchemaError(key, f"zero denominator in {value!r}")
        return Fraction(int(m.group(1)), den)
    # floats are rejected on purpose: they are not exact
    raise SchemaError(key, f"expected an integer or a 'p/q' string, got {value!r}")


def format_rational(q: Fraction | int) -> int | str:
    q = Fraction(q)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


def rational_str(q: Fraction | int) -> str:
    return str(format_rational(q))
