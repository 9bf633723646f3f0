"""Unit-suffixed quantity parsing.

Configuration values are strings such as ``"0.611 m/ms"`` or ``"88 kN"``.
Everything is converted to strict SI at parse time; nothing downstream
ever sees a non-SI number.
"""

from __future__ import annotations

import re

# suffix -> (factor to SI, dimension tag)
UNITS: dict[str, tuple[float, str]] = {
    "Pa": (1.0, "pressure"),
    "MPa": (1.0e6, "pressure"),
    "GPa": (1.0e9, "pressure"),
    "N": (1.0, "force"),
    "kN": (1.0e3, "force"),
    "m": (1.0, "length"),
    "mm": (1.0e-3, "length"),
    "s": (1.0, "time"),
    "ms": (1.0e-3, "time"),
    "m/s": (1.0, "velocity"),
    "m/ms": (1.0e3, "velocity"),
    "kg/m3": (1.0, "density"),
}

_QUANTITY = re.compile(
    r"^\s*(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(?P<unit>[A-Za-z/0-9]+)\s*$"
)


class UnitError(ValueError):
    """A quantity string could not be parsed or has the wrong dimension."""


def parse_quantity(text: str, dimension: str | None = None) -> float:
    """Parse ``"<number> <unit>"`` into an SI float.

    If ``dimension`` is given, the unit must belong to it (``"88 kN"`` is
    rejected where a pressure is expected).
    """
    if not isinstance(text, str):
        raise UnitError(f"expected a unit-suffixed string, got {text!r}")
    m = _QUANTITY.match(text)
    if m is None:
        raise UnitError(f"cannot parse quantity {text!r}")
    unit = m.group("unit")
    if unit not in UNITS:
        raise UnitError(f"unknown unit {unit!r} in {text!r}")
    factor, dim = UNITS[unit]
    if dimension is not None and dim != dimension:
        raise UnitError(f"{text!r} is a {dim}, expected a {dimension}")
    return float(m.group("num")) * factor


def format_quantity(value: float, unit: str) -> str:
    factor, _ = UNITS[unit]
    return f"{value / factor!r} {unit}"
