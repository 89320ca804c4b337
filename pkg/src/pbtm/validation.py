"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .exceptions import InputError


def as_fraction(value, name: str = "value") -> Fraction:
    """Exact rational from int, Fraction, decimal string or float.

    Floats go through ``repr`` so ``0.1`` becomes ``1/10`` rather than its
    binary approximation.
    """
    if isinstance(value, bool):
        raise InputError(f"{name} must be numeric, got {value!r}")
    if isinstance(value, (Rational, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{name} must be a rational number, got {value!r}") from None


def check_fraction(value, name: str, lo=0, hi=1) -> Fraction:
    q = as_fraction(value, name)
    if not lo <= q <= hi:
        raise InputError(f"{name}={value} outside [{lo}, {hi}]")
    return q


def check_optional_fraction(value, name: str, lo=0, hi=1) -> Fraction | None:
    return None if value is None else check_fraction(value, name, lo, hi)


def check_positive_int(value, name: str, allow_none: bool = False) -> int | None:
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InputError(f"{name} must be a positive integer, got {value!r}")
    return value
