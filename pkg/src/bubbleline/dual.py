"""Forward-mode dual numbers for exact first derivatives.

A Dual carries a value and the derivative of that value with respect to
the single free variable.  Arithmetic works for float scalars and for
mpmath.mpf scalars alike; the math-function helpers dispatch on the value
type so high-precision evaluation reuses the same code path.
"""

from __future__ import annotations

import math
from typing import Union

import mpmath

Scalar = Union[int, float, mpmath.mpf]


def _lib(value: Scalar):
    # Constraint: mpf inputs must stay mpf so precision survives the walk.
    return mpmath if isinstance(value, mpmath.mpf) else math


class Dual:
    __slots__ = ("value", "slope")

    def __init__(self, value: Scalar, slope: Scalar) -> None:
        self.value = value
        self.slope = slope

    @classmethod
    def variable(cls, value: Scalar) -> "Dual":
        one = mpmath.mpf(1) if isinstance(value, mpmath.mpf) else 1.0
        return cls(value, one)

    @classmethod
    def constant(cls, value: Scalar) -> "Dual":
        return cls(value, 0.0)

    def _coerce(self, other: Union["Dual", Scalar]) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(other, 0.0)

    def __add__(self, other: Union["Dual", Scalar]) -> "Dual":
        o = self._coerce(other)
        return Dual(self.value + o.value, self.slope + o.slope)

    __radd__ = __add__

    def __sub__(self, other: Union["Dual", Scalar]) -> "Dual":
        o = self._coerce(other)
        return Dual(self.value - o.value, self.slope - o.slope)

    def __rsub__(self, other: Scalar) -> "Dual":
        o = self._coerce(other)
        return Dual(o.value - self.value, o.slope - self.slope)

    def __mul__(self, other: Union["Dual", Scalar]) -> "Dual":
        o = self._coerce(other)
        return Dual(
            self.value * o.value,
            self.slope * o.value + self.value * o.slope,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Dual", Scalar]) -> "Dual":
        o = self._coerce(other)
        return Dual(
            self.value / o.value,
            (self.slope * o.value - self.value * o.slope) / (o.value * o.value),
        )

    def __rtruediv__(self, other: Scalar) -> "Dual":
        return self._coerce(other).__truediv__(self)

    def __neg__(self) -> "Dual":
        return Dual(-self.value, -self.slope)

    def __repr__(self) -> str:
        return f"Dual({self.value!r}, {self.slope!r})"


def exp(d: Dual) -> Dual:
    e = _lib(d.value).exp(d.value)
    return Dual(e, e * d.slope)


def log(d: Dual) -> Dual:
    return Dual(_lib(d.value).log(d.value), d.slope / d.value)


def sqrt(d: Dual) -> Dual:
    r = _lib(d.value).sqrt(d.value)
    return Dual(r, d.slope / (2 * r))


def atan(d: Dual) -> Dual:
    return Dual(_lib(d.value).atan(d.value), d.slope / (1 + d.value * d.value))
