"""Extended real numbers: floats plus the two signed infinities.

Arithmetic follows the usual conventions and raises IndeterminateFormError
for inf - inf, 0 * inf, and inf / inf rather than producing NaN.  NaN is
rejected at construction, so a NaN can never circulate as a value.
"""

from __future__ import annotations

import math
from typing import Union

from .errors import IndeterminateFormError

Real = Union[int, float, "ExtendedReal"]


class ExtendedReal:
    __slots__ = ("_v",)

    def __init__(self, value: float) -> None:
        value = float(value)
        if math.isnan(value):
            raise IndeterminateFormError("NaN is not an extended real")
        object.__setattr__(self, "_v", value)

    @classmethod
    def parse(cls, text: str) -> "ExtendedReal":
        word = text.strip().lower()
        if word in ("inf", "+inf", "infinity"):
            return POS_INF
        if word in ("-inf", "-infinity"):
            return NEG_INF
        return cls(float(text))

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self._v)

    @property
    def is_pos_inf(self) -> bool:
        return self._v == math.inf

    @property
    def is_neg_inf(self) -> bool:
        return self._v == -math.inf

    def __float__(self) -> float:
        return self._v

    def finite_value(self) -> float:
        if not math.isfinite(self._v):
            raise IndeterminateFormError(f"{self} is not finite")
        return self._v

    @staticmethod
    def _coerce(other: Real) -> float:
        if isinstance(other, ExtendedReal):
            return other._v
        if isinstance(other, (int, float)):
            value = float(other)
            if math.isnan(value):
                raise IndeterminateFormError("NaN is not an extended real")
            return value
        return NotImplemented  # type: ignore[return-value]

    def _wrap(self, value: float, what: str) -> "ExtendedReal":
        if math.isnan(value):
            raise IndeterminateFormError(f"indeterminate form in {what}")
        return ExtendedReal(value)

    def __add__(self, other: Real) -> "ExtendedReal":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self._wrap(self._v + rhs, f"{self} + {rhs}")

    __radd__ = __add__

    def __neg__(self) -> "ExtendedReal":
        return ExtendedReal(-self._v)

    def __sub__(self, other: Real) -> "ExtendedReal":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self._wrap(self._v - rhs, f"{self} - {rhs}")

    def __rsub__(self, other: Real) -> "ExtendedReal":
        lhs = self._coerce(other)
        if lhs is NotImplemented:
            return NotImplemented
        return self._wrap(lhs - self._v, f"{lhs} - {self}")

    def __mul__(self, other: Real) -> "ExtendedReal":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self._wrap(self._v * rhs, f"{self} * {rhs}")

    __rmul__ = __mul__

    def __truediv__(self, other: Real) -> "ExtendedReal":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        if rhs == 0.0:
            raise IndeterminateFormError(f"division by zero: {self} / 0")
        return self._wrap(self._v / rhs, f"{self} / {rhs}")

    def _cmp_value(self, other: Real) -> float:
        value = self._coerce(other)
        if value is NotImplemented:
            raise TypeError(f"cannot compare ExtendedReal with {type(other)!r}")
        return value

    def __eq__(self, other: object) -> bool:
        try:
            return self._v == self._cmp_value(other)  # type: ignore[arg-type]
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self._v)

    def __lt__(self, other: Real) -> bool:
        return self._v < self._cmp_value(other)

    def __le__(self, other: Real) -> bool:
        return self._v <= self._cmp_value(other)

    def __gt__(self, other: Real) -> bool:
        return self._v > self._cmp_value(other)

    def __ge__(self, other: Real) -> bool:
        return self._v >= self._cmp_value(other)

    def to_json(self) -> object:
        """JSON-friendly form: plain float, or the strings 'inf' / '-inf'."""
        if self._v == math.inf:
            return "inf"
        if self._v == -math.inf:
            return "-inf"
        return self._v

    def __repr__(self) -> str:
        return f"ExtendedReal({self._v!r})"

    def __str__(self) -> str:
        if self._v == math.inf:
            return "inf"
        if self._v == -math.inf:
            return "-inf"
        return repr(self._v)


POS_INF = ExtendedReal(math.inf)
NEG_INF = ExtendedReal(-math.inf)
