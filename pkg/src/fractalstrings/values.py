"""Exact numeric literals for ratio and gap inputs.

Ratios may be written as decimal literals (``"0.25"``), fractions
(``"1/3"``) or power literals (``"2^-2.414213562373095"``).  The literal is
kept in exact rational form (a power literal as an exact base/exponent
pair) so logarithmic weights can be recomputed at extended precision when
the root finder needs guard digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp


def _parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    return Fraction(text)


@dataclass(frozen=True)
class ExactReal:
    """A positive real given exactly as ``mantissa * base**exponent``.

    Plain rationals use ``base == 1`` (exponent ignored).  ``literal`` is
    the source text when the value was parsed, reused on serialization so
    spec files round-trip byte-identically.
    """

    mantissa: Fraction
    base: Fraction = Fraction(1)
    exponent: Fraction = Fraction(0)
    literal: str | None = None

    @staticmethod
    def from_any(value) -> "ExactReal":
        if isinstance(value, ExactReal):
            return value
        if isinstance(value, str):
            return ExactReal.parse(value)
        if isinstance(value, (int, Fraction)):
            return ExactReal(Fraction(value))
        if isinstance(value, float):
            return ExactReal(Fraction(value))  # exact binary expansion
        raise TypeError(f"cannot interpret {value!r} as an exact real")

    @staticmethod
    def parse(text: str) -> "ExactReal":
        raw = text.strip()
        if "^" in raw:
            base_s, exp_s = raw.split("^", 1)
            return ExactReal(
                Fraction(1),
                base=_parse_rational(base_s),
                exponent=_parse_rational(exp_s),
                literal=raw,
            )
        return ExactReal(_parse_rational(raw), literal=raw)

    @staticmethod
    def power(base, exponent) -> "ExactReal":
        return ExactReal(Fraction(1), base=Fraction(base), exponent=Fraction(exponent))

    @property
    def is_power(self) -> bool:
        return self.base != 1

    def to_float(self) -> float:
        if not self.is_power:
            return float(self.mantissa)
        return float(self.mantissa) * float(self.base) ** float(self.exponent)

    def to_mp(self) -> mp.mpf:
        if not self.is_power:
            return mp.mpf(self.mantissa.numerator) / self.mantissa.denominator
        b = mp.mpf(self.base.numerator) / self.base.denominator
        e = mp.mpf(self.exponent.numerator) / self.exponent.denominator
        m = mp.mpf(self.mantissa.numerator) / self.mantissa.denominator
        return m * mp.power(b, e)

    def neg_log(self) -> float:
        """log(1/value) in double precision."""
        if not self.is_power:
            return -math.log(self.mantissa.numerator / self.mantissa.denominator)
        return -(
            math.log(float(self.mantissa))
            + float(self.exponent) * math.log(float(self.base))
        )

    def neg_log_mp(self) -> mp.mpf:
        if not self.is_power:
            return -(
                mp.log(self.mantissa.numerator) - mp.log(self.mantissa.denominator)
            )
        e = mp.mpf(self.exponent.numerator) / self.exponent.denominator
        return -(mp.log(self.mantissa.numerator) - mp.log(self.mantissa.denominator)
                 + e * mp.log(self.base.numerator / mp.mpf(self.base.denominator)))

    def serialize(self):
        """JSON-friendly form: original literal, fraction text, or float."""
        if self.literal is not None:
            return self.literal
        if self.is_power:
            base = self._frac_text(self.base)
            exp = self._frac_text(self.exponent)
            text = f"{base}^{exp}"
            if self.mantissa != 1:
                raise ValueError("power literal with mantissa cannot serialize")
            return text
        if self.mantissa.denominator == 1:
            return int(self.mantissa)
        return self._frac_text(self.mantissa)

    @staticmethod
    def _frac_text(q: Fraction) -> str:
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q.numerator}/{q.denominator}"

    def __float__(self) -> float:
        return self.to_float()
