"""Exact arithmetic over Z[1/2]: numbers of the form mantissa * 2**exp2.

Every scheme coefficient in the catalog lives in this ring, so validation
and reference products can be carried out with no rounding at all.  The
mantissa is an arbitrary-precision Python integer; the exponent is bounded
by a machine-word-sized limit (exceeding it is a hard error, it never
happens for catalog data whose exponents lie in [-3, 1]).
"""

from __future__ import annotations

import math
import numbers
import sys

__all__ = ["Dyadic", "ZERO", "ONE", "parse_dyadic"]

_EXP_LIMIT = 1 << 30

_HASH_MODULUS = sys.hash_info.modulus
_HASH_INF = sys.hash_info.inf


class Dyadic:
    """An exact dyadic rational mantissa * 2**exp2 in canonical form.

    Canonical form: the mantissa is odd, or the value is zero with
    exp2 == 0.  Instances are immutable; all operations return new values.
    """

    __slots__ = ("m", "e")

    def __init__(self, mantissa=0, exp2=0):
        if isinstance(mantissa, Dyadic):
            exp2 = exp2 + mantissa.e
            mantissa = mantissa.m
        elif not isinstance(mantissa, numbers.Integral):
            raise TypeError(
                f"mantissa must be an integer, not {type(mantissa).__name__};"
                " use Dyadic.from_float for exact float conversion"
            )
        m = int(mantissa)
        e = int(exp2)
        if m == 0:
            e = 0
        else:
            shift = (m & -m).bit_length() - 1
            if shift:
                m >>= shift
                e += shift
            if not -_EXP_LIMIT < e < _EXP_LIMIT:
                raise OverflowError(f"dyadic exponent {e} out of range")
        self.m = m
        self.e = e

    @classmethod
    def _raw(cls, m, e):
        # Trusted constructor: (m, e) must already be canonical.
        obj = object.__new__(cls)
        obj.m = m
        obj.e = e
        return obj

    # -- accessors ---------------------------------------------------------

    @property
    def mantissa(self):
        return self.m

    @property
    def exp2(self):
        return self.e

    def is_zero(self):
        return self.m == 0

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, n):
        return cls(int(n))

    @classmethod
    def from_float(cls, x):
        """Exact conversion; every finite float is a dyadic rational."""
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        if x == 0.0:
            return ZERO
        frac, exp = math.frexp(x)
        return cls(int(frac * 9007199254740992.0), exp - 53)  # frac * 2**53

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        d = self.e - other.e
        if d == 0:
            return Dyadic(self.m + other.m, self.e)
        if d > 0:
            return Dyadic._raw((self.m << d) + other.m, other.e)
        return Dyadic._raw(self.m + (other.m << -d), self.e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic._raw(-self.m, self.e)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.__add__(Dyadic._raw(-other.m, other.e))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__add__(Dyadic._raw(-self.m, self.e))

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.m == 0 or other.m == 0:
            return ZERO
        e = self.e + other.e
        if not -_EXP_LIMIT < e < _EXP_LIMIT:
            raise OverflowError(f"dyadic exponent {e} out of range")
        return Dyadic._raw(self.m * other.m, e)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by 2**k (k may be negative); exact."""
        if self.m == 0:
            return self
        e = self.e + int(k)
        if not -_EXP_LIMIT < e < _EXP_LIMIT:
            raise OverflowError(f"dyadic exponent {e} out of range")
        return Dyadic._raw(self.m, e)

    def __abs__(self):
        return Dyadic._raw(abs(self.m), self.e) if self.m < 0 else self

    def __bool__(self):
        return self.m != 0

    # -- comparisons -------------------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.m == other.m and self.e == other.e

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).m < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).m <= 0

    def __gt__(self, other):
        return _coerce(other).__lt__(self)

    def __ge__(self, other):
        return _coerce(other).__le__(self)

    def __hash__(self):
        # Match the numeric-hash contract so Dyadic(3) hashes like 3.
        if self.e >= 0:
            return hash(self.m << self.e)
        dinv = pow(1 << -self.e, -1, _HASH_MODULUS)
        h = hash(abs(self.m) * dinv)
        result = h if self.m >= 0 else -h
        return -2 if result == -1 else result

    # -- conversions -------------------------------------------------------

    def to_float(self, strict=False):
        """Round to the nearest 64-bit float (ties to even).

        With strict=True, raise ValueError if the conversion is not exact,
        i.e. the mantissa needs more than 53 bits or the exponent falls
        outside the representable range.
        """
        if self.m == 0:
            return 0.0
        try:
            if self.e >= 0:
                result = float(self.m << self.e)
            else:
                result = self.m / (1 << -self.e)  # correctly rounded
        except OverflowError:
            if strict:
                raise ValueError(f"{self} not exactly representable as float")
            return math.inf if self.m > 0 else -math.inf
        if strict and Dyadic.from_float(result) != self:
            raise ValueError(f"{self} not exactly representable as float")
        return result

    def __float__(self):
        return self.to_float()

    def to_fraction(self):
        from fractions import Fraction

        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    # -- text --------------------------------------------------------------

    def __str__(self):
        if self.e >= 0:
            return str(self.m << self.e)
        return f"{self.m}/{1 << -self.e}"

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"


def _coerce(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, numbers.Integral):
        return Dyadic(int(value))
    if isinstance(value, float):
        return Dyadic.from_float(value)
    return NotImplemented


def parse_dyadic(token):
    """Parse an integer or "p/q" token with q a positive power of two."""
    text = token.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            p = int(num)
            q = int(den)
        except ValueError:
            raise ValueError(f"malformed dyadic token {token!r}") from None
        if q <= 0 or q & (q - 1):
            raise ValueError(f"denominator of {token!r} is not a power of two")
        return Dyadic(p, -(q.bit_length() - 1))
    try:
        return Dyadic(int(text))
    except ValueError:
        raise ValueError(f"malformed dyadic token {token!r}") from None


ZERO = Dyadic(0)
ONE = Dyadic(1)
