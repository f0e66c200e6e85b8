"""Exact arithmetic in real quadratic fields Q(sqrt(D)).

A :class:`QNum` stores p + q*sqrt(D) with p, q rational and D a square-free
non-negative integer.  Rational numbers are represented with q == 0 (and D
normalized to 0), so values from different fields can be mixed as long as at
most one irrational part is involved.  All comparisons are exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

Rat = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction")


class QNum:
    """p + q*sqrt(D) with exact rational p, q."""

    __slots__ = ("p", "q", "D")

    def __init__(self, p, q=0, D: int = 0):
        p = _frac(p)
        q = _frac(q)
        if q == 0:
            D = 0
        elif D <= 0:
            raise ValueError("irrational part needs D > 0")
        elif isqrt(D) ** 2 == D:
            # perfect square: fold into the rational part
            p += q * isqrt(D)
            q = Fraction(0)
            D = 0
        self.p = p
        self.q = q
        self.D = D

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def of(x, D: int = 0) -> "QNum":
        if isinstance(x, QNum):
            return x
        return QNum(_frac(x), 0, 0)

    def _coerce(self, other) -> "QNum":
        if isinstance(other, QNum):
            if self.D and other.D and self.D != other.D:
                raise ValueError(f"mixing sqrt({self.D}) with sqrt({other.D})")
            return other
        if isinstance(other, (int, Fraction)):
            return QNum(other)
        return NotImplemented  # type: ignore[return-value]

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        D = self.D or o.D
        return QNum(self.p + o.p, self.q + o.q, D)

    __radd__ = __add__

    def __neg__(self):
        return QNum(-self.p, -self.q, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        D = self.D or o.D
        p = self.p * o.p + self.q * o.q * D
        q = self.p * o.q + self.q * o.p
        return QNum(p, q, D)

    __rmul__ = __mul__

    def inverse(self) -> "QNum":
        if self.q == 0:
            if self.p == 0:
                raise ZeroDivisionError("QNum inverse of zero")
            return QNum(1 / self.p)
        norm = self.p * self.p - self.q * self.q * self.D
        if norm == 0:
            raise ZeroDivisionError("QNum inverse of zero")
        return QNum(self.p / norm, -self.q / norm, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- exact order ------------------------------------------------------------

    def sign(self) -> int:
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if p == 0:
            return 1 if q > 0 else -1
        if p > 0 and q > 0:
            return 1
        if p < 0 and q < 0:
            return -1
        # opposite signs: compare p^2 with q^2 * D
        lhs = p * p
        rhs = q * q * self.D
        if lhs == rhs:
            return 0
        bigger_rational = lhs > rhs
        return (1 if bigger_rational else -1) * (1 if p > 0 else -1)

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError("cannot compare")
        return (self - o).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.D))

    def __bool__(self):
        return not (self.p == 0 and self.q == 0)

    # -- misc --------------------------------------------------------------------

    def is_rational(self) -> bool:
        return self.q == 0

    def rational(self) -> Fraction:
        if self.q != 0:
            raise ValueError("not rational")
        return self.p

    def conjugate(self) -> "QNum":
        return QNum(self.p, -self.q, self.D)

    def __float__(self):
        return float(self.p) + float(self.q) * float(self.D) ** 0.5

    def floor(self) -> int:
        """Exact floor."""
        k = int(float(self))
        # correct the float estimate exactly
        while self._cmp(k) < 0:
            k -= 1
        while self._cmp(k + 1) >= 0:
            k += 1
        return k

    def __repr__(self):
        if self.q == 0:
            return f"QNum({self.p})"
        return f"QNum({self.p} + {self.q}*sqrt({self.D}))"


def qsqrt(D: int) -> QNum:
    """sqrt(D) as a QNum (D a positive integer)."""
    return QNum(0, 1, D)


def to_exact(x):
    """Coerce int/str/Fraction/QNum to an exact number (Fraction or QNum)."""
    if isinstance(x, QNum):
        return x
    return _frac(x)
