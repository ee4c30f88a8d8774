"""Exact set sizes: a non-negative integer of arbitrary precision, or infinite.

Reidemeister numbers are cardinalities of class sets, so every quantity the
engines return is one of these.  Finite values compare and multiply exactly;
the infinite value absorbs multiplication by anything nonzero.  Multiplying
infinite by zero yields zero (a product over an empty factor is empty).
"""

from __future__ import annotations


class Cardinal:
    __slots__ = ("_value",)

    def __init__(self, value: int | None = None):
        if value is not None:
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"finite cardinal needs an int, got {value!r}")
            if value < 0:
                raise ValueError(f"cardinal cannot be negative: {value}")
        self._value = value

    @classmethod
    def finite(cls, value: int) -> Cardinal:
        return cls(value)

    @property
    def is_finite(self) -> bool:
        return self._value is not None

    @property
    def value(self) -> int:
        """The integer behind a finite cardinal.  Raises on the infinite one."""
        if self._value is None:
            raise ValueError("infinite cardinal has no integer value")
        return self._value

    def __mul__(self, other: Cardinal) -> Cardinal:
        if not isinstance(other, Cardinal):
            return NotImplemented
        # A zero factor empties the product even against an infinite factor.
        if self._value == 0 or other._value == 0:
            return Cardinal(0)
        if self._value is None or other._value is None:
            return INFINITE
        return Cardinal(self._value * other._value)

    def divide_exact(self, other: Cardinal) -> Cardinal:
        """Quotient of two finite cardinals, required to divide evenly."""
        if not (self.is_finite and other.is_finite):
            raise ValueError("exact division is defined for finite cardinals only")
        if other._value == 0:
            raise ZeroDivisionError("division of cardinals by zero")
        q, r = divmod(self._value, other._value)
        if r:
            raise ValueError(f"{self._value} is not divisible by {other._value}")
        return Cardinal(q)

    def divides(self, other: Cardinal) -> bool:
        """True when self divides other; everything divides the infinite one."""
        if not self.is_finite:
            return not other.is_finite
        if not other.is_finite:
            return True
        if self._value == 0:
            return other._value == 0
        return other._value % self._value == 0

    def _key(self):
        # Infinite sorts above every finite value.
        return (1, 0) if self._value is None else (0, self._value)

    def __eq__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self._value == other._value

    def __lt__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self._key() < other._key()

    def __le__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self._key() <= other._key()

    def __gt__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self._key() > other._key()

    def __ge__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self._key() >= other._key()

    def __hash__(self):
        return hash(("Cardinal", self._value))

    def __bool__(self):
        return self._value != 0

    def __repr__(self):
        if self._value is None:
            return "INFINITE"
        return f"Cardinal.finite({self._value})"

    def __str__(self):
        return "infinite" if self._value is None else str(self._value)

    def to_json(self):
        """JSON-native form: an int, or the string token "infinite"."""
        return "infinite" if self._value is None else self._value

    @classmethod
    def from_json(cls, obj) -> Cardinal:
        if obj == "infinite":
            return INFINITE
        if isinstance(obj, int) and not isinstance(obj, bool):
            return cls(obj)
        raise ValueError(f"not a cardinal encoding: {obj!r}")


INFINITE = Cardinal(None)


def cardinal_product(items) -> Cardinal:
    out = Cardinal(1)
    for item in items:
        out = out * item
    return out
