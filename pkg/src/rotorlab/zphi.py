"""Exact arithmetic in Z[phi], where phi^2 = phi + 1.

Elements are a + b*phi with integer a, b.  Both roots of the defining
quadratic, phi_plus = (1+sqrt5)/2 and phi_minus = (1-sqrt5)/2, evaluate the
same symbolic element; all invariant checks stay in integers and only
reports drop to floating point.  Includes the doubly-infinite Fibonacci
sequence and the goldbug site labels built on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PHI_PLUS = (1.0 + math.sqrt(5.0)) / 2.0
PHI_MINUS = (1.0 - math.sqrt(5.0)) / 2.0

PHI_POW_RANGE = 90  # |i| above this overflows 64-bit Fibonacci growth

_fib_cache: dict[int, int] = {0: 0, 1: 1}


def fib(i: int) -> int:
    """Doubly-infinite Fibonacci number: F(0)=0, F(1)=1, F(-n)=(-1)^(n+1)F(n)."""
    v = _fib_cache.get(i)
    if v is not None:
        return v
    if i >= 0:
        a, b = 0, 1
        for _ in range(i - 1):
            a, b = b, a + b
        v = b if i >= 1 else 0
    else:
        n = -i
        v = fib(n) if n % 2 == 1 else -fib(n)
    _fib_cache[i] = v
    return v


def fib_label(i: int) -> int:
    """Goldbug site label L(i): L(-1)=0, L(0)=L(1)=1, L(2)=2, L(9)=55."""
    return fib(i + 1)


@dataclass(frozen=True)
class ZPhi:
    a: int
    b: int

    def __add__(self, other: "ZPhi") -> "ZPhi":
        return ZPhi(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "ZPhi") -> "ZPhi":
        return ZPhi(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "ZPhi":
        return ZPhi(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, int):
            return ZPhi(self.a * other, self.b * other)
        # (a1 + b1 phi)(a2 + b2 phi), reduced with phi^2 = phi + 1
        return ZPhi(self.a * other.a + self.b * other.b,
                    self.a * other.b + self.b * other.a + self.b * other.b)

    __rmul__ = __mul__

    def evaluate(self, root: float) -> float:
        return float(self.a) + float(self.b) * root


ZPHI_ZERO = ZPhi(0, 0)
ZPHI_ONE = ZPhi(1, 0)
ZPHI_PHI = ZPhi(0, 1)


def phi_pow(i: int) -> ZPhi:
    """phi^i as an exact element: phi^i = F(i-1) + F(i)*phi."""
    if abs(i) > PHI_POW_RANGE:
        raise OverflowError(f"phi_pow supports |i| <= {PHI_POW_RANGE}")
    return ZPhi(fib(i - 1), fib(i))


def numeric_value(z: ZPhi, root: str = "plus") -> float:
    """a + b*root in double precision; root is "plus" or "minus"."""
    if root == "plus":
        return z.evaluate(PHI_PLUS)
    if root == "minus":
        return z.evaluate(PHI_MINUS)
    raise ValueError("root must be 'plus' or 'minus'")


def sign_with_sqrt5(p: int, q: int) -> int:
    """Exact sign of p + q*sqrt(5) using only integer arithmetic."""
    if p == 0 and q == 0:
        return 0
    if p >= 0 and q >= 0:
        return 1
    if p <= 0 and q <= 0:
        return -1
    if p > 0:  # q < 0: positive iff p^2 > 5 q^2 (sqrt5 irrational, no ties)
        return 1 if p * p > 5 * q * q else -1
    return 1 if 5 * q * q > p * p else -1


def sign_at_minus_root(z: ZPhi) -> int:
    """Exact sign of a + b*phi_minus; 2*(a + b*phi_minus) = (2a+b) - b*sqrt5."""
    return sign_with_sqrt5(2 * z.a + z.b, -z.b)


def sign_at_plus_root(z: ZPhi) -> int:
    return sign_with_sqrt5(2 * z.a + z.b, z.b)
