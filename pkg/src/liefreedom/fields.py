"""Exact ground fields: arbitrary-precision rationals and prime fields.

Every computation in the package is carried out over one of these fields;
no floating point appears anywhere.  Scalars are plain Python objects
(`Fraction` for the rationals, `int` in ``[0, p)`` for GF(p)) and the field
object supplies the arithmetic, so element types stay cheap and hashable.
"""

from __future__ import annotations

from fractions import Fraction


class FieldError(ValueError):
    """Raised for malformed scalars or invalid field parameters."""


class RationalField:
    """The field of rationals with exact arbitrary-precision arithmetic."""

    name = "Q"
    characteristic = 0

    zero = Fraction(0)
    one = Fraction(1)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def invert(self, a):
        if not a:
            raise ZeroDivisionError("inversion of zero")
        return 1 / Fraction(a)

    def div(self, a, b):
        return Fraction(a) / b

    def is_zero(self, a):
        return not a

    def parse(self, text):
        """Parse ``int`` or ``int/int`` syntax into an exact scalar."""
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"malformed rational scalar {text!r}") from exc

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """GF(p) for a prime p, elements represented as ints in [0, p)."""

    def __init__(self, p):
        if p < 2 or not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        self.p = p
        self.name = f"GF({p})"
        self.characteristic = p
        self.zero = 0
        self.one = 1 % p

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def invert(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inversion of zero")
        return pow(a, self.p - 2, self.p)

    def div(self, a, b):
        return (a * self.invert(b)) % self.p

    def is_zero(self, a):
        return a % self.p == 0

    def parse(self, text):
        try:
            frac = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldError(f"malformed scalar {text!r}") from exc
        if frac.denominator % self.p == 0:
            raise FieldError(f"scalar {text!r} has denominator divisible by {self.p}")
        return self.div(frac.numerator % self.p, frac.denominator % self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


def _is_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    # deterministic Miller-Rabin, valid far beyond any usable modulus here
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


QQ = RationalField()


def GF(p):
    return PrimeField(p)


def field_from_spec(text):
    """Resolve a field declaration string: ``q``/``Q`` or ``gf:P``/``GF P``."""
    t = text.strip().lower()
    if t in ("q", "qq", "rationals"):
        return QQ
    for prefix in ("gf:", "gf"):
        if t.startswith(prefix):
            rest = t[len(prefix):].strip()
            if rest.isdigit():
                return GF(int(rest))
    raise FieldError(f"unknown field spec {text!r}")
