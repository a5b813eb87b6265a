"""Sparse polynomials and rational functions in one formal variable.

The variable (called ``alpha`` throughout) stays formal: coefficients are
exact :class:`~fractions.Fraction` values and exponents are arbitrary
non-negative Python integers, so monomials like ``alpha**(2**44)`` cost
nothing until evaluated.  Evaluation at a float in (0, 1) optionally runs in
the log domain, which keeps signs and magnitudes meaningful long after
``alpha**e`` has underflowed to zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .errors import DenominatorZero

__all__ = ["AlphaPoly", "AlphaRational"]

# Exact evaluation with huge exponents would materialize astronomically long
# integers; anything past this is a bug in the caller, not a use case.
_MAX_EXACT_EXPONENT = 100_000


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"coefficient must be rational, got {type(value).__name__}")


class AlphaPoly:
    """Polynomial ``sum(c_e * alpha**e)`` with exact rational coefficients.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for exponent, coeff in dict(terms).items():
                exponent = int(exponent)
                if exponent < 0:
                    raise ValueError("exponents must be non-negative")
                coeff = _as_fraction(coeff)
                if coeff != 0:
                    clean[exponent] = coeff
        self._terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def one(cls):
        return cls({0: 1})

    @classmethod
    def monomial(cls, exponent, coeff=1):
        return cls({exponent: coeff})

    @classmethod
    def constant(cls, value):
        return cls({0: value})

    # -- structure ----------------------------------------------------

    @property
    def terms(self):
        """Exponent -> coefficient mapping (copy)."""
        return dict(self._terms)

    def sorted_terms(self, descending=True):
        """List of (exponent, coefficient) pairs ordered by exponent."""
        return sorted(self._terms.items(), key=lambda t: t[0], reverse=descending)

    def is_zero(self):
        return not self._terms

    def min_exponent(self):
        if not self._terms:
            raise ValueError("zero polynomial has no exponents")
        return min(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, AlphaPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == AlphaPoly.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, AlphaPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return AlphaPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return AlphaPoly(terms)

    __radd__ = __add__

    def __neg__(self):
        return AlphaPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = e1 + e2
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return AlphaPoly(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DenominatorZero("division by zero")
            return AlphaPoly({e: c / other for e, c in self._terms.items()})
        if isinstance(other, AlphaPoly):
            return AlphaRational(self, other)
        return NotImplemented

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers produce rational functions")
        result = AlphaPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- evaluation ---------------------------------------------------

    def evaluate(self, alpha):
        """Value at ``alpha``.

        Exact when ``alpha`` is a Fraction (small exponents only); plain
        float Horner-free summation otherwise, with terms that underflow
        contributing zero.
        """
        if isinstance(alpha, (Fraction, int)) and not isinstance(alpha, bool):
            alpha = Fraction(alpha)
            if self._terms and max(self._terms) > _MAX_EXACT_EXPONENT:
                raise ValueError(
                    "exponent too large for exact evaluation; "
                    "use evaluate_log with a float"
                )
            return sum((c * alpha**e for e, c in self._terms.items()), Fraction(0))
        alpha = float(alpha)
        total = 0.0
        for e, c in self._terms.items():
            if alpha == 0.0:
                term = float(c) if e == 0 else 0.0
            elif e * math.log(abs(alpha)) < -745.0:
                term = 0.0
            else:
                term = float(c) * alpha**e
            total += term
        return total

    def evaluate_log(self, alpha):
        """Signed log-domain value at a float ``alpha`` in (0, 1).

        Returns ``(sign, log_abs)`` with ``sign`` in {-1, 0, 1}; stable even
        when every monomial underflows, by factoring out the dominant
        (lowest-exponent) term.
        """
        if not self._terms:
            return 0, float("-inf")
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ValueError("log-domain evaluation requires alpha in (0, 1)")
        log_a = math.log(alpha)
        e0 = self.min_exponent()
        bracket = 0.0
        for e, c in self._terms.items():
            shift = (e - e0) * log_a
            bracket += float(c) * (math.exp(shift) if shift > -745.0 else 0.0)
        if bracket == 0.0:
            return 0, float("-inf")
        sign = 1 if bracket > 0 else -1
        return sign, e0 * log_a + math.log(abs(bracket))

    # -- misc ---------------------------------------------------------

    def __repr__(self):
        if not self._terms:
            return "AlphaPoly(0)"
        parts = []
        for e, c in self.sorted_terms():
            if e == 0:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(f"a^{e}")
            else:
                parts.append(f"{c}*a^{e}")
        return "AlphaPoly(" + " + ".join(parts) + ")"


class AlphaRational:
    """Quotient of two :class:`AlphaPoly`; kept unreduced by default.

    Exactness comes from the operands, so gcd reduction is optional
    (:meth:`reduce_monomial` strips the shared pure-alpha power, which is all
    the flow computations ever accumulate).
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, AlphaPoly):
            num = AlphaPoly.constant(num)
        if den is None:
            den = AlphaPoly.one()
        elif not isinstance(den, AlphaPoly):
            den = AlphaPoly.constant(den)
        if den.is_zero():
            raise DenominatorZero("denominator is identically zero")
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, poly):
        return cls(poly, AlphaPoly.one())

    def _coerce(self, other):
        if isinstance(other, AlphaRational):
            return other
        if isinstance(other, AlphaPoly):
            return AlphaRational(other)
        if isinstance(other, (int, Fraction)):
            return AlphaRational(AlphaPoly.constant(other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return AlphaRational(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return AlphaRational(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return AlphaRational(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.num.is_zero():
            raise DenominatorZero("division by zero rational function")
        return AlphaRational(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        reduced = self.reduce_monomial()
        return hash((reduced.num, reduced.den))

    def is_zero(self):
        return self.num.is_zero()

    def reduce_monomial(self):
        """Strip the common alpha-power of numerator and denominator."""
        if self.num.is_zero():
            return AlphaRational(AlphaPoly.zero(), AlphaPoly.one())
        k = min(self.num.min_exponent(), self.den.min_exponent())
        if k == 0:
            return self
        num = AlphaPoly({e - k: c for e, c in self.num.terms.items()})
        den = AlphaPoly({e - k: c for e, c in self.den.terms.items()})
        return AlphaRational(num, den)

    def evaluate(self, alpha):
        den = self.den.evaluate(alpha)
        if den == 0:
            raise DenominatorZero(f"denominator vanishes at alpha={alpha}")
        return self.num.evaluate(alpha) / den

    def __repr__(self):
        return f"AlphaRational({self.num!r} / {self.den!r})"
