"""Super-increasing exponent families of skew matrices in a formal variable.

A super-increasing sequence (each term strictly dominating the sum of all
earlier ones, first term 1) drives a family of skew matrices whose upper
entries are single monomials ``alpha**s_i``.  Their pfaffians expand with
strictly alternating signs and strictly decreasing exponents, which pins the
values into (0, 1) for any ``alpha`` in (0, 1) and yields symbolic
linear-independence certificates conditional on ``alpha`` being
transcendental (a declared premise, never tested numerically).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .alphapoly import AlphaPoly
from .errors import CollisionFound, NotSuperIncreasing, SequenceTooShort
from .skewmat import IndexSet, SkewMatrix, enumerate_index_sets, pfaffian

__all__ = [
    "SuperIncreasingSeq",
    "validate",
    "powers_of_two",
    "build_theta",
    "pfaffian_expansion",
    "expansion_as_poly",
    "monotone_chain_check",
    "independence_certificate",
    "theta_shape_of",
]


@dataclass(frozen=True)
class SuperIncreasingSeq:
    """Validated sequence: s_1 = 1 and s_i > s_1 + ... + s_{i-1}."""

    s: tuple

    def __len__(self):
        return len(self.s)

    def __getitem__(self, i):
        return self.s[i]


def validate(s) -> SuperIncreasingSeq:
    """Wrap a list after checking strict dominance; names the first violation."""
    terms = [int(v) for v in s]
    if not terms:
        raise NotSuperIncreasing(1, "sequence is empty")
    if terms[0] != 1:
        raise NotSuperIncreasing(1, "first term must be 1")
    partial = terms[0]
    for i, v in enumerate(terms[1:], start=2):
        if v <= partial:
            raise NotSuperIncreasing(i)
        partial += v
    return SuperIncreasingSeq(tuple(terms))


def powers_of_two(count) -> SuperIncreasingSeq:
    return SuperIncreasingSeq(tuple(2**i for i in range(count)))


def _entry_exponent(s, j, k):
    """Exponent of the (j, k) upper entry, 1-based: column-major layout."""
    return s[(k - 1) * (k - 2) // 2 + (j - 1)]


def build_theta(s: SuperIncreasingSeq, n: int) -> SkewMatrix:
    """The n x n monomial matrix of the family.

    Column k (k = 2..n) carries the next k-1 sequence terms, so entry (j, k)
    has exponent ``s[(k-1)(k-2)/2 + j]`` in 1-based counting.
    """
    needed = n * (n - 1) // 2
    if len(s) < needed:
        raise SequenceTooShort(f"need {needed} terms for n={n}, have {len(s)}")
    upper = {
        (j, k): AlphaPoly.monomial(_entry_exponent(s, j, k))
        for k in range(2, n + 1)
        for j in range(1, k)
    }
    return SkewMatrix.from_upper(n, upper, "alpha")


def pfaffian_expansion(theta: SkewMatrix):
    """Signed exponent list [(+1, M_1), (-1, M_2), ...] of the pfaffian.

    Asserts the structure the family guarantees: unit coefficients, signs
    strictly alternating starting +, exponents strictly decreasing, length
    equal to the double factorial (n-1)!!.
    """
    if theta.mode != "alpha":
        raise ValueError("expansion needs an alpha-mode matrix")
    pf = pfaffian(theta).value
    terms = pf.sorted_terms(descending=True)
    out = []
    for rank, (exponent, coeff) in enumerate(terms):
        expect = 1 if rank % 2 == 0 else -1
        if coeff != expect:
            raise AssertionError(
                f"term alpha^{exponent} has coefficient {coeff}, "
                f"expected {expect}: not an alternating unit expansion"
            )
        out.append((expect, exponent))
    want = _double_factorial(theta.n - 1)
    if len(out) != want:
        raise AssertionError(
            f"expansion has {len(out)} terms, expected (n-1)!! = {want}"
        )
    return out


def expansion_as_poly(expansion) -> AlphaPoly:
    return AlphaPoly({e: sign for sign, e in expansion})


def _double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@dataclass
class ChainReport:
    alpha: float
    values_log: dict  # n -> (sign, log value) of pf
    chain_ok: bool
    gap_ok: bool
    failures: list

    @property
    def passed(self):
        return self.chain_ok and self.gap_ok and not self.failures


def monotone_chain_check(s: SuperIncreasingSeq, n_max: int, alpha: float) -> ChainReport:
    """Verify 0 < pf(n_max) < pf(n_max - 2) < ... < pf(2) < 1 at ``alpha``.

    Values are compared in the log domain (the leading exponent alone can
    underflow any float).  Also checks the exponent gap: the smallest
    exponent at size n exceeds the largest at size n-2.
    """
    if n_max % 2 != 0 or n_max < 2:
        raise ValueError("n_max must be even and >= 2")
    failures = []
    if not 0.0 < alpha < 1.0:
        failures.append(f"alpha={alpha} outside (0, 1); chain undefined")
        return ChainReport(alpha, {}, False, False, failures)
    values = {}
    expansions = {}
    for n in range(2, n_max + 1, 2):
        theta = build_theta(s, n)
        expansion = pfaffian_expansion(theta)
        expansions[n] = expansion
        values[n] = expansion_as_poly(expansion).evaluate_log(alpha)
    chain_ok = True
    for n in range(2, n_max + 1, 2):
        sign, logv = values[n]
        if sign <= 0:
            failures.append(f"pf at n={n} not positive")
            chain_ok = False
        if logv >= 0.0:
            failures.append(f"pf at n={n} not below 1")
            chain_ok = False
    for n in range(4, n_max + 1, 2):
        if values[n][1] >= values[n - 2][1]:
            failures.append(f"pf at n={n} not below pf at n={n - 2}")
            chain_ok = False
    gap_ok = True
    for n in range(4, n_max + 1, 2):
        smallest_n = expansions[n][-1][1]
        largest_prev = expansions[n - 2][0][1]
        if not smallest_n > largest_prev:
            failures.append(
                f"exponent gap fails at n={n}: {smallest_n} <= {largest_prev}"
            )
            gap_ok = False
    return ChainReport(alpha, values, chain_ok, gap_ok, failures)


@dataclass
class IndependenceCertificate:
    """Distinct-monomial certificate, conditional on transcendence.

    Every exponent across all pfaffian-minor expansions (and 0, standing for
    the constant 1) occurs exactly once, so the minors and 1 have pairwise
    disjoint monomial supports and are linearly independent over the
    rationals whenever alpha is transcendental.  Syntactic-only: nothing
    numeric is claimed about any particular alpha.
    """

    n: int
    exponent_table: dict  # IndexSet -> tuple of exponents, descending
    minor_count: int

    @property
    def conditional_statement(self):
        return (
            "monomial supports pairwise disjoint; independence holds "
            "under the declared transcendence premise"
        )


def independence_certificate(s, n: int) -> IndependenceCertificate:
    """Check all minor expansions for exponent collisions.

    Accepts a raw integer list or a validated sequence; the certificate is
    about the monomial layout, not about dominance.
    """
    if isinstance(s, SuperIncreasingSeq):
        seq = s
    else:
        seq = SuperIncreasingSeq(tuple(int(v) for v in s))
    theta = build_theta(seq, n)
    seen = {0: "1"}
    table = {}
    for I in enumerate_index_sets(n):
        sub = theta.minor(I)
        pf = pfaffian(sub).value
        exponents = tuple(e for e, _ in pf.sorted_terms(descending=True))
        # Matching-sum exponents that coincide inside one minor merge (or
        # cancel) in the polynomial, shortening the expansion.
        if len(exponents) != _double_factorial(I.cardinality - 1):
            raise CollisionFound("<internal>", tuple(I), tuple(I))
        for e in exponents:
            if e in seen:
                raise CollisionFound(e, seen[e], tuple(I))
            seen[e] = tuple(I)
        table[I] = exponents
    return IndependenceCertificate(n=n, exponent_table=table, minor_count=len(table))


def theta_shape_of(matrix: SkewMatrix):
    """Extract the exponent sequence if ``matrix`` has the family layout.

    Returns the column-major exponent list when every upper entry is a unit
    monomial and the exponents are strictly increasing in column-major
    order (the shape every minor of a family matrix inherits); None
    otherwise.
    """
    if matrix.mode != "alpha":
        return None
    seq = []
    for k in range(2, matrix.n + 1):
        for j in range(1, k):
            entry = matrix.entry(j, k)
            if not isinstance(entry, AlphaPoly) or len(entry) != 1:
                return None
            ((exponent, coeff),) = entry.terms.items()
            if coeff != 1:
                return None
            seq.append(exponent)
    if any(a >= b for a, b in zip(seq, seq[1:])):
        return None
    return seq
