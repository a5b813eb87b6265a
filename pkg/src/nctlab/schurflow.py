"""The 2x2-block Schur-complement flow on skew matrices.

``schur_F`` removes the leading 2x2 block; its iterates have entries that are
ratios of leading pfaffian minors, which is what the projection-existence
conditions, trace-value synthesis, and the trace-lattice decomposition in
this module are built on.

Conventions fixed here:

* the pfaffian over the empty index set is 1, so the closed entry formula
  specializes to the zeroth iterate;
* non-integrality passes iff the distance to the nearest integer exceeds the
  tolerance, and open-interval checks keep the same margin from {0, 1}
  (float inputs cannot certify irrationality; reports carry the margin);
* correction coefficients in synthesized trace values range over leading
  segments of the sorted index set by default ("leading"), with "all_even"
  available behind a flag; every report records which range was used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .alphapoly import AlphaPoly, AlphaRational
from .errors import (
    AmbiguousDecomposition,
    ModeMismatch,
    PreconditionViolated,
    SingularBlock,
)
from . import intrel
from .skewmat import (
    IndexSet,
    SkewMatrix,
    enumerate_index_sets,
    pfaffian,
    pfaffian_minor,
)

__all__ = [
    "schur_F",
    "flow",
    "flow_entry_formula",
    "check_conditions",
    "check_strong",
    "trace_target",
    "lattice_decompose",
    "FlowState",
    "ConditionReport",
    "TraceTarget",
    "LatticeDecomposition",
]

FLOAT_SINGULAR_TOL = 1e-14
FLOW_FACTORIZATION_RTOL = 1e-10


def _is_zero(value, float_tol=FLOAT_SINGULAR_TOL):
    if isinstance(value, (AlphaPoly, AlphaRational)):
        return value.is_zero()
    if isinstance(value, float):
        return abs(value) < float_tol
    return value == 0


def _leading_pf(A, size):
    """pf of the leading size x size minor; pf over the empty set is 1."""
    if size == 0:
        return Fraction(1) if A.mode == "rational" else (
            1.0 if A.mode == "float" else AlphaPoly.one()
        )
    return pfaffian_minor(A, IndexSet(tuple(range(1, size + 1)))).value


def schur_F(theta: SkewMatrix) -> SkewMatrix:
    """One flow step: eliminate the leading 2x2 block.

    Returns the (n-2)-dimensional skew matrix whose (j, k) entry is
    ``theta[j+2, k+2] + (theta[2, j+2] * theta[1, k+2]
    - theta[1, j+2] * theta[2, k+2]) / theta[1, 2]``.
    Float results are antisymmetrized exactly.
    """
    n = theta.n
    if n % 2 != 0 or n < 4:
        raise ValueError("flow step needs even dimension >= 4")
    t12 = theta.entry(1, 2)
    if _is_zero(t12):
        raise SingularBlock("leading 2x2 block is singular (theta_12 = 0)")
    m = n - 2
    rows = [[None] * m for _ in range(m)]
    zero = theta.entry(1, 1) * 0 if theta.mode != "float" else 0.0
    for j in range(1, m + 1):
        rows[j - 1][j - 1] = zero
        for k in range(j + 1, m + 1):
            num = (
                theta.entry(2, j + 2) * theta.entry(1, k + 2)
                - theta.entry(1, j + 2) * theta.entry(2, k + 2)
            )
            val = theta.entry(j + 2, k + 2) + num / t12
            rows[j - 1][k - 1] = val
            rows[k - 1][j - 1] = -val
    if theta.mode == "float":
        sym = [
            [(rows[a][b] - rows[b][a]) / 2.0 for b in range(m)]
            for a in range(m)
        ]
        return SkewMatrix(sym, "float")
    return SkewMatrix(rows, theta.mode)


@dataclass
class FlowState:
    """Flow iterates of a base matrix plus the leading-block pfaffians."""

    base: SkewMatrix
    iterates: list
    ratios: list  # entry (1, 2) of each iterate, i.e. pf of its leading block

    @property
    def depth(self):
        return len(self.iterates) - 1


def flow(theta: SkewMatrix, m: int) -> FlowState:
    """Iterate the flow ``m`` times, checking the pfaffian factorization.

    Requires the leading pfaffian minors of orders 2, 4, .., 2*min(m, l-1)
    to be nonzero (l = n/2); the first vanishing one is named in the error.
    """
    n = theta.n
    if n % 2 != 0:
        raise ValueError("flow needs even dimension")
    l = n // 2
    if m > l - 1 or m < 0:
        raise ValueError(f"iteration count must lie in 0..{l - 1}")
    for s in range(1, min(m, l - 1) + 1):
        if _is_zero(_leading_pf(theta, 2 * s)):
            raise PreconditionViolated(
                f"leading pfaffian minor on (1..{2 * s}) vanishes"
            )
    iterates = [theta]
    ratios = []
    current = theta
    for step in range(m):
        ratios.append(current.entry(1, 2))
        nxt = schur_F(current)
        _check_factorization(current, nxt)
        iterates.append(nxt)
        current = nxt
    if current.n >= 2:
        ratios.append(current.entry(1, 2))
    return FlowState(base=theta, iterates=iterates, ratios=ratios)


def _check_factorization(current, nxt):
    """pf(current) must equal pf(leading 2x2) * pf(next iterate)."""
    lhs = pfaffian(current).value
    rhs = current.entry(1, 2) * pfaffian(nxt).value
    if current.mode == "float":
        scale = max(1.0, abs(lhs))
        if abs(lhs - rhs) > FLOW_FACTORIZATION_RTOL * scale:
            raise ArithmeticError(
                f"flow factorization defect {abs(lhs - rhs):.3e} "
                f"exceeds {FLOW_FACTORIZATION_RTOL:.1e} relative"
            )
    else:
        if not _is_zero(lhs - rhs):
            raise ArithmeticError("flow factorization fails exactly")


def flow_entry_formula(theta: SkewMatrix, m: int, j: int, k: int):
    """Entry (j, k) of the m-th iterate from pfaffian minors alone.

    Equals ``pf(1..2m, 2m+j, 2m+k) / pf(1..2m)`` without forming any Schur
    complement; m = 0 returns the matrix entry itself.
    """
    n = theta.n
    if not 1 <= j < k <= n - 2 * m:
        raise ValueError("need 1 <= j < k <= n - 2m")
    if m == 0:
        return theta.entry(j, k)
    s = 2 * m
    for step in range(1, m + 1):
        if _is_zero(_leading_pf(theta, 2 * step)):
            raise PreconditionViolated(
                f"leading pfaffian minor on (1..{2 * step}) vanishes"
            )
    num = pfaffian_minor(
        theta, IndexSet(tuple(range(1, s + 1)) + (s + j, s + k))
    ).value
    den = _leading_pf(theta, s)
    return num / den


# -- projection-existence conditions ---------------------------------------


@dataclass
class RatioCheck:
    level: int  # flow depth j; ratio is pf(1..2j+2)/pf(1..2j)
    value: float
    in_open_interval: bool
    boundary_distance: float


@dataclass
class ConditionReport:
    """Certificate for the ratio conditions of one (sub)matrix."""

    target: object  # IndexSet or the string "full"
    ratio_checks: list
    final_ratio: float
    final_distance_to_integer: float
    final_nonintegral: bool
    verdict: bool
    tol: float
    notes: str = ""

    def to_json_dict(self):
        return {
            "target": list(self.target) if isinstance(self.target, IndexSet) else self.target,
            "ratio_checks": [
                {
                    "level": rc.level,
                    "value": rc.value,
                    "in_open_interval": rc.in_open_interval,
                    "boundary_distance": rc.boundary_distance,
                }
                for rc in self.ratio_checks
            ],
            "final_ratio": self.final_ratio,
            "final_distance_to_integer": self.final_distance_to_integer,
            "final_nonintegral": self.final_nonintegral,
            "verdict": self.verdict,
            "tol": self.tol,
            "notes": self.notes,
        }


def _ratio_of_leading_minors(A, top, tol):
    num = _leading_pf(A, top)
    den = _leading_pf(A, top - 2)
    if _is_zero(den):
        raise SingularBlock(f"denominator pfaffian on (1..{top - 2}) vanishes")
    value = num / den
    return float(value)


def _interval_check(value, tol):
    dist = min(value - 0.0, 1.0 - value)
    return RatioCheck(
        level=-1,
        value=value,
        in_open_interval=(value > tol and value < 1.0 - tol),
        boundary_distance=dist,
    )


def check_conditions(theta: SkewMatrix, tol: float = 1e-9) -> ConditionReport:
    """Evaluate the leading-ratio interval conditions and final
    non-integrality for one matrix.

    For n = 2l the interval checks cover the ratios
    ``pf(1..2j+2)/pf(1..2j)`` for j = 1..l-2; the final check is
    non-integrality of ``pf(1..n)/pf(1..n-2)``.  For n = 2 only the
    non-integrality of the single entry is checked.
    """
    if theta.mode == "alpha":
        raise ModeMismatch("evaluate alpha-mode matrices before checking")
    n = theta.n
    if n % 2 != 0 or n < 2:
        raise ValueError("conditions are stated for even dimension >= 2")
    l = n // 2
    checks = []
    for j in range(1, l - 1):
        value = _ratio_of_leading_minors(theta, 2 * j + 2, tol)
        rc = _interval_check(value, tol)
        rc.level = j
        checks.append(rc)
    final = _ratio_of_leading_minors(theta, n, tol)
    dist = abs(final - round(final))
    nonint = dist > tol
    verdict = nonint and all(rc.in_open_interval for rc in checks)
    return ConditionReport(
        target="full",
        ratio_checks=checks,
        final_ratio=final,
        final_distance_to_integer=dist,
        final_nonintegral=nonint,
        verdict=verdict,
        tol=tol,
        notes="interval/non-integrality checks only; "
        "rational independence is not decided numerically",
    )


def check_strong(theta: SkewMatrix, tol: float = 1e-9, variant: str = "a3"):
    """Run the per-minor ratio conditions over qualifying index sets.

    variant "a3": index sets with 4 <= |I| <= 2*floor(n/2); checks
    ``pf-ratio in (0, 1)`` at depths j = 0..m-2 (|I| = 2m).  Vacuous for
    n in {2, 3}.

    variant "pi1": additionally includes |I| = 2 sets and the final
    non-integrality ratio for every I.

    Only open-interval and non-integrality facts are certified; total
    irrationality must be asserted by the caller or certified symbolically.
    """
    if variant not in ("a3", "pi1"):
        raise ValueError("variant must be 'a3' or 'pi1'")
    if theta.mode == "alpha":
        raise ModeMismatch("evaluate alpha-mode matrices before checking")
    n = theta.n
    min_card = 2 if variant == "pi1" else 4
    reports = []
    for I in enumerate_index_sets(n):
        if not min_card <= I.cardinality:
            continue
        sub = theta.minor(I)
        m = I.cardinality // 2
        checks = []
        ok = True
        for j in range(0, m - 1):
            value = _ratio_of_leading_minors(sub, 2 * j + 2, tol)
            rc = _interval_check(value, tol)
            rc.level = j
            checks.append(rc)
            ok = ok and rc.in_open_interval
        final = _ratio_of_leading_minors(sub, 2 * m, tol)
        dist = abs(final - round(final))
        nonint = dist > tol
        if variant == "pi1":
            verdict = ok and nonint
        else:
            verdict = ok
        reports.append(
            ConditionReport(
                target=I,
                ratio_checks=checks,
                final_ratio=final,
                final_distance_to_integer=dist,
                final_nonintegral=nonint,
                verdict=verdict,
                tol=tol,
                notes=f"variant={variant}; irrationality not decided numerically",
            )
        )
    return reports


# -- trace-value synthesis and decomposition --------------------------------


@dataclass
class TraceTarget:
    """A synthesized trace value pf(M_I) + sum_J pf(M_J) k_J + k0."""

    I: IndexSet
    pf_I: object
    corrections: dict  # sub-index-set tuple -> (pf value, integer coefficient)
    k0: int
    total: object
    correction_range: str

    def to_json_dict(self):
        return {
            "I": list(self.I),
            "pf_I": float(self.pf_I),
            "corrections": {
                ",".join(map(str, J)): [float(pf), k]
                for J, (pf, k) in self.corrections.items()
            },
            "k0": self.k0,
            "total": float(self.total),
            "correction_range": self.correction_range,
        }


def _leading_segments(I: IndexSet):
    idx = I.indices
    return [idx[:s] for s in range(2, len(idx), 2)]


def _even_subsets(I: IndexSet):
    from itertools import combinations

    idx = I.indices
    out = []
    for size in range(2, len(idx), 2):
        out.extend(combinations(idx, size))
    return out


def trace_target(
    theta: SkewMatrix,
    I: IndexSet,
    coeffs=None,
    k0: int = 0,
    correction_range: str = "leading",
) -> TraceTarget:
    """Synthesize the trace value of the projection attached to ``I``.

    ``coeffs`` maps sub-index-set tuples to integers.  By default the
    admissible sub-index-sets are the leading segments (i1..is) of the
    sorted I for s = 2, 4, .., |I|-2; pass ``correction_range="all_even"``
    to admit every even proper subset.
    """
    if correction_range == "leading":
        admissible = _leading_segments(I)
    elif correction_range == "all_even":
        admissible = _even_subsets(I)
    else:
        raise ValueError("correction_range must be 'leading' or 'all_even'")
    admissible = {tuple(a) for a in admissible}
    coeffs = {tuple(k): int(v) for k, v in (coeffs or {}).items()}
    for J in coeffs:
        if J not in admissible:
            raise ValueError(
                f"correction set {J} not admissible under "
                f"correction_range={correction_range!r}"
            )
    pf_I = pfaffian_minor(theta, I).value
    corrections = {}
    total = pf_I
    for J, k in sorted(coeffs.items()):
        if k == 0:
            continue
        pf_J = pfaffian_minor(theta, IndexSet(J)).value
        corrections[J] = (pf_J, k)
        total = total + pf_J * k
    total = total + k0
    return TraceTarget(
        I=I,
        pf_I=pf_I,
        corrections=corrections,
        k0=int(k0),
        total=total,
        correction_range=correction_range,
    )


@dataclass
class LatticeDecomposition:
    """x ~ k0 + sum_I k_I pf(M_I) with small integer coefficients."""

    k0: int
    coeffs: dict  # IndexSet -> int (zero coefficients omitted)
    residual: float
    norm_sq: int
    method: str
    alternatives: list = field(default_factory=list)

    def coefficient(self, I: IndexSet) -> int:
        return self.coeffs.get(I, 0)

    def to_json_dict(self):
        return {
            "k0": self.k0,
            "coeffs": {",".join(map(str, I)): k for I, k in self.coeffs.items()},
            "residual": self.residual,
            "norm_sq": self.norm_sq,
            "method": self.method,
            "n_alternatives": len(self.alternatives),
        }


# Exhaustive enumeration stays tractable up to this many pfaffian-minor
# coefficients (n = 4 has 7); beyond that the reduction-based search runs.
_ENUMERATION_LIMIT = 9


def lattice_decompose(
    x: float,
    theta: SkewMatrix,
    coeff_bound: int = 5,
    tol: float = 1e-9,
):
    """Decompose ``x`` over Z + sum_I pf(M_I) Z with bounded coefficients.

    Returns the minimal-norm :class:`LatticeDecomposition`, or ``None`` when
    the search finds nothing within tolerance.  Raises
    :class:`AmbiguousDecomposition` when two distinct solutions tie at the
    minimal norm (both are reported).  All results are verified by direct
    substitution.
    """
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be >= 1")
    index_sets = enumerate_index_sets(theta.n)
    values = [float(pfaffian_minor(theta, I).value) for I in index_sets]
    x = float(x)
    if len(values) <= _ENUMERATION_LIMIT:
        found = intrel.enumerate_relations(x, values, coeff_bound, tol)
        method = "enumeration"
    else:
        found = intrel.lll_relations(x, values, coeff_bound, tol)
        method = "lll"
    if not found:
        return None
    best_norm = found[0][0]
    ties = [s for s in found if s[0] == best_norm]

    def build(sol, alternatives=()):
        norm_sq, k0, coeffs, resid = sol
        nonzero = {
            I: c for I, c in zip(index_sets, coeffs) if c != 0
        }
        return LatticeDecomposition(
            k0=k0,
            coeffs=nonzero,
            residual=resid,
            norm_sq=norm_sq,
            method=method,
            alternatives=[build(a) for a in alternatives],
        )

    if len(ties) > 1:
        raise AmbiguousDecomposition(
            f"{len(ties)} decompositions tie at norm^2={best_norm}",
            [build(s) for s in ties],
        )
    return build(found[0], alternatives=found[1:4])
