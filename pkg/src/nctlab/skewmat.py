"""Skew-symmetric matrices, pfaffians, and pfaffian minors.

Three arithmetic modes are supported and never silently mixed:

* ``rational`` -- exact :class:`fractions.Fraction` entries,
* ``float``    -- IEEE doubles,
* ``alpha``    -- :class:`~nctlab.alphapoly.AlphaPoly` (or
  :class:`~nctlab.alphapoly.AlphaRational`) entries in a formal variable.

The pfaffian is computed by last-column expansion, memoized over index
subsets, which stays exact in the rational and alpha modes.  Normalization:
the block-diagonal matrix built from ``[[0, 1], [-1, 0]]`` blocks has
pfaffian 1.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .alphapoly import AlphaPoly, AlphaRational
from .errors import IndexOutOfRange, ModeMismatch, OddDimension

__all__ = [
    "SkewMatrix",
    "IndexSet",
    "PfaffianValue",
    "pfaffian",
    "minor",
    "pfaffian_minor",
    "enumerate_index_sets",
    "exact_det",
]

MODES = ("rational", "float", "alpha")

# Full-matrix pfaffians memoize over index subsets; 2**16 of them is the
# agreed ceiling.
MAX_PFAFFIAN_DIM = 16

FLOAT_SKEW_TOL = 1e-12
FLOAT_PF_DET_TOL = 1e-8


def _mode_zero(mode):
    if mode == "rational":
        return Fraction(0)
    if mode == "float":
        return 0.0
    return AlphaPoly.zero()


def _mode_one(mode):
    if mode == "rational":
        return Fraction(1)
    if mode == "float":
        return 1.0
    return AlphaPoly.one()


def _check_entry(mode, value):
    if mode == "rational":
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise ModeMismatch(f"rational mode rejects {type(value).__name__}")
        return Fraction(value)
    if mode == "float":
        if isinstance(value, (AlphaPoly, AlphaRational, Fraction)):
            raise ModeMismatch(f"float mode rejects {type(value).__name__}")
        return float(value)
    if mode == "alpha":
        if isinstance(value, (AlphaPoly, AlphaRational)):
            return value
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise ModeMismatch(f"alpha mode rejects {type(value).__name__}")
        return AlphaPoly.constant(value)
    raise ValueError(f"unknown mode {mode!r}")


def _is_zero(value):
    if isinstance(value, (AlphaPoly, AlphaRational)):
        return value.is_zero()
    return value == 0


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing 1-based indices of even, positive cardinality."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if not idx:
            raise ValueError("index set must be nonempty")
        if len(idx) % 2 != 0:
            raise ValueError("index set must have even cardinality")
        if any(i < 1 for i in idx):
            raise ValueError("indices are 1-based")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")

    @classmethod
    def of(cls, *indices):
        if len(indices) == 1 and not isinstance(indices[0], int):
            indices = tuple(indices[0])
        return cls(tuple(indices))

    @property
    def cardinality(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class PfaffianValue:
    """Pfaffian of a skew matrix, tagged with its arithmetic mode."""

    value: object
    mode: str


class SkewMatrix:
    """Square skew-symmetric matrix in one arithmetic mode; immutable."""

    def __init__(self, entries, mode):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        rows = [list(r) for r in entries]
        n = len(rows)
        if n < 2 or any(len(r) != n for r in rows):
            raise ValueError("entries must form a square matrix of size >= 2")
        rows = [[_check_entry(mode, v) for v in r] for r in rows]
        self.n = n
        self.mode = mode
        self._rows = tuple(tuple(r) for r in rows)
        self._pf_cache = {}
        self._check_skew()

    @classmethod
    def from_upper(cls, n, upper, mode):
        """Build from ``{(j, k): value}`` over strictly upper 1-based pairs."""
        zero = _mode_zero(mode)
        rows = [[zero for _ in range(n)] for _ in range(n)]
        for (j, k), value in dict(upper).items():
            if not 1 <= j < k <= n:
                raise IndexOutOfRange(f"upper entry ({j}, {k}) out of range")
            value = _check_entry(mode, value)
            rows[j - 1][k - 1] = value
            rows[k - 1][j - 1] = -value
        return cls(rows, mode)

    def _check_skew(self):
        for j in range(self.n):
            for k in range(j, self.n):
                a, b = self._rows[j][k], self._rows[k][j]
                if self.mode == "float":
                    scale = max(1.0, abs(a), abs(b))
                    if abs(a + b) > FLOAT_SKEW_TOL * scale:
                        raise ValueError(
                            f"entries ({j+1},{k+1}) break skew-symmetry"
                        )
                else:
                    if not _is_zero(a + b):
                        raise ValueError(
                            f"entries ({j+1},{k+1}) break skew-symmetry"
                        )

    # -- access ---------------------------------------------------------

    def entry(self, j, k):
        """1-based entry access."""
        if not (1 <= j <= self.n and 1 <= k <= self.n):
            raise IndexOutOfRange(f"({j}, {k}) outside 1..{self.n}")
        return self._rows[j - 1][k - 1]

    @property
    def rows(self):
        return self._rows

    def to_numpy(self):
        if self.mode != "float":
            raise ModeMismatch("to_numpy requires float mode")
        return np.array(self._rows, dtype=float)

    def to_float(self, alpha=None):
        """Float-mode copy; alpha mode needs an evaluation point."""
        if self.mode == "float":
            return self
        if self.mode == "rational":
            rows = [[float(v) for v in r] for r in self._rows]
        else:
            if alpha is None:
                raise ValueError("alpha mode needs an evaluation point")
            rows = [[float(v.evaluate(alpha)) for v in r] for r in self._rows]
        return SkewMatrix(rows, "float")

    def evaluate(self, alpha):
        """Rational-mode copy of an alpha-mode matrix at exact ``alpha``."""
        if self.mode != "alpha":
            raise ModeMismatch("evaluate applies to alpha mode")
        rows = [[Fraction(v.evaluate(Fraction(alpha))) for v in r] for r in self._rows]
        return SkewMatrix(rows, "rational")

    def __eq__(self, other):
        if not isinstance(other, SkewMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.mode == other.mode
            and self._rows == other._rows
        )

    def __repr__(self):
        return f"SkewMatrix(n={self.n}, mode={self.mode!r})"

    # -- pfaffians --------------------------------------------------------

    def _pf_recursive(self, indices):
        """Pfaffian of the submatrix on ``indices`` (0-based, sorted)."""
        if not indices:
            return _mode_one(self.mode)
        cached = self._pf_cache.get(indices)
        if cached is not None:
            return cached
        last = indices[-1]
        rest = indices[:-1]
        total = _mode_zero(self.mode)
        for t, i in enumerate(rest):
            a = self._rows[i][last]
            if _is_zero(a):
                continue
            sub = tuple(x for x in rest if x != i)
            term = a * self._pf_recursive(sub)
            total = total + term if t % 2 == 0 else total - term
        self._pf_cache[indices] = total
        return total

    def pfaffian(self):
        return pfaffian(self)

    def minor(self, index_set):
        return minor(self, index_set)


def pfaffian(A: SkewMatrix) -> PfaffianValue:
    """Pfaffian by memoized last-column expansion.

    Float mode cross-checks pf**2 against the determinant and warns when the
    relative defect exceeds ``1e-8`` (an ill-conditioning signal, not an
    error).
    """
    if A.n % 2 != 0:
        raise OddDimension(f"pfaffian needs even dimension, got {A.n}")
    if A.n > MAX_PFAFFIAN_DIM:
        raise ValueError(f"full pfaffian capped at n={MAX_PFAFFIAN_DIM}")
    value = A._pf_recursive(tuple(range(A.n)))
    if A.mode == "float":
        det = float(np.linalg.det(A.to_numpy()))
        defect = abs(value * value - det) / max(1.0, abs(det))
        if defect > FLOAT_PF_DET_TOL:
            warnings.warn(
                f"pf^2 deviates from det by {defect:.3e}; "
                "matrix may be ill-conditioned",
                RuntimeWarning,
                stacklevel=2,
            )
    return PfaffianValue(value=value, mode=A.mode)


def minor(A: SkewMatrix, I: IndexSet) -> SkewMatrix:
    """Submatrix on the rows and columns selected by ``I``."""
    if I.indices[-1] > A.n:
        raise IndexOutOfRange(f"index {I.indices[-1]} exceeds n={A.n}")
    idx = [i - 1 for i in I.indices]
    rows = [[A.rows[r][c] for c in idx] for r in idx]
    return SkewMatrix(rows, A.mode)


def pfaffian_minor(A: SkewMatrix, I: IndexSet) -> PfaffianValue:
    """Pfaffian of the minor on ``I``, sharing A's memoization cache."""
    if I.indices[-1] > A.n:
        raise IndexOutOfRange(f"index {I.indices[-1]} exceeds n={A.n}")
    indices = tuple(i - 1 for i in I.indices)
    return PfaffianValue(value=A._pf_recursive(indices), mode=A.mode)


def enumerate_index_sets(n):
    """All even-cardinality nonempty subsets of {1..n}; count 2**(n-1) - 1."""
    if n < 2:
        raise ValueError("n must be at least 2")
    out = []
    for size in range(2, n + 1, 2):
        for combo in combinations(range(1, n + 1), size):
            out.append(IndexSet(combo))
    return out


def exact_det(rows):
    """Determinant of a square matrix of Fractions by fraction elimination."""
    m = [[Fraction(v) for v in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            det = -det
        pivot = m[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = m[r][col] / pivot
            if factor:
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


# -- serialization ---------------------------------------------------------


def _entry_to_json(mode, value):
    if mode == "rational":
        return f"{value.numerator}/{value.denominator}"
    if mode == "float":
        return float(value)
    if isinstance(value, AlphaRational):
        return {
            "num": {str(e): f"{c.numerator}/{c.denominator}" for e, c in value.num.terms.items()},
            "den": {str(e): f"{c.numerator}/{c.denominator}" for e, c in value.den.terms.items()},
        }
    return {str(e): f"{c.numerator}/{c.denominator}" for e, c in value.terms.items()}


def _entry_from_json(mode, raw):
    if mode == "rational":
        return Fraction(raw)
    if mode == "float":
        return float(raw)
    if set(raw) == {"num", "den"}:
        num = AlphaPoly({int(e): Fraction(c) for e, c in raw["num"].items()})
        den = AlphaPoly({int(e): Fraction(c) for e, c in raw["den"].items()})
        return AlphaRational(num, den)
    return AlphaPoly({int(e): Fraction(c) for e, c in raw.items()})


def to_json_dict(A: SkewMatrix) -> dict:
    """JSON form: dimension, mode, and the strictly upper entries."""
    upper = []
    for j in range(1, A.n + 1):
        for k in range(j + 1, A.n + 1):
            v = A.entry(j, k)
            if not _is_zero(v):
                upper.append([j, k, _entry_to_json(A.mode, v)])
    return {"n": A.n, "mode": A.mode, "upper": upper}


def from_json_dict(data: dict) -> SkewMatrix:
    mode = data["mode"]
    upper = {(j, k): _entry_from_json(mode, raw) for j, k, raw in data["upper"]}
    return SkewMatrix.from_upper(data["n"], upper, mode)


def save(A: SkewMatrix, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(A), fh, indent=1)


def load(path) -> SkewMatrix:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
