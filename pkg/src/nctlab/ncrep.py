"""Finite-dimensional representations of rational phase matrices.

Generators act on functions over the grid (Z_q)^n by translation and
position-dependent phases; this satisfies the rotation relations exactly for
any rational phase matrix with one common denominator q.  Each generator is
a generalized permutation matrix, so exact tuples carry a "monomial"
structure (sum of shift-by-v operators with diagonal phases) under which
products, adjoints, traces, and functions of single generators cost O(dim)
instead of O(dim^3).  Perturbed tuples are dense.

Matrix-analysis toolkit: eigendecomposition of unitaries through the
Hermitian pair ((u+u*)/2, (u-u*)/2i) with degeneracy clustering (dense
Schur fallback), spectral projections at a cut with gap certification, and
branch logarithms anchored at a target angle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import (
    DimCapExceeded,
    GapTooSmall,
    NotRational,
    NotUnitary,
    SpectrumAtBranchCut,
)
from .skewmat import SkewMatrix

__all__ = [
    "RepSpace",
    "MonomialSum",
    "UnitaryTuple",
    "build_rep",
    "perturb",
    "normalized_trace",
    "unitary_eig",
    "unitary_calculus",
    "generator_function",
    "spectral_projection",
    "log_branch",
    "HermitianElement",
    "ProjectionReport",
    "random_hermitian",
    "operator_norm",
]

DEFAULT_DIM_CAP = 4096
UNITARITY_TOL = 1e-10
RELATION_TOL = 1e-12
GAP_MIN = 1e-8
_EIG_CLUSTER_TOL = 1e-7
_EIG_RESIDUAL_TOL = 1e-8


class RepSpace:
    """Index arithmetic for the grid (Z_q)^n; caches shift permutations."""

    def __init__(self, n, q):
        self.n = n
        self.q = q
        self.dim = q**n
        # coords[i] holds the i-th coordinate of every grid point
        idx = np.arange(self.dim)
        coords = []
        for i in range(n):
            coords.append((idx // q ** (n - 1 - i)) % q)
        self.coords = [c.astype(np.int64) for c in coords]
        self._perm_cache = {}

    def perm(self, shift):
        """Index array p with p[x] = index of (x - shift) mod q."""
        shift = tuple(int(s) % self.q for s in shift)
        cached = self._perm_cache.get(shift)
        if cached is not None:
            return cached
        q, n = self.q, self.n
        out = np.zeros(self.dim, dtype=np.int64)
        for i in range(n):
            out += ((self.coords[i] - shift[i]) % q) * q ** (n - 1 - i)
        self._perm_cache[shift] = out
        return out


class MonomialSum:
    """Operator sum_v w_v(x) * (shift by v): one phase vector per shift."""

    def __init__(self, space: RepSpace, terms=None):
        self.space = space
        self.terms = {}
        if terms:
            for v, w in terms.items():
                self._accumulate(tuple(int(c) % space.q for c in v), np.asarray(w, dtype=complex))

    def _accumulate(self, v, w):
        if v in self.terms:
            self.terms[v] = self.terms[v] + w
        else:
            self.terms[v] = w.copy()

    @classmethod
    def identity(cls, space):
        return cls(space, {(0,) * space.n: np.ones(space.dim, dtype=complex)})

    @classmethod
    def zero(cls, space):
        return cls(space, {})

    def copy(self):
        return MonomialSum(self.space, {v: w.copy() for v, w in self.terms.items()})

    def prune(self, tol=0.0):
        self.terms = {
            v: w for v, w in self.terms.items() if np.max(np.abs(w)) > tol
        }
        return self

    # -- algebra -----------------------------------------------------

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, MonomialSum):
            for v, w in other.terms.items():
                out._accumulate(v, w)
            return out
        return NotImplemented

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return MonomialSum(
                self.space, {v: w * scalar for v, w in self.terms.items()}
            )
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, MonomialSum):
            space = self.space
            out = MonomialSum.zero(space)
            for v1, w1 in self.terms.items():
                p1 = space.perm(v1)
                for v2, w2 in other.terms.items():
                    v = tuple((a + b) % space.q for a, b in zip(v1, v2))
                    out._accumulate(v, w1 * w2[p1])
            return out
        if isinstance(other, np.ndarray):
            return self.apply(other)
        return NotImplemented

    def adjoint(self):
        space = self.space
        terms = {}
        for v, w in self.terms.items():
            mv = tuple((-c) % space.q for c in v)
            p = space.perm(mv)  # p[x] = idx(x + v)
            terms[mv] = terms.get(mv, 0) + np.conj(w[p])
        return MonomialSum(space, terms)

    @property
    def H(self):
        return self.adjoint()

    def apply(self, vec):
        """Matrix-vector (or matrix-block) product."""
        out = np.zeros_like(vec, dtype=complex)
        for v, w in self.terms.items():
            p = self.space.perm(v)
            if vec.ndim == 1:
                out += w * vec[p]
            else:
                out += w[:, None] * vec[p, :]
        return out

    def trace(self):
        w = self.terms.get((0,) * self.space.n)
        return complex(w.sum()) if w is not None else 0.0j

    def dense(self):
        D = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        rows = np.arange(self.space.dim)
        for v, w in self.terms.items():
            D[rows, self.space.perm(v)] += w
        return D

    def frobenius(self):
        return float(np.sqrt(sum(np.sum(np.abs(w) ** 2) for w in self.terms.values())))

    def norm2(self, iters=60, seed=0):
        """Operator 2-norm by power iteration on A*A (no densify)."""
        if not self.terms:
            return 0.0
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.space.dim) + 1j * rng.standard_normal(self.space.dim)
        v /= np.linalg.norm(v)
        adj = self.adjoint()
        s = 0.0
        for _ in range(iters):
            u = self.apply(v)
            v = adj.apply(u)
            nv = np.linalg.norm(v)
            if nv == 0.0:
                return 0.0
            s = np.sqrt(nv)
            v /= nv
        return float(s)


def _phase_exponents(theta: SkewMatrix, j: int, coords):
    """Fractional exponent vector sum_{k<j} theta[k, j] * x_k (mod 1)."""
    total = np.zeros(len(coords[0]), dtype=float)
    for k in range(1, j):
        t = theta.entry(k, j)
        total += float(t) * coords[k - 1]
    return total


@dataclass(eq=False)
class UnitaryTuple:
    """n unitaries on a common space, with their target phase matrix."""

    n: int
    q: int
    dim: int
    theta: SkewMatrix
    exact: bool
    space: RepSpace = None
    monomials: list = None          # exact tuples: MonomialSum per generator
    dense_matrices: list = None     # perturbed tuples: ndarray per generator
    meta: dict = field(default_factory=dict)

    def mono(self, j) -> MonomialSum:
        """1-based generator as a monomial operator (exact tuples only)."""
        if not self.exact:
            raise ValueError("monomial structure requires an exact tuple")
        return self.monomials[j - 1]

    def U(self, j) -> np.ndarray:
        """1-based generator as a dense matrix."""
        if self.dense_matrices is not None:
            return self.dense_matrices[j - 1]
        self.dense_matrices = [m.dense() for m in self.monomials]
        return self.dense_matrices[j - 1]

    def phase(self, j, k) -> complex:
        return np.exp(2j * np.pi * float(self.theta.entry(j, k)))

    def relation_defect(self) -> float:
        """max over j < k of || U_k U_j - e^{2 pi i theta_jk} U_j U_k ||."""
        worst = 0.0
        if self.exact:
            for j in range(1, self.n + 1):
                for k in range(j + 1, self.n + 1):
                    d = (
                        self.mono(k) @ self.mono(j)
                        - self.phase(j, k) * (self.mono(j) @ self.mono(k))
                    )
                    worst = max(worst, d.frobenius())
            return worst
        for j in range(1, self.n + 1):
            for k in range(j + 1, self.n + 1):
                d = self.U(k) @ self.U(j) - self.phase(j, k) * (self.U(j) @ self.U(k))
                worst = max(worst, operator_norm(d))
        return worst

    def unitarity_defect(self) -> float:
        worst = 0.0
        for j in range(1, self.n + 1):
            if self.exact:
                d = self.mono(j) @ self.mono(j).adjoint() - MonomialSum.identity(self.space)
                worst = max(worst, d.frobenius())
            else:
                U = self.U(j)
                worst = max(worst, operator_norm(U @ U.conj().T - np.eye(self.dim)))
        return worst


def build_rep(theta: SkewMatrix, q: int, dim_cap: int = DEFAULT_DIM_CAP) -> UnitaryTuple:
    """Exact tuple on (Z_q)^n: generator j multiplies by
    exp(2 pi i sum_{k<j} theta[k, j] x_k) and translates x_j by one.

    Every phase entry must be a rational with denominator dividing q.
    """
    if theta.mode != "rational":
        raise NotRational("phase matrix must be in rational mode")
    n = theta.n
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            if (q * theta.entry(j, k)).denominator != 1:
                raise NotRational(
                    f"theta[{j},{k}] = {theta.entry(j, k)} has no denominator {q}"
                )
    dim = q**n
    if dim > dim_cap:
        raise DimCapExceeded(f"q^n = {dim} exceeds cap {dim_cap}")
    space = RepSpace(n, q)
    monomials = []
    for j in range(1, n + 1):
        shift = tuple(1 if i == j - 1 else 0 for i in range(n))
        expo = _phase_exponents(theta, j, space.coords)
        w = np.exp(2j * np.pi * expo)
        monomials.append(MonomialSum(space, {shift: w}))
    tup = UnitaryTuple(
        n=n, q=q, dim=dim, theta=theta, exact=True, space=space, monomials=monomials
    )
    defect = tup.relation_defect()
    if defect > RELATION_TOL * max(1.0, np.sqrt(dim)):
        raise AssertionError(f"exact tuple violates relations by {defect:.3e}")
    return tup


def random_hermitian(dim, rng):
    """GUE-style Hermitian matrix scaled to unit operator norm."""
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = (raw + raw.conj().T) / 2.0
    return H / np.abs(np.linalg.eigvalsh(H)).max()


def perturb(tup: UnitaryTuple, delta: float, seed: int) -> UnitaryTuple:
    """Multiply each generator by exp(i delta H_j), H_j random Hermitian of
    unit norm, seeded per generator; measures and records the new defect."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0.0:
        out = UnitaryTuple(
            n=tup.n, q=tup.q, dim=tup.dim, theta=tup.theta, exact=tup.exact,
            space=tup.space, monomials=tup.monomials,
            dense_matrices=tup.dense_matrices,
            meta={**tup.meta, "delta": 0.0, "seed": seed},
        )
        out.meta["measured_defect"] = float(tup.relation_defect())
        return out
    dense = []
    for j in range(1, tup.n + 1):
        rng = np.random.default_rng([seed, j])
        H = random_hermitian(tup.dim, rng)
        w, V = np.linalg.eigh(H)
        rot = (V * np.exp(1j * delta * w)) @ V.conj().T
        dense.append(rot @ tup.U(j))
    out = UnitaryTuple(
        n=tup.n, q=tup.q, dim=tup.dim, theta=tup.theta, exact=False,
        space=tup.space, dense_matrices=dense,
        meta={**tup.meta, "delta": float(delta), "seed": seed},
    )
    out.meta["measured_defect"] = float(out.relation_defect())
    return out


def normalized_trace(A) -> complex:
    """tr(A) / dim for a square matrix or monomial operator."""
    if isinstance(A, MonomialSum):
        return A.trace() / A.space.dim
    A = np.asarray(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("normalized trace needs a square matrix")
    return complex(np.trace(A)) / A.shape[0]


def operator_norm(A) -> float:
    """2-norm: exact SVD for small dense matrices, power iteration on the
    Gram operator for large ones and for monomial sums."""
    if isinstance(A, MonomialSum):
        return A.norm2()
    A = np.asarray(A)
    if A.shape[0] <= 512:
        return float(np.linalg.norm(A, 2))
    rng = np.random.default_rng(0)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    AH = A.conj().T
    s = 0.0
    for _ in range(60):
        u = A @ v
        v = AH @ u
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        s = np.sqrt(nv)
        v /= nv
    return float(s)


# -- eigendecomposition of unitaries ----------------------------------------


def unitary_eig(u: np.ndarray, check: bool = True):
    """Eigenvalues and an orthonormal eigenbasis of a unitary matrix.

    Diagonalizes the Hermitian part, then resolves each near-degenerate
    cosine cluster with the compressed anti-Hermitian part; falls back to a
    complex Schur decomposition when the residual is unconvincing.
    """
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    if check:
        defect = operator_norm(u @ u.conj().T - np.eye(dim))
        if defect > UNITARITY_TOL:
            raise NotUnitary(f"unitarity defect {defect:.3e}")
    A = (u + u.conj().T) / 2.0
    B = (u - u.conj().T) / 2j
    w, V = np.linalg.eigh(A)
    lam = np.zeros(dim, dtype=complex)
    start = 0
    while start < dim:
        stop = start + 1
        while stop < dim and w[stop] - w[stop - 1] < _EIG_CLUSTER_TOL:
            stop += 1
        block = V[:, start:stop]
        if stop - start == 1:
            s = float(np.real(block.conj().T @ (B @ block))[0, 0])
            lam[start] = w[start] + 1j * s
        else:
            Bc = block.conj().T @ (B @ block)
            Bc = (Bc + Bc.conj().T) / 2.0
            s, R = np.linalg.eigh(Bc)
            block = block @ R
            V[:, start:stop] = block
            cos_part = np.real(np.sum(np.conj(block) * (A @ block), axis=0))
            lam[start:stop] = cos_part + 1j * s
        start = stop
    residual = np.linalg.norm(u @ V - V * lam[None, :]) / max(1.0, np.sqrt(dim))
    if residual > _EIG_RESIDUAL_TOL:
        T, Z = scipy.linalg.schur(u, output="complex")
        lam = np.diag(T).astype(complex)
        V = Z
    # unit-modulus polish keeps downstream angle arithmetic clean
    mod = np.abs(lam)
    mod[mod == 0] = 1.0
    return lam / mod, V


def unitary_calculus(u: np.ndarray, phi, hermitian: bool = None) -> np.ndarray:
    """Apply a circle function to a unitary: ``phi(t)`` is evaluated at the
    angle fractions t = arg(lambda) / 2 pi in [0, 1).

    Real-valued results are symmetrized to exact Hermitian form.
    """
    lam, V = unitary_eig(u)
    t = np.angle(lam) / (2 * np.pi) % 1.0
    values = np.asarray(phi(t), dtype=complex)
    out = (V * values[None, :]) @ V.conj().T
    if hermitian is None:
        hermitian = bool(np.max(np.abs(values.imag)) < 1e-14)
    if hermitian:
        out = (out + out.conj().T) / 2.0
    return out


def generator_function(tup: UnitaryTuple, j: int, phi, inverse: bool = False) -> MonomialSum:
    """phi of a generator (or its inverse) on an exact tuple, exactly.

    Generators satisfy U^q = 1 with uniform spectrum, so the functional
    calculus is the degree-(q-1) interpolation through the q roots of
    unity; coefficients come from one inverse DFT of the angle values.
    """
    if not tup.exact:
        raise ValueError("generator_function requires an exact tuple")
    q = tup.q
    t = np.arange(q) / q
    values = np.asarray(phi(t), dtype=complex)
    coeffs = np.fft.fft(values) / q  # c_k = (1/q) sum_m phi(m/q) w^{-mk}
    base = tup.mono(j)
    if inverse:
        base = base.adjoint()
    out = MonomialSum.zero(tup.space)
    power = MonomialSum.identity(tup.space)
    for k in range(q):
        if abs(coeffs[k]) > 1e-17:
            out = out + power * coeffs[k]
        if k < q - 1:
            power = power @ base
    return out.prune(1e-17)


# -- spectral projections and logarithms ------------------------------------


@dataclass(eq=False)
class HermitianElement:
    """A matrix (or monomial operator) with its recorded self-adjointness
    defect before symmetrization."""

    matrix: object
    sa_err: float

    @classmethod
    def symmetrize(cls, raw):
        if isinstance(raw, MonomialSum):
            defect = (raw - raw.adjoint()).frobenius()
            return cls(matrix=(raw + raw.adjoint()) * 0.5, sa_err=float(defect))
        raw = np.asarray(raw, dtype=complex)
        defect = operator_norm(raw - raw.conj().T)
        return cls(matrix=(raw + raw.conj().T) / 2.0, sa_err=float(defect))

    def dense(self):
        if isinstance(self.matrix, MonomialSum):
            return self.matrix.dense()
        return self.matrix


@dataclass(eq=False)
class ProjectionReport:
    """A candidate projection with its quality certificates."""

    matrix: np.ndarray
    idem_err: float
    sa_err: float
    gap: float
    trace: float
    meta: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "idem_err": self.idem_err,
            "sa_err": self.sa_err,
            "gap": self.gap,
            "trace": self.trace,
            "meta": {k: v for k, v in self.meta.items() if not isinstance(v, np.ndarray)},
        }


def project_report(P: np.ndarray, gap: float, blocks: int = 1, meta=None) -> ProjectionReport:
    dim = P.shape[0] // blocks
    return ProjectionReport(
        matrix=P,
        idem_err=operator_norm(P @ P - P),
        sa_err=operator_norm(P - P.conj().T),
        gap=float(gap),
        trace=float(np.real(np.trace(P))) / dim,
        meta=meta or {},
    )


def spectral_projection(A, cut: float = 0.5, blocks: int = 1, gap_min: float = GAP_MIN) -> ProjectionReport:
    """Projection onto the spectrum above ``cut`` of a Hermitian matrix.

    Raises :class:`GapTooSmall` when an eigenvalue sits within ``gap_min``
    of the cut (the functional-calculus hypothesis fails there).
    """
    if isinstance(A, MonomialSum):
        A = A.dense()
    A = np.asarray(A, dtype=complex)
    sa = operator_norm(A - A.conj().T)
    A = (A + A.conj().T) / 2.0
    w, V = np.linalg.eigh(A)
    gap = float(np.min(np.abs(w - cut)))
    if gap < gap_min:
        raise GapTooSmall(gap, cut)
    keep = w > cut
    Vk = V[:, keep]
    P = Vk @ Vk.conj().T
    report = project_report(P, gap, blocks=blocks)
    report.sa_err = max(report.sa_err, sa)
    return report


def log_branch(u: np.ndarray, theta: float, cut_margin: float = 1e-6) -> np.ndarray:
    """Skew-Hermitian branch logarithm with arguments in
    (2 pi theta - pi, 2 pi theta + pi); the value at e^{2 pi i theta} 1 is
    2 pi i theta 1."""
    lam, V = unitary_eig(u)
    rel = np.angle(lam * np.exp(-2j * np.pi * theta))
    if np.max(np.abs(rel)) > np.pi - cut_margin:
        raise SpectrumAtBranchCut(
            f"eigenvalue within {cut_margin:.1e} of the excluded ray"
        )
    args = 2 * np.pi * theta + rel
    L = (V * (1j * args)[None, :]) @ V.conj().T
    return (L - L.conj().T) / 2.0


# -- serialization -----------------------------------------------------------


def save_tuple(tup: UnitaryTuple, path):
    """Dense matrix dump plus JSON metadata (phases, size, provenance)."""
    from . import skewmat as _skewmat

    base = str(path)
    if base.endswith(".npz"):
        base = base[: -len(".npz")]
    arrays = {f"U{j}": tup.U(j) for j in range(1, tup.n + 1)}
    np.savez_compressed(base + ".npz", **arrays)
    meta = {
        "n": tup.n,
        "q": tup.q,
        "dim": tup.dim,
        "exact": tup.exact,
        "theta": _skewmat.to_json_dict(tup.theta),
        "meta": {k: v for k, v in tup.meta.items() if isinstance(v, (int, float, str))},
    }
    with open(base + ".json", "w") as fh:
        json.dump(meta, fh, indent=1)


def load_tuple(path) -> UnitaryTuple:
    from . import skewmat as _skewmat

    base = str(path)
    if base.endswith(".npz"):
        base = base[: -len(".npz")]
    with open(base + ".json") as fh:
        meta = json.load(fh)
    with np.load(base + ".npz") as data:
        dense = [data[f"U{j}"] for j in range(1, meta["n"] + 1)]
    return UnitaryTuple(
        n=meta["n"],
        q=meta["q"],
        dim=meta["dim"],
        theta=_skewmat.from_json_dict(meta["theta"]),
        exact=False,
        dense_matrices=dense,
        meta=meta.get("meta", {}),
    )
