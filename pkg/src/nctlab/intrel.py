"""Bounded integer-relation search for trace-lattice decomposition.

Two routes:

* exhaustive vectorized enumeration when the coefficient space is small
  enough (exact semantics for both found and not-found answers);
* LLL reduction of the classical embedding ``[I | W*v]`` otherwise, with
  every candidate re-verified by direct substitution (not-found is then
  relative to the search, which is the usual caveat of reduction-based
  detectors).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = ["enumerate_relations", "lll_reduce", "lll_relations"]


def enumerate_relations(x, values, bound, tol, max_solutions=64):
    """All integer vectors (k0, k_1..k_m) with |k_i| <= bound and
    |x - k0 - sum(k_i * values_i)| <= tol.

    Returns a list of (norm_sq, k0, coeffs, residual) sorted by norm then
    residual, truncated to ``max_solutions`` entries (smallest norms kept).
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    if m == 0:
        k0 = round(x)
        resid = abs(x - k0)
        if abs(k0) <= bound and resid <= tol:
            return [(k0 * k0, int(k0), (), resid)]
        return []
    rng = np.arange(-bound, bound + 1)
    # Split coefficient axes into an outer python loop and a vectorized
    # inner block to bound memory at ~(2b+1)**inner doubles.
    inner = min(m, 4)
    outer = m - inner
    inner_grids = np.meshgrid(*([rng] * inner), indexing="ij")
    inner_coeffs = np.stack([g.ravel() for g in inner_grids], axis=1)
    inner_vals = inner_coeffs @ values[outer:]
    inner_norm = np.sum(inner_coeffs**2, axis=1)

    solutions = []

    def visit(prefix, prefix_val, prefix_norm):
        total = prefix_val + inner_vals
        k0 = np.rint(x - total)
        resid = np.abs(x - total - k0)
        mask = (resid <= tol) & (np.abs(k0) <= bound)
        if not mask.any():
            return
        for idx in np.nonzero(mask)[0]:
            coeffs = tuple(prefix) + tuple(int(c) for c in inner_coeffs[idx])
            norm_sq = prefix_norm + int(inner_norm[idx]) + int(k0[idx]) ** 2
            solutions.append((norm_sq, int(k0[idx]), coeffs, float(resid[idx])))

    if outer == 0:
        visit((), 0.0, 0)
    else:
        def recurse(pos, prefix, val, norm):
            if pos == outer:
                visit(prefix, val, norm)
                return
            for c in range(-bound, bound + 1):
                recurse(pos + 1, prefix + (c,), val + c * values[pos], norm + c * c)

        recurse(0, (), 0.0, 0)

    solutions.sort(key=lambda s: (s[0], s[3]))
    return solutions[:max_solutions]


def lll_reduce(basis, delta=Fraction(99, 100)):
    """Exact-integer LLL reduction; rows of ``basis`` span the lattice.

    Textbook implementation with incremental Gram-Schmidt updates and exact
    Fraction arithmetic; fine for the few-dozen dimensions used here.
    """
    b = [[int(v) for v in row] for row in basis]
    n = len(b)
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = [Fraction(0)] * n

    star = [[Fraction(0)] * len(b[0]) for _ in range(n)]
    for i in range(n):
        star[i] = [Fraction(v) for v in b[i]]
        for j in range(i):
            if norms[j] == 0:
                mu[i][j] = Fraction(0)
                continue
            mu[i][j] = sum(
                Fraction(a) * s for a, s in zip(b[i], star[j])
            ) / norms[j]
            star[i] = [s - mu[i][j] * t for s, t in zip(star[i], star[j])]
        norms[i] = sum(s * s for s in star[i])
    del star

    def size_reduce(k, j):
        if abs(mu[k][j]) > Fraction(1, 2):
            r = round(mu[k][j])
            b[k] = [a - r * c for a, c in zip(b[k], b[j])]
            for jj in range(j):
                mu[k][jj] -= r * mu[j][jj]
            mu[k][j] -= r

    k = 1
    while k < n:
        size_reduce(k, k - 1)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            m = mu[k][k - 1]
            big = norms[k] + m * m * norms[k - 1]
            if big == 0:
                # Degenerate pair (dependent rows): plain swap of GS data.
                mu[k][k - 1] = Fraction(0)
                norms[k], norms[k - 1] = norms[k - 1], norms[k]
            else:
                mu[k][k - 1] = m * norms[k - 1] / big
                norms[k] = norms[k - 1] * norms[k] / big
                norms[k - 1] = big
                for i in range(k + 1, n):
                    t = mu[i][k]
                    mu[i][k] = mu[i][k - 1] - m * t
                    mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            for j in range(k - 1):
                mu[k - 1][j], mu[k][j] = mu[k][j], mu[k - 1][j]
            k = max(k - 1, 1)
    return b


def lll_relations(x, values, bound, tol, max_solutions=16):
    """Bounded relations via the scaled CVP embedding.

    Seeks (k0, k) with |x - k0 - k.values| <= tol, |k| <= bound.  Candidates
    come from reduced basis rows (and +/- combinations of the two shortest)
    whose x-coordinate is +/-1; every candidate is verified in floats.
    """
    values = [float(v) for v in values]
    m = len(values)
    scale = max(1.0, abs(x), *(abs(v) for v in values)) if values else 1.0
    weight = int(10.0 * scale / max(tol, 1e-15))
    vec = [x, 1.0] + values  # coefficient order: (c_x, k0, k_1..k_m)
    dim = m + 2
    rows = []
    for j in range(dim):
        row = [0] * dim + [int(round(weight * vec[j]))]
        row[j] = 1
        rows.append(row)
    reduced = lll_reduce(rows)

    seen = set()
    solutions = []

    def consider(c):
        cx, k0, coeffs = c[0], c[1], tuple(c[2:dim])
        if cx == 0:
            return
        if abs(cx) != 1:
            return
        if cx == 1:
            k0, coeffs = -k0, tuple(-v for v in coeffs)
        if abs(k0) > bound or any(abs(v) > bound for v in coeffs):
            return
        key = (k0, coeffs)
        if key in seen:
            return
        seen.add(key)
        resid = abs(x - k0 - sum(k * v for k, v in zip(coeffs, values)))
        if resid <= tol:
            norm_sq = k0 * k0 + sum(v * v for v in coeffs)
            solutions.append((norm_sq, k0, coeffs, resid))

    for row in reduced:
        consider(row[:dim])
    # Small combinations of the shortest reduced vectors catch near-misses.
    by_len = sorted(reduced, key=lambda r: sum(v * v for v in r))
    for i in range(min(3, len(by_len))):
        for j in range(i + 1, min(4, len(by_len))):
            for a in (-2, -1, 1, 2):
                for c in (-2, -1, 0, 1, 2):
                    combo = [
                        a * u + c * v for u, v in zip(by_len[i], by_len[j])
                    ]
                    consider(combo[:dim])

    solutions.sort(key=lambda s: (s[0], s[3]))
    return solutions[:max_solutions]
