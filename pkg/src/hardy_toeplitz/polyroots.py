"""Polynomial zeros and zero counting in discs.

Two independent routes to the number of zeros inside a circle:

* :func:`count_in_disc` enumerates roots (Aberth-Ehrlich with a Newton-polygon
  start, then Newton polishing) and reports the distance of the nearest root
  to the circle so that near-boundary counts are flagged instead of guessed.
* :func:`winding_count` never looks at roots: it tracks the argument of the
  polynomial along the circle with adaptive sample doubling.

Coefficients are always in ascending order (``coeffs[k]`` multiplies ``z**k``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import RootFindingError

BOUNDARY_TOL = 1e-9
CLUSTER_TOL = 1e-7
MAX_ITER = 500


@njit(cache=True, nogil=True)
def _horner_with_derivative(a, x):
    # a ascending; returns p(x), p'(x), sum |a_k| |x|^k
    n = a.shape[0] - 1
    p = a[n]
    dp = 0j
    ax = abs(x)
    mag = abs(a[n])
    for k in range(n - 1, -1, -1):
        dp = dp * x + p
        p = p * x + a[k]
        mag = mag * ax + abs(a[k])
    return p, dp, mag


@njit(cache=True, nogil=True)
def _newton_ratio(a, ra, z):
    """p(z)/p'(z) and the relative residual |p(z)| / sum|a_k||z|^k.

    For |z| > 1 the reversed polynomial is used so that large roots neither
    overflow nor lose relative accuracy.
    """
    n = a.shape[0] - 1
    if abs(z) <= 1.0:
        p, dp, mag = _horner_with_derivative(a, z)
        rel = abs(p) / mag if mag > 0 else 0.0
        if dp == 0:
            return np.inf + 0j, rel
        return p / dp, rel
    y = 1.0 / z
    q, dq, mag = _horner_with_derivative(ra, y)
    rel = abs(q) / mag if mag > 0 else 0.0
    den = n * q - y * dq
    if den == 0:
        return np.inf + 0j, rel
    return z * q / den, rel


@njit(cache=True, nogil=True)
def _initial_guesses(a):
    """Newton-polygon start: one circle per upper-hull edge of (k, log|a_k|)."""
    n = a.shape[0] - 1
    ks = np.empty(n + 1, dtype=np.int64)
    ls = np.empty(n + 1)
    m = 0
    for k in range(n + 1):
        if a[k] != 0:
            ks[m] = k
            ls[m] = np.log(abs(a[k]))
            m += 1
    hull = np.empty(m, dtype=np.int64)
    h = 0
    for i in range(m):
        while h >= 2:
            i0 = hull[h - 2]
            i1 = hull[h - 1]
            cross = (ks[i1] - ks[i0]) * (ls[i] - ls[i0]) - (ls[i1] - ls[i0]) * (ks[i] - ks[i0])
            if cross >= 0:
                h -= 1
            else:
                break
        hull[h] = i
        h += 1
    z = np.empty(n, dtype=np.complex128)
    pos = 0
    for e in range(h - 1):
        k0 = ks[hull[e]]
        k1 = ks[hull[e + 1]]
        cnt = k1 - k0
        r = np.exp((ls[hull[e]] - ls[hull[e + 1]]) / cnt)
        for j in range(cnt):
            ang = 2 * np.pi * j / cnt + 2 * np.pi * e / n + 0.4
            z[pos] = r * np.exp(1j * ang)
            pos += 1
    return z


@njit(cache=True, nogil=True)
def _aberth_one(a, max_iter):
    n = a.shape[0] - 1
    ra = a[::-1].copy()
    z = _initial_guesses(a)
    done = np.zeros(n, dtype=np.bool_)
    tol = 8.0 * (n + 1) * 2.220446049250313e-16
    remaining = n
    for _ in range(max_iter):
        if remaining == 0:
            break
        for i in range(n):
            if done[i]:
                continue
            w, rel = _newton_ratio(a, ra, z[i])
            if rel <= tol:
                done[i] = True
                remaining -= 1
                continue
            s = 0j
            for j in range(n):
                if j != i:
                    s += 1.0 / (z[i] - z[j])
            corr = w / (1.0 - w * s)
            if not np.isfinite(corr.real) or not np.isfinite(corr.imag):
                corr = w
            z[i] -= corr
            if abs(corr) <= 4 * 2.220446049250313e-16 * abs(z[i]):
                done[i] = True
                remaining -= 1
    # Newton polish; keep a step only if it lowers the relative residual.
    berr = 0.0
    for i in range(n):
        w, rel = _newton_ratio(a, ra, z[i])
        for _ in range(2):
            if not np.isfinite(w.real) or not np.isfinite(w.imag):
                break
            cand = z[i] - w
            w2, rel2 = _newton_ratio(a, ra, cand)
            if rel2 < rel:
                z[i] = cand
                w = w2
                rel = rel2
            else:
                break
        if rel > berr:
            berr = rel
    return z, remaining == 0, berr


@njit(cache=True, nogil=True)
def _roots_rows(rows, max_iter):
    """Roots of every row; trailing (high-order) zeros reduce the degree.

    Returns (roots padded with nan, converged, backward error, degree).
    """
    P, L = rows.shape
    out = np.full((P, L - 1), np.nan + 0j, dtype=np.complex128)
    conv = np.ones(P, dtype=np.bool_)
    berr = np.zeros(P)
    deg = np.zeros(P, dtype=np.int64)
    for r in range(P):
        hi = -1
        for k in range(L - 1, -1, -1):
            if rows[r, k] != 0:
                hi = k
                break
        if hi <= 0:
            deg[r] = max(hi, 0)
            continue
        lo = 0
        while rows[r, lo] == 0:
            lo += 1
        deg[r] = hi
        for k in range(lo):
            out[r, k] = 0j
        if hi - lo >= 1:
            z, ok, be = _aberth_one(rows[r, lo : hi + 1].copy(), max_iter)
            for k in range(hi - lo):
                out[r, lo + k] = z[k]
            conv[r] = ok
            berr[r] = be
    return out, conv, berr, deg


def roots_rows(rows, max_iter: int = MAX_ITER):
    """Batched roots of many polynomials (rows of ascending coefficients).

    Each row is solved independently of the others, so results do not depend
    on how rows are grouped into batches.
    """
    rows = np.ascontiguousarray(np.atleast_2d(np.asarray(rows, dtype=complex)))
    if rows.shape[1] < 2:
        P = rows.shape[0]
        return (np.empty((P, 0), complex), np.ones(P, bool), np.zeros(P), np.zeros(P, np.int64))
    return _roots_rows(rows, max_iter)


def _cluster(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    """Single-linkage clusters of nearby roots as (centre, multiplicity)."""
    n = roots.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= tol * max(1.0, abs(roots[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = [(complex(roots[idx].mean()), len(idx)) for idx in groups.values()]
    out.sort(key=lambda t: (abs(t[0]), np.angle(t[0])))
    return out


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial with multiplicity clusters."""

    roots: np.ndarray
    degree: int
    max_backward_error: float
    cluster_tol: float = CLUSTER_TOL

    @property
    def clusters(self) -> list[tuple[complex, int]]:
        return _cluster(self.roots, self.cluster_tol)

    def __len__(self) -> int:
        return self.roots.size


def roots(coeffs, max_iter: int = MAX_ITER, cluster_tol: float = CLUSTER_TOL) -> RootSet:
    """All roots of the polynomial with ascending coefficients ``coeffs``.

    Raises :class:`RootFindingError` if the iteration does not converge.
    """
    a = np.asarray(coeffs, dtype=complex).ravel()
    if not np.any(a != 0):
        raise ValueError("the zero polynomial has no finite root set")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficients must be finite")
    r, conv, berr, deg = roots_rows(a[None, :], max_iter)
    if not conv[0]:
        raise RootFindingError(f"Aberth iteration did not converge in {max_iter} steps")
    found = r[0, : int(deg[0])]
    return RootSet(found, int(deg[0]), float(berr[0]), cluster_tol)


@dataclass(frozen=True)
class CountResult:
    """Number of zeros strictly inside a circle, with the nearest-root margin."""

    count: int
    boundary_margin: float
    resolved: bool
    radius: float = 1.0


def _count_from_roots(r: np.ndarray, radius: float, boundary_tol: float) -> CountResult:
    if r.size == 0:
        return CountResult(0, np.inf, True, radius)
    mod = np.abs(r)
    margin = float(np.min(np.abs(mod - radius)))
    return CountResult(int(np.sum(mod < radius)), margin, margin >= boundary_tol, radius)


def count_in_disc(coeffs, radius: float = 1.0, boundary_tol: float = BOUNDARY_TOL) -> CountResult:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return _count_from_roots(roots(coeffs).roots, radius, boundary_tol)


@dataclass(frozen=True)
class BatchCounts:
    """Vectorised zero counts for many polynomials sharing one circle."""

    inside: np.ndarray        # |z| < radius - tol
    near: np.ndarray          # ||z| - radius| < tol
    margin: np.ndarray        # min ||z| - radius| (inf if no roots)
    converged: np.ndarray
    min_modulus: np.ndarray   # smallest root modulus (inf if no roots)

    @property
    def resolved(self) -> np.ndarray:
        return self.converged & (self.near == 0)

    @property
    def count(self) -> np.ndarray:
        return self.inside


def count_rows(rows, radius: float = 1.0, boundary_tol: float = BOUNDARY_TOL) -> BatchCounts:
    r, conv, _, _ = roots_rows(rows)
    mod = np.abs(r)
    valid = ~np.isnan(mod)
    dist = np.where(valid, np.abs(mod - radius), np.inf)
    inside = np.sum(valid & (mod < radius) & (dist >= boundary_tol), axis=1)
    near = np.sum(valid & (dist < boundary_tol), axis=1)
    margin = dist.min(axis=1) if dist.shape[1] else np.full(len(conv), np.inf)
    minmod = np.where(valid, mod, np.inf).min(axis=1) if dist.shape[1] else np.full(len(conv), np.inf)
    return BatchCounts(inside, near, margin, conv, minmod)


def winding_count(coeffs, radius: float = 1.0, samples: int = 64, max_samples: int = 1 << 20) -> int:
    """Zeros inside |z| = radius by the argument principle.

    The sample count doubles until every phase step is below pi/2 and two
    successive estimates agree.  Raises :class:`RootFindingError` when the
    cap is hit, which happens when a zero sits (nearly) on the circle.
    """
    a = np.asarray(coeffs, dtype=complex).ravel()
    nz = np.flatnonzero(a)
    if nz.size == 0:
        raise ValueError("the zero polynomial has no winding number")
    a = a[: nz[-1] + 1]
    if a.size == 1:
        return 0
    n = max(int(samples), 8)
    previous = None
    while n <= max_samples:
        theta = 2 * np.pi * np.arange(n + 1) / n
        vals = np.zeros(n + 1, dtype=complex)
        z = radius * np.exp(1j * theta)
        for c in a[::-1]:
            vals = vals * z + c
        if np.any(vals == 0):
            raise RootFindingError("polynomial vanishes on the contour")
        steps = np.angle(vals[1:] / vals[:-1])
        estimate = int(round(steps.sum() / (2 * np.pi)))
        if np.max(np.abs(steps)) < np.pi / 2 and estimate == previous:
            return estimate
        previous = estimate if np.max(np.abs(steps)) < np.pi / 2 else None
        n *= 2
    raise RootFindingError(f"winding refinement exceeded {max_samples} samples")
