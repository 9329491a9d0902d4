"""Closed-form eigenvectors, resolvents and related constructions for T_Phi.

* Eigenvectors for lambda off the closure of Phi(D): f = q / Psi_lambda with
  deg q < N.
* Resolvent for lambda with exactly N zeros of Psi_lambda in D:
  f = (z^N g + q) / Psi_lambda, q the Hermite interpolant that cancels those
  zeros.
* Adjoint eigenvector from N+1 distinct solutions of Phi(z) = mu in D, built
  from Cauchy kernels.
* Decomposition f(z) = sum_j z^j f_j(h(z)) with h = 1/(Phi - lambda_0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import PreconditionError
from .polyroots import BOUNDARY_TOL, CLUSTER_TOL, roots, roots_rows
from .symbol import Symbol, TaylorVector, apply_symbol_series, as_coeffs, psi_coefficients
from .truncation import ToeplitzTruncation
from .valence import AMBIGUOUS_BAND

EIGEN_MARGIN = 1e-6
TAIL_TOL = 1e-12
MAX_SERIES = 1 << 17


def series_quotient(num, den, M: int) -> np.ndarray:
    """First M Taylor coefficients of num/den (den(0) != 0)."""
    num = as_coeffs(num)
    den = as_coeffs(den)
    nz = np.flatnonzero(den)
    den = den[: nz[-1] + 1]
    if den[0] == 0:
        raise ZeroDivisionError("denominator vanishes at the origin")
    impulse = np.zeros(M, dtype=complex)
    impulse[0] = 1.0
    return lfilter(num, den, impulse)


def deflate(coeffs, root: complex) -> tuple[np.ndarray, complex]:
    """Divide by (z - root) with top-down synthetic division; returns (quotient, remainder).

    Stable for |root| <= 1.
    """
    a = as_coeffs(coeffs)
    n = a.size - 1
    if n < 1:
        return np.zeros(1, dtype=complex), complex(a[0]) if a.size else 0j
    q = np.zeros(n, dtype=complex)
    acc = a[n]
    for k in range(n - 1, -1, -1):
        q[k] = acc
        acc = a[k] + root * acc
    return q, complex(acc)


def tail_length(decay_rate: float, extra: int = 0, tol: float = TAIL_TOL) -> int:
    """Smallest M with decay_rate^M <= tol, plus ``extra``."""
    if decay_rate <= 0:
        return max(extra, 1)
    if decay_rate >= 1:
        raise ValueError("series does not decay")
    return min(int(math.ceil(math.log(tol) / math.log(decay_rate))) + extra, MAX_SERIES)


def _prefix_residual(s: Symbol, f: np.ndarray, lam: complex, g: np.ndarray | None = None) -> np.ndarray:
    M = f.size
    n = max(M - s.N, 0)
    Tf = apply_symbol_series(s, f).coeffs[:n]
    r = Tf - lam * f[:n]
    if g is not None:
        gg = np.zeros(n, dtype=complex)
        m = min(n, g.size)
        gg[:m] = g[:m]
        r = r - gg
    return r


@dataclass(frozen=True)
class RationalEigenvector:
    lam: complex
    q_coeffs: np.ndarray
    series: TaylorVector
    decay_rate: float
    residual: float
    tail_estimate: float

    @property
    def M(self) -> int:
        return len(self.series)


def eigenvector(s: Symbol, lam: complex, q_coeffs=(1.0,), M: int | None = None,
                margin: float = EIGEN_MARGIN) -> RationalEigenvector:
    """Eigenvector q/Psi_lambda of T_Phi for lambda off the closure of Phi(D)."""
    lam = complex(lam)
    q = as_coeffs(q_coeffs)
    if q.size > s.N:
        raise PreconditionError(f"numerator degree {q.size - 1} exceeds N - 1 = {s.N - 1}")
    if not np.any(q != 0):
        raise PreconditionError("numerator polynomial is identically zero")
    psi = psi_coefficients(s, lam)
    rs = roots(psi).roots
    if rs.size:
        k = int(np.argmin(np.abs(rs)))
        if abs(rs[k]) < 1 + margin:
            raise PreconditionError(
                f"Psi_lambda has a zero at {rs[k]:.6g} (|z| = {abs(rs[k]):.6g}) inside or near the closed disc",
                root=complex(rs[k]))
        decay = 1.0 / float(np.abs(rs).min())
    else:
        decay = 0.0
    if M is None:
        M = tail_length(decay, extra=s.N + q.size + 1)
        M = max(M, 2 * s.N + q.size + 1)
    f = series_quotient(q, psi, M)
    nf = np.linalg.norm(f)
    res = float(np.linalg.norm(_prefix_residual(s, f, lam)) / nf)
    tail = float(abs(f[-1]) / math.sqrt(max(1 - decay**2, 1e-300))) if decay else 0.0
    return RationalEigenvector(lam, q, TaylorVector(f), decay, res, tail)


def _hermite_interpolant(nodes: list[tuple[complex, int]], fun_coeffs: np.ndarray) -> tuple[np.ndarray, float]:
    """Polynomial of degree < sum(mult) matching the polynomial ``fun_coeffs``
    and its derivatives at the clustered nodes; returns (coeffs, condition)."""
    xs: list[complex] = []
    for z, m in nodes:
        xs.extend([z] * m)
    n = len(xs)
    derivs = {}
    for z, m in nodes:
        c = fun_coeffs.copy()
        vals = []
        for k in range(m):
            vals.append(np.polynomial.polynomial.polyval(z, c) / math.factorial(k))
            c = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1, complex)
        derivs[z] = vals
    table = np.array([derivs[x][0] for x in xs], dtype=complex)
    newton = [table[0]]
    col = table.copy()
    for k in range(1, n):
        nxt = np.empty(n - k, dtype=complex)
        for i in range(n - k):
            if xs[i + k] == xs[i]:
                nxt[i] = derivs[xs[i]][k]
            else:
                nxt[i] = (col[i + 1] - col[i]) / (xs[i + k] - xs[i])
        col = nxt
        newton.append(col[0])
    # Newton form to monomial coefficients
    out = np.zeros(n, dtype=complex)
    out[0] = newton[-1]
    deg = 0
    for k in range(n - 2, -1, -1):
        shifted = np.zeros(n, dtype=complex)
        shifted[1 : deg + 2] = out[: deg + 1]
        out = shifted - xs[k] * out
        out[0] += newton[k]
        deg += 1
    # confluent Vandermonde condition number
    V = np.zeros((n, n), dtype=complex)
    row = 0
    for z, m in nodes:
        for k in range(m):
            for j in range(k, n):
                V[row, j] = math.comb(j, k) * z ** (j - k)
            row += 1
    cond = float(np.linalg.cond(V)) if n else 1.0
    return out, cond


@dataclass(frozen=True)
class ResolventSolution:
    lam: complex
    f: TaylorVector
    q_coeffs: np.ndarray
    residual: float
    numerator_error: float
    condition: float
    interior_nodes: list

    @property
    def M(self) -> int:
        return len(self.f)


def resolvent_solve(s: Symbol, lam: complex, g, M: int = 512,
                    boundary_tol: float = BOUNDARY_TOL, cluster_tol: float = CLUSTER_TOL) -> ResolventSolution:
    """Solve T_Phi f - lambda f = g for a polynomial g and lambda in Phi(D, N)."""
    lam = complex(lam)
    g = as_coeffs(g)
    N = s.N
    psi = psi_coefficients(s, lam)
    rset = roots(psi, cluster_tol=cluster_tol)
    mod = np.abs(rset.roots)
    if mod.size and np.min(np.abs(mod - 1)) < boundary_tol:
        raise PreconditionError("a zero of Psi_lambda lies on the unit circle; lambda is not resolved")
    inside = rset.roots[mod < 1]
    if inside.size != N:
        raise PreconditionError(
            f"lambda is not a resolvent point: Psi_lambda has {inside.size} zeros in D, expected {N}",
            inside=inside)
    nodes = [c for c in rset.clusters if abs(c[0]) < 1]
    # F(z) = -z^N g(z); q interpolates F at the interior zeros
    F = -np.concatenate([np.zeros(N, dtype=complex), g])
    q, cond = _hermite_interpolant(nodes, F)
    P = np.concatenate([np.zeros(N, dtype=complex), g])
    P[: q.size] += q
    C = psi.copy()
    for z, m in nodes:
        for _ in range(m):
            P, _ = deflate(P, z)
            C, _ = deflate(C, z)
    f = series_quotient(P, C, M)
    res_vec = _prefix_residual(s, f, lam, g)
    gnorm = np.linalg.norm(g)
    residual = float(np.linalg.norm(res_vec) / (gnorm if gnorm > 0 else 1.0))
    q_rec = numerator_from_series(s, f)
    num_err = float(np.max(np.abs(q_rec - q)) / max(1.0, float(np.max(np.abs(q)))))
    return ResolventSolution(lam, TaylorVector(f), q, residual, num_err, cond, nodes)


def numerator_from_series(s: Symbol, f) -> np.ndarray:
    """q(z) = sum_k c_k sum_{j<k} f_j z^(N-k+j), read off the Taylor coefficients of f."""
    f = as_coeffs(f)
    N = s.N
    out = np.zeros(N, dtype=complex)
    for k in range(1, N + 1):
        for j in range(k):
            if j < f.size:
                out[N - k + j] += s.c[k - 1] * f[j]
    return out


@dataclass(frozen=True)
class AdjointEigenData:
    mu: complex
    nodes: np.ndarray
    weights: np.ndarray
    vector: TaylorVector
    residual: float
    nullspace_residual: float
    tail_bound: float
    system: np.ndarray


def overvalence_system(s: Symbol, nodes) -> np.ndarray:
    """N x (N+1) matrix whose column j holds the coefficients of
    (pbar(z) - pbar(1/conj z_j)) / (1 - conj(z_j) z), pbar(z) = sum conj(c_k) z^k."""
    nodes = np.asarray(nodes, dtype=complex)
    N = s.N
    cbar = np.conj(s.c)
    a = 1.0 / np.conj(nodes)
    A = np.zeros((N, nodes.size), dtype=complex)
    for i in range(N):
        for k in range(i + 1, N + 1):
            A[i] -= cbar[k - 1] * a ** (k - i)
    return A


def adjoint_overvalence_eigenvector(s: Symbol, mu: complex, M: int = 256,
                                    boundary_tol: float = BOUNDARY_TOL,
                                    min_separation: float = 1e-6) -> AdjointEigenData:
    """Eigenvector of T_Phi^* with eigenvalue conj(mu) when Phi = mu has N+1
    distinct solutions in D."""
    mu = complex(mu)
    N = s.N
    rset = roots(psi_coefficients(s, mu))
    simple = [z for z, m in rset.clusters if m == 1 and abs(z) < 1 - boundary_tol]
    simple.sort(key=lambda z: (abs(z), np.angle(z)))
    chosen: list[complex] = []
    for z in simple:
        if all(abs(z - w) >= min_separation for w in chosen):
            chosen.append(z)
        if len(chosen) == N + 1:
            break
    if len(chosen) < N + 1:
        raise PreconditionError(
            f"Phi(z) = mu has {len(chosen)} distinct well-separated solutions in D; need N + 1 = {N + 1}",
            found=chosen)
    nodes = np.array(chosen, dtype=complex)
    A = overvalence_system(s, nodes)
    # columns scaled by conj(z_j)^N keep entries bounded for small |z_j|
    scale = np.conj(nodes) ** N
    _, sv, vh = np.linalg.svd(A * scale[None, :])
    beta = np.conj(vh[-1])
    alpha = beta * scale
    alpha /= np.linalg.norm(alpha)
    null_res = float(np.linalg.norm(A @ alpha) / max(np.linalg.norm(A), 1e-300))
    n = np.arange(M)
    vec = (alpha[None, :] * np.conj(nodes)[None, :] ** n[:, None]).sum(axis=1)
    T = ToeplitzTruncation(s, M)
    exact = max(M - s.d, 0)
    r = (T.adjoint_matvec(vec).coeffs - np.conj(mu) * vec)[:exact]
    residual = float(np.linalg.norm(r) / np.linalg.norm(vec))
    rho = np.abs(nodes)
    tail = float(np.sum(np.abs(alpha) * rho**M / np.sqrt(1 - rho**2)))
    return AdjointEigenData(mu, nodes, alpha, TaylorVector(vec), residual, null_res, tail, A)


@dataclass
class BranchComponents:
    lambda0: complex
    w_grid: np.ndarray
    values: np.ndarray          # (len(w_grid), N); nan where unresolved
    resolved: np.ndarray
    preimages: np.ndarray       # (len(w_grid), N); nan where unresolved
    condition: float


def h_preimages(s: Symbol, lambda0: complex, w_grid, boundary_tol: float = BOUNDARY_TOL,
                separation: float = CLUSTER_TOL):
    """Preimages in the closed disc of h(z) = 1/(Phi(z) - lambda0) = w, as
    zeros of w Psi_{lambda0}(z) - z^N.  Returns (preimages (P, N), resolved)."""
    w_grid = np.asarray(w_grid, dtype=complex).ravel()
    N = s.N
    psi = psi_coefficients(s, lambda0)
    rows = w_grid[:, None] * psi[None, :]
    rows[:, N] -= 1.0
    r, conv, _, _ = roots_rows(rows)
    mod = np.abs(r)
    valid = ~np.isnan(mod)
    excess = np.where(valid, mod - 1.0, np.inf)
    inside = valid & (excess <= boundary_tol)
    ambiguous = np.any(valid & (excess > boundary_tol) & (excess < AMBIGUOUS_BAND), axis=1)
    pre = np.full((w_grid.size, N), np.nan + 0j)
    ok = conv & ~ambiguous & (inside.sum(axis=1) == N)
    for i in np.flatnonzero(ok):
        z = r[i][inside[i]]
        z = z[np.lexsort((np.angle(z), np.abs(z)))]
        d = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(d, np.inf)
        if N > 1 and d.min() < separation:
            ok[i] = False
            continue
        pre[i] = z
    return pre, ok


def branch_decomposition(s: Symbol, lambda0: complex, f, w_grid, permute_seed: int | None = None) -> BranchComponents:
    """Solve f(z_l) = sum_j z_l^j f_j(w) over the N preimages z_l of each w.

    ``permute_seed`` shuffles the preimage order before solving (used to check
    that the components do not depend on it).
    """
    from .valence import SpectralClass, classify_lambda

    lambda0 = complex(lambda0)
    if classify_lambda(s, lambda0).cls is not SpectralClass.SPECTRUM_EIGEN_RICH:
        raise PreconditionError("lambda0 must lie off the closure of Phi(D)")
    fc = as_coeffs(f)
    N = s.N
    w_grid = np.asarray(w_grid, dtype=complex).ravel()
    pre, ok = h_preimages(s, lambda0, w_grid)
    values = np.full((w_grid.size, N), np.nan + 0j)
    rng = np.random.default_rng(permute_seed) if permute_seed is not None else None
    worst = 1.0
    for i in np.flatnonzero(ok):
        z = pre[i]
        if rng is not None:
            z = z[rng.permutation(N)]
        V = z[:, None] ** np.arange(N)[None, :]
        values[i] = np.linalg.solve(V, np.polynomial.polynomial.polyval(z, fc))
        worst = max(worst, float(np.linalg.cond(V)))
    return BranchComponents(lambda0, w_grid, values, ok, pre, worst)


@dataclass
class BranchFit:
    lambda0: complex
    scale: float
    coeffs: np.ndarray          # (N, degree+1) in the scaled variable w/scale
    degree: int

    def evaluate(self, s: Symbol, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        psi = psi_coefficients(s, self.lambda0)
        h = z ** s.N / np.polynomial.polynomial.polyval(z, psi)
        out = np.zeros_like(z)
        for j in range(s.N):
            out += z**j * np.polynomial.polynomial.polyval(h / self.scale, self.coeffs[j])
        return out


def fit_branch_components(bc: BranchComponents, degree: int = 12) -> BranchFit:
    """Least-squares polynomial fit of every component f_j over the resolved grid."""
    w = bc.w_grid[bc.resolved]
    scale = float(np.max(np.abs(w))) or 1.0
    V = (w / scale)[:, None] ** np.arange(degree + 1)[None, :]
    coeffs = np.linalg.lstsq(V, bc.values[bc.resolved], rcond=None)[0].T
    return BranchFit(bc.lambda0, scale, coeffs, degree)
