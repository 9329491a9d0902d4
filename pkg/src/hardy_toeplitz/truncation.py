"""Finite sections of T_Phi, Cauchy kernels and backward-shift orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symbol import Symbol, TaylorVector, apply_symbol_series, as_coeffs, fourier_coefficient


@dataclass(frozen=True)
class ToeplitzTruncation:
    """Compression of T_Phi to span{1, z, ..., z^(M-1)}.

    ``A[j, k] = hat Phi(j - k)``: the antianalytic coefficients sit on the
    first N superdiagonals, the analytic ones on the diagonal and the first d
    subdiagonals.  Entries ``j < M - N`` of ``A f`` coincide with the
    coefficients of ``T_Phi f`` for any H^2 function whose first M
    coefficients are f.
    """

    symbol: Symbol
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("truncation size must be positive")

    @property
    def exact_rows(self) -> int:
        return max(self.M - self.symbol.N, 0)

    def _check(self, f) -> np.ndarray:
        f = as_coeffs(f)
        if f.size != self.M:
            raise ValueError(f"vector length {f.size} does not match truncation size {self.M}")
        return f

    def dense(self) -> np.ndarray:
        A = np.zeros((self.M, self.M), dtype=complex)
        for off in range(-self.symbol.N, self.symbol.d + 1):
            v = fourier_coefficient(self.symbol, off)
            if v != 0 and abs(off) < self.M:
                A += np.diag(np.full(self.M - abs(off), v), -off)
        return A

    def matvec(self, f) -> TaylorVector:
        f = self._check(f)
        M = self.M
        out = np.zeros(M, dtype=complex)
        for m, phi_m in enumerate(self.symbol.analytic):
            if phi_m != 0 and m < M:
                out[m:] += phi_m * f[: M - m]
        for k, c_k in enumerate(self.symbol.antianalytic, start=1):
            if k < M:
                out[: M - k] += c_k * f[k:]
        return TaylorVector(out)

    def adjoint_matvec(self, f) -> TaylorVector:
        """Product with A^H, the compression of T_{conj Phi}.

        Exact (as an action of the untruncated adjoint) on entries j < M - d.
        """
        f = self._check(f)
        M = self.M
        out = np.zeros(M, dtype=complex)
        for m, phi_m in enumerate(self.symbol.analytic):
            if phi_m != 0 and m < M:
                out[: M - m] += np.conj(phi_m) * f[m:]
        for k, c_k in enumerate(self.symbol.antianalytic, start=1):
            if k < M:
                out[k:] += np.conj(c_k) * f[: M - k]
        return TaylorVector(out)


def solve_truncated(T: ToeplitzTruncation, lam: complex, g) -> np.ndarray:
    """Dense solve of (A - lam I) f = g on the finite section."""
    rhs = np.zeros(T.M, dtype=complex)
    gc = as_coeffs(g)[: T.M]
    rhs[: gc.size] = gc
    return np.linalg.solve(T.dense() - lam * np.eye(T.M), rhs)


def cauchy_kernel_vector(lam: complex, M: int) -> TaylorVector:
    """Coefficients of k_lambda(z) = 1 / (1 - conj(lambda) z)."""
    lam = complex(lam)
    if abs(lam) >= 1:
        raise ValueError("the Cauchy kernel is only in H^2 for |lambda| < 1")
    return TaylorVector(np.conj(lam) ** np.arange(M))


@dataclass
class OrbitWitness:
    """A vector whose backward-shift orbit visits every target within epsilon."""

    gamma: complex
    targets: list[np.ndarray]
    block_positions: list[int]
    vector: TaylorVector
    checkpoint_errors: list[float]
    bounds: list[float]
    eps: float


def _degree(t: np.ndarray) -> int:
    nz = np.flatnonzero(t)
    return int(nz[-1]) if nz.size else 0


def orbit_block_positions(gamma: complex, targets, eps: float) -> tuple[list[int], list[float]]:
    """Block positions p_1 < ... < p_K and the tail bounds they guarantee.

    Blocks are disjoint (p_{j+1} > p_j + deg t_j) and each later block obeys
    |gamma|^(p_{j-1} - p_j) ||t_j|| <= eps / 2 with gaps of at least
    log 2 / log |gamma|, so that the tail error at checkpoint k is below
    eps * sum_i 2^-i < eps.  The bound at checkpoint k is that tail sum
    plus a rounding allowance linear in the number of shift steps.
    """
    g = abs(gamma)
    base_gap = math.ceil(math.log(2.0) / math.log(g))
    positions = [0]
    for j in range(1, len(targets)):
        norm = float(np.linalg.norm(targets[j]))
        need = 0 if norm == 0 else math.ceil(math.log(2 * norm / eps) / math.log(g))
        gap = max(_degree(targets[j - 1]) + 1, base_gap, need)
        positions.append(positions[-1] + gap)
    bounds = []
    unit = np.finfo(float).eps
    for k in range(len(targets)):
        tail = sum(g ** (positions[k] - positions[j]) * float(np.linalg.norm(targets[j]))
                   for j in range(k + 1, len(targets)))
        # floating-point allowance: one rounding per coefficient per shift step
        roundoff = 4 * unit * (positions[k] + 2) * (float(np.linalg.norm(targets[k])) + tail)
        bounds.append(float(tail + roundoff))
    return positions, bounds


def orbit_witness_shift(gamma: complex, targets, eps: float = 0.01) -> OrbitWitness:
    """Build f = sum_k gamma^(-p_k) z^(p_k) t_k and measure ||T^(p_k) f - t_k||
    for T = gamma S*, applying the exact series action step by step."""
    gamma = complex(gamma)
    if abs(gamma) <= 1:
        raise ValueError("orbit construction needs |gamma| > 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    targets = [as_coeffs(t) for t in targets]
    if not targets:
        raise ValueError("at least one target is required")
    positions, bounds = orbit_block_positions(gamma, targets, eps)
    length = positions[-1] + len(targets[-1])
    f = np.zeros(length, dtype=complex)
    for p, t in zip(positions, targets):
        f[p : p + t.size] += gamma ** (-p) * t
    shift = Symbol((gamma,))
    errors = []
    current = f.copy()
    step = 0
    for p, t in zip(positions, targets):
        while step < p:
            # f is a polynomial stored in full, so the series action is exact;
            # the last coefficient of the result is always zero.
            current = apply_symbol_series(shift, current).coeffs[:-1]
            step += 1
        diff = current.copy()
        diff[: t.size] -= t
        errors.append(float(np.linalg.norm(diff)))
    return OrbitWitness(gamma, targets, positions, TaylorVector(f), errors, bounds, eps)
