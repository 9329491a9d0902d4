"""Symbols Phi(z) = sum_k c_k z^-k + sum_m phi_m z^m and their action on H^2.

A symbol carries its antianalytic coefficients ``c_1..c_N`` (the pole part at
the origin) and the Taylor coefficients ``phi_0..phi_d`` of the analytic part.
Everything downstream is phrased in terms of the polynomial

    Psi_lambda(z) = z^N (Phi(z) - lambda)
                  = sum_k c_k z^(N-k) + z^N (phi(z) - lambda),

whose zeros in the unit disc are exactly the solutions of Phi(z) = lambda in
the punctured disc (Psi_lambda(0) = c_N is never zero).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapError, DomainError, LeadingCoefficientError, SymbolError

MAX_ANTIANALYTIC = 16
MAX_ANALYTIC_DEGREE = 64


def _as_complex_tuple(values: Iterable) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class Symbol:
    """Immutable symbol of a banded Toeplitz operator on H^2.

    ``antianalytic[k-1]`` is the coefficient of ``z^-k`` and ``analytic[m]``
    the coefficient of ``z^m``.  Trailing zeros of the analytic part are
    dropped; the analytic part always keeps at least ``phi_0``.
    """

    antianalytic: tuple[complex, ...]
    analytic: tuple[complex, ...] = (0j,)
    max_antianalytic: int = field(default=MAX_ANTIANALYTIC, repr=False, compare=False)
    max_analytic_degree: int = field(default=MAX_ANALYTIC_DEGREE, repr=False, compare=False)

    def __post_init__(self):
        anti = _as_complex_tuple(self.antianalytic)
        ana = list(_as_complex_tuple(self.analytic))
        if not anti:
            raise SymbolError("antianalytic part must have degree N >= 1")
        if anti[-1] == 0:
            raise LeadingCoefficientError(f"leading antianalytic coefficient c_{len(anti)} is zero")
        if not all(np.isfinite(v) for v in anti + tuple(ana)):
            raise SymbolError("symbol coefficients must be finite")
        while len(ana) > 1 and ana[-1] == 0:
            ana.pop()
        if not ana:
            ana = [0j]
        if len(anti) > self.max_antianalytic:
            raise CapError(f"N = {len(anti)} exceeds cap {self.max_antianalytic}")
        if len(ana) - 1 > self.max_analytic_degree:
            raise CapError(f"d = {len(ana) - 1} exceeds cap {self.max_analytic_degree}")
        object.__setattr__(self, "antianalytic", anti)
        object.__setattr__(self, "analytic", tuple(ana))

    @classmethod
    def tridiagonal(cls, a: complex, b: complex, c: complex) -> "Symbol":
        """The symbol a/z + b + c z."""
        return cls((a,), (b, c))

    @property
    def N(self) -> int:
        return len(self.antianalytic)

    @property
    def d(self) -> int:
        return len(self.analytic) - 1

    @property
    def c(self) -> np.ndarray:
        return np.array(self.antianalytic, dtype=complex)

    @property
    def phi(self) -> np.ndarray:
        return np.array(self.analytic, dtype=complex)

    def coefficient_l1(self) -> float:
        """sum |c_k| + sum |phi_m|, an upper bound for sup |Phi| on the circle."""
        return float(np.abs(self.c).sum() + np.abs(self.phi).sum())

    def lipschitz_on_circle(self) -> float:
        """Bound on |d/dtheta Phi(e^{i theta})|."""
        k = np.arange(1, self.N + 1)
        m = np.arange(self.d + 1)
        return float((k * np.abs(self.c)).sum() + (m * np.abs(self.phi)).sum())

    def rotated(self, theta: float, psi: float) -> "Symbol":
        """The symbol z -> e^{i theta} Phi(e^{i psi} z)."""
        rot = np.exp(1j * theta)
        k = np.arange(1, self.N + 1)
        m = np.arange(self.d + 1)
        return Symbol(
            rot * self.c * np.exp(-1j * k * psi),
            rot * self.phi * np.exp(1j * m * psi),
        )

    def to_json(self) -> dict:
        return {
            "antianalytic": [[v.real, v.imag] for v in self.antianalytic],
            "analytic": [[v.real, v.imag] for v in self.analytic],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Symbol":
        if not isinstance(payload, dict) or "antianalytic" not in payload:
            raise SymbolError("symbol JSON must be an object with an 'antianalytic' list")

        def pairs(key):
            out = []
            for item in payload.get(key, []) or []:
                if not isinstance(item, (list, tuple)) or len(item) != 2:
                    raise SymbolError(f"{key}: entries must be [re, im] pairs, got {item!r}")
                re, im = item
                if isinstance(re, bool) or isinstance(im, bool):
                    raise SymbolError(f"{key}: booleans are not coefficients")
                out.append(complex(float(re), float(im)))
            return out

        analytic = pairs("analytic") or [0j]
        return cls(tuple(pairs("antianalytic")), tuple(analytic))


def load_symbol(path: str | Path) -> Symbol:
    with open(path, encoding="utf-8") as fh:
        return Symbol.from_json(json.load(fh))


@dataclass(frozen=True)
class PinnedPolynomial:
    """Psi_lambda in ascending coefficient order."""

    lam: complex
    coeffs: np.ndarray

    def __call__(self, z):
        return polyval(self.coeffs, z)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0


@dataclass(frozen=True)
class TaylorVector:
    """Truncated H^2 element f_0..f_{M-1}."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).ravel()
        if arr.size < 1:
            raise ValueError("a TaylorVector needs at least one coefficient")
        object.__setattr__(self, "coeffs", arr)

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, z):
        return polyval(self.coeffs, z)


def as_coeffs(f) -> np.ndarray:
    if isinstance(f, TaylorVector):
        return f.coeffs
    return np.asarray(f, dtype=complex).ravel()


def polyval(coeffs: Sequence[complex], z):
    """Horner evaluation of an ascending coefficient list, vectorised in z."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    for a in np.asarray(coeffs, dtype=complex)[::-1]:
        out = out * z + a
    return out


def eval_symbol(s: Symbol, z):
    """Phi(z), with the pole part evaluated by Horner in 1/z."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("Phi has a pole at z = 0")
    u = 1.0 / z
    pole = polyval(s.c, u) * u
    out = pole + polyval(s.phi, z)
    return out[()] if out.ndim == 0 else out


def psi_coefficients(s: Symbol, lam) -> np.ndarray:
    """Coefficient rows of Psi_lambda; a 1-D array for scalar lambda, else shape (P, N+d+1)."""
    lam = np.asarray(lam, dtype=complex)
    base = np.concatenate([s.c[::-1], s.phi])
    if lam.ndim == 0:
        out = base.copy()
        out[s.N] -= lam
        return out
    out = np.tile(base, (lam.size, 1))
    out[:, s.N] -= lam.ravel()
    return out


def psi_polynomial(s: Symbol, lam: complex) -> PinnedPolynomial:
    lam = complex(lam)
    return PinnedPolynomial(lam, psi_coefficients(s, lam))


def fourier_coefficient(s: Symbol, m: int) -> complex:
    if 0 <= m <= s.d:
        return s.analytic[m]
    if -s.N <= m <= -1:
        return s.antianalytic[-m - 1]
    return 0j


def apply_symbol_series(s: Symbol, f) -> TaylorVector:
    """Taylor coefficients of T_Phi f for a truncated f.

    Output has length M + d with ``g_j = sum_k c_k f_{j+k} + sum_m phi_m f_{j-m}``
    where entries of f past M-1 read as zero.  The first M - N entries are the
    exact coefficients of T_Phi applied to any H^2 function whose first M
    coefficients are f; if f is a polynomial stored in full, all entries are
    exact.
    """
    f = as_coeffs(f)
    M, N, d = f.size, s.N, s.d
    g = np.zeros(M + d, dtype=complex)
    for m, phi_m in enumerate(s.analytic):
        if phi_m != 0:
            g[m : m + M] += phi_m * f
    for k, c_k in enumerate(s.antianalytic, start=1):
        if c_k != 0 and k < M:
            g[: M - k] += c_k * f[k:]
    return TaylorVector(g)


def exact_prefix_length(s: Symbol, M: int) -> int:
    return max(M - s.N, 0)


def circle_modulus_bounds(s: Symbol, samples: int = 1024) -> tuple[float, float, float]:
    """(min, max, slack) of |Phi| over the unit circle from equispaced samples.

    The true extrema lie within ``slack`` of the sampled ones (Lipschitz bound
    with half the sample spacing).
    """
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = np.abs(eval_symbol(s, np.exp(1j * theta)))
    slack = s.lipschitz_on_circle() * np.pi / samples
    return float(vals.min()), float(vals.max()), float(slack)
