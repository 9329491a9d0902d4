"""Valence of Phi over the disc and the spectral partition of the lambda-plane.

For a symbol of antianalytic degree N the number of solutions of Phi(z) = w in
the punctured disc is the number of zeros of Psi_w inside the unit circle.
The spectrum of T_Phi is the set of lambda where that count differs from N,
and lambda outside the closure of Phi(D) (no zero of Psi_lambda in the closed
disc) carries an N-dimensional eigenspace.

All quantifiers over w are realised by sampling; every result records which
points could not be resolved against the unit circle.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .polyroots import BOUNDARY_TOL, BatchCounts, CountResult, count_in_disc, count_rows, roots_rows
from .symbol import Symbol, circle_modulus_bounds, eval_symbol, psi_coefficients

# Roots this close to the circle (but not within BOUNDARY_TOL) make a
# closed-disc count ambiguous.
AMBIGUOUS_BAND = 1e-6


class SpectralClass(enum.Enum):
    RESOLVENT = "RESOLVENT"
    SPECTRUM_EIGEN_RICH = "SPECTRUM_EIGEN_RICH"
    SPECTRUM_OTHER = "SPECTRUM_OTHER"
    UNRESOLVED = "UNRESOLVED"


PGM_LEVEL = {
    SpectralClass.RESOLVENT: 255,
    SpectralClass.SPECTRUM_EIGEN_RICH: 0,
    SpectralClass.SPECTRUM_OTHER: 128,
    SpectralClass.UNRESOLVED: 64,
}
_CODES = list(SpectralClass)


@dataclass(frozen=True)
class SamplingPolicy:
    """Sampling densities and tolerances shared by the scans and the decider."""

    box_half_width: float | None = None
    grid_res: int = 64
    radii: tuple[float, ...] = (0.25, 0.5, 0.75, 0.875, 0.9375, 0.97, 0.985, 0.99, 0.995, 0.999)
    outer_radii: tuple[float, ...] = (1.001, 1.005, 1.01, 1.03, 1.1, 1.3)
    angles: int = 256
    delta: float = 0.05
    samples: int = 720
    circle_samples: int = 1024
    boundary_tol: float = BOUNDARY_TOL
    ambiguous_band: float = AMBIGUOUS_BAND

    def to_json(self) -> dict:
        out = asdict(self)
        out["radii"] = list(self.radii)
        out["outer_radii"] = list(self.outer_radii)
        return out


DEFAULT_POLICY = SamplingPolicy()


def default_half_width(s: Symbol, samples: int = 1024) -> float:
    """1 + 2 max |Phi| on the circle: the box contains Phi(T) and the unit circle."""
    _, hi, _ = circle_modulus_bounds(s, samples)
    return 1.0 + 2.0 * hi


def valence_at(s: Symbol, w: complex, boundary_tol: float = BOUNDARY_TOL) -> CountResult:
    """Solutions of Phi(z) = w in the punctured disc, counted with multiplicity."""
    return count_in_disc(psi_coefficients(s, complex(w)), 1.0, boundary_tol)


def valence_many(s: Symbol, ws, boundary_tol: float = BOUNDARY_TOL) -> BatchCounts:
    ws = np.asarray(ws, dtype=complex).ravel()
    return count_rows(psi_coefficients(s, ws), 1.0, boundary_tol)


def critical_points(s: Symbol) -> np.ndarray:
    """Zeros of z^(N+1) Phi'(z) (the critical points of Phi away from 0)."""
    N = s.N
    coeffs = np.zeros(N + s.d + 1, dtype=complex)
    for k in range(1, N + 1):
        coeffs[N - k] = -k * s.c[k - 1]
    for m in range(1, s.d + 1):
        coeffs[N + m] = m * s.phi[m]
    r, conv, _, deg = roots_rows(coeffs[None, :])
    out = r[0, : int(deg[0])]
    return out[~np.isnan(out)]


def _polar(radii, angles: int, offset: float = 0.0) -> np.ndarray:
    theta = 2 * np.pi * (np.arange(angles) + offset) / angles
    return (np.asarray(radii, dtype=float)[:, None] * np.exp(1j * theta)[None, :]).ravel()


def _grid(half_width: float, res: int) -> np.ndarray:
    x = -half_width + (np.arange(res) + 0.5) * (2 * half_width / res)
    return (x[None, :] + 1j * x[::-1, None]).ravel()


def _critical_neighbourhood(s: Symbol, closed: bool) -> np.ndarray:
    cps = critical_points(s)
    lim = 1.0 + 1e-12 if closed else 1.0
    cps = cps[(np.abs(cps) < lim) & (cps != 0)]
    if cps.size == 0:
        return np.empty(0, complex)
    ring = np.concatenate([[0.0], (1e-3 * np.exp(2j * np.pi * np.arange(8) / 8))])
    ring = np.concatenate([ring, 1e-2 * np.exp(2j * np.pi * (np.arange(8) + 0.5) / 8)])
    pts = (cps[:, None] + ring[None, :]).ravel()
    pts = pts[(pts != 0) & (np.abs(pts) <= (1.0 if closed else 1.0 - 1e-12))]
    return pts


@dataclass
class ValenceReport:
    """Sampled valence of Phi over the punctured disc."""

    N: int
    points: np.ndarray
    counts: BatchCounts
    max_count: int
    violation_witness: tuple[complex, int] | None
    unresolved_points: np.ndarray
    grid_spec: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return int(self.points.size)


def valence_scan(s: Symbol, policy: SamplingPolicy = DEFAULT_POLICY) -> ValenceReport:
    """Sample count(w) over a box grid and near the boundary curve Phi(T).

    Counts only change across Phi(T), so besides a uniform grid the scan uses
    images Phi(r e^{it}) of circles just inside and just outside the unit
    circle, the circles |w| = 1 +- delta, and neighbourhoods of critical values.
    """
    R = policy.box_half_width or default_half_width(s, policy.circle_samples)
    inner_z = _polar(policy.radii, policy.angles, 0.5)
    outer_z = _polar(policy.outer_radii, policy.angles, 0.25)
    pts = np.concatenate([
        _grid(R, policy.grid_res),
        eval_symbol(s, inner_z),
        eval_symbol(s, outer_z),
        _polar([1 - policy.delta, 1 + policy.delta], policy.samples),
        eval_symbol(s, _critical_neighbourhood(s, closed=False)) if s.d else np.empty(0, complex),
    ])
    counts = valence_many(s, pts, policy.boundary_tol)
    ok = counts.resolved
    max_count = int(counts.count[ok].max()) if ok.any() else 0
    witness = None
    if max_count > s.N:
        # most robust violating sample: largest margin among maximal counts
        cand = np.flatnonzero(ok & (counts.count == max_count))
        best = cand[np.argmax(counts.margin[cand])]
        witness = (complex(pts[best]), max_count)
    spec = {
        "half_width": R,
        "grid_res": policy.grid_res,
        "radii": list(policy.radii),
        "outer_radii": list(policy.outer_radii),
        "angles": policy.angles,
        "n_points": int(pts.size),
    }
    return ValenceReport(s.N, pts, counts, max_count, witness, pts[~ok], spec)


@dataclass
class ClosedValenceResult:
    """Outcome of the exact-N-valence check on the closed punctured disc.

    ``holds`` is True, False (with ``witness``) or None when ambiguous
    samples prevent a verdict.
    """

    holds: bool | None
    witness: tuple[complex, int] | None
    n_samples: int
    n_unresolved: int
    worst_margin: float

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "witness": None if self.witness is None else {
                "w": [self.witness[0].real, self.witness[0].imag], "closed_count": self.witness[1]},
            "n_samples": self.n_samples,
            "n_unresolved": self.n_unresolved,
        }


def closed_disc_counts(s: Symbol, ws, policy: SamplingPolicy = DEFAULT_POLICY):
    """(closed-disc zero counts of Psi_w, ambiguity mask) for each w."""
    ws = np.asarray(ws, dtype=complex).ravel()
    r, conv, _, _ = roots_rows(psi_coefficients(s, ws))
    mod = np.abs(r)
    valid = ~np.isnan(mod)
    excess = np.where(valid, mod - 1.0, np.inf)
    closed = np.sum(valid & (excess <= policy.boundary_tol), axis=1)
    ambiguous = np.any(valid & (excess > policy.boundary_tol) & (excess < policy.ambiguous_band), axis=1)
    ambiguous |= ~conv
    return closed, ambiguous, excess


def closed_disc_exact_valence(s: Symbol, policy: SamplingPolicy = DEFAULT_POLICY) -> ClosedValenceResult:
    """Check that every sampled w in Phi(closed disc minus 0) has exactly N
    preimages in the closed punctured disc."""
    radii = tuple(sorted(set((0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9) + tuple(policy.radii) + (1.0,))))
    z = np.concatenate([_polar(radii, policy.angles), _critical_neighbourhood(s, closed=True)])
    ws = eval_symbol(s, z)
    closed, ambiguous, excess = closed_disc_counts(s, ws, policy)
    bad = ~ambiguous & (closed != s.N)
    witness = None
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        witness = (complex(ws[i]), int(closed[i]))
        holds = False
    elif ambiguous.any():
        holds = None
    else:
        holds = True
    outside = np.where(excess > policy.boundary_tol, excess, np.inf)
    worst = float(outside.min()) if outside.size else np.inf
    return ClosedValenceResult(holds, witness, int(ws.size), int(ambiguous.sum()), worst)


@dataclass(frozen=True)
class SpectralClassification:
    cls: SpectralClass
    inside_count: int
    closed_disc_count: int
    margin: float


def _classify_codes(counts: BatchCounts, N: int) -> np.ndarray:
    inside, near = counts.inside, counts.near
    codes = np.full(inside.shape, _CODES.index(SpectralClass.UNRESOLVED), dtype=np.int8)
    clean = counts.converged & (near == 0)
    codes[clean & (inside == N)] = _CODES.index(SpectralClass.RESOLVENT)
    codes[clean & (inside == 0)] = _CODES.index(SpectralClass.SPECTRUM_EIGEN_RICH)
    codes[clean & (inside > 0) & (inside < N)] = _CODES.index(SpectralClass.SPECTRUM_OTHER)
    # roots on the circle, but too few zeros in the closed disc to ever reach N
    codes[counts.converged & (near > 0) & (inside + near < N)] = _CODES.index(SpectralClass.SPECTRUM_OTHER)
    return codes


def classify_many(s: Symbol, lams, boundary_tol: float = BOUNDARY_TOL) -> list[SpectralClass]:
    counts = valence_many(s, lams, boundary_tol)
    return [_CODES[c] for c in _classify_codes(counts, s.N)]


def classify_lambda(s: Symbol, lam: complex, boundary_tol: float = BOUNDARY_TOL) -> SpectralClassification:
    counts = valence_many(s, [lam], boundary_tol)
    code = _classify_codes(counts, s.N)[0]
    return SpectralClassification(
        _CODES[code],
        int(counts.inside[0]),
        int(counts.inside[0] + counts.near[0]),
        float(counts.margin[0]),
    )


@dataclass
class Portrait:
    """Per-pixel spectral classes; row 0 is the top (largest imaginary part)."""

    box: tuple[float, float, float, float]
    res: int
    codes: np.ndarray

    def classes(self) -> np.ndarray:
        return np.array(_CODES, dtype=object)[self.codes]

    def pixel_centres(self) -> np.ndarray:
        return _pixel_centres(self.box, self.res)

    def levels(self) -> np.ndarray:
        lut = np.array([PGM_LEVEL[c] for c in _CODES], dtype=np.uint8)
        return lut[self.codes]

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.res} {self.res}\n255\n".encode("ascii")
        return header + self.levels().tobytes()

    def counts_by_class(self) -> dict[str, int]:
        return {c.value: int(np.sum(self.codes == i)) for i, c in enumerate(_CODES)}


def _pixel_centres(box, res: int) -> np.ndarray:
    xmin, xmax, ymin, ymax = box
    x = xmin + (np.arange(res) + 0.5) * (xmax - xmin) / res
    y = ymax - (np.arange(res) + 0.5) * (ymax - ymin) / res
    return x[None, :] + 1j * y[:, None]


def spectral_portrait(s: Symbol, box, res: int, workers: int = 1,
                      boundary_tol: float = BOUNDARY_TOL) -> Portrait:
    """Classify every pixel centre of ``box = (re_min, re_max, im_min, im_max)``.

    Rows are the unit of work whatever the worker count, and each polynomial
    is solved independently, so the output is identical for any ``workers``.
    """
    if res < 1 or res > 4096:
        raise ValueError("res must be in [1, 4096]")
    box = tuple(float(v) for v in box)
    centres = _pixel_centres(box, res)
    codes = np.empty((res, res), dtype=np.int8)

    def row(i):
        codes[i] = _classify_codes(valence_many(s, centres[i], boundary_tol), s.N)

    if workers <= 1:
        for i in range(res):
            row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(res)))
    return Portrait(box, res, codes)


def square_box(half_width: float, centre: complex = 0j) -> tuple[float, float, float, float]:
    c = complex(centre)
    return (c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width)


@dataclass
class ConditionWitnesses:
    """Sampled witnesses for the complement conditions.

    Strong witnesses (count 0, margin-resolved) certify points of the open
    disc / exterior outside the closure of Phi(D); weak ones (count < N)
    certify points of the spectrum in the closed disc / exterior.
    """

    w_in: complex | None
    w_out: complex | None
    w_in_weak: complex | None
    w_out_weak: complex | None
    n_inside_samples: int
    n_outside_samples: int
    unresolved_inside: int
    unresolved_outside: int
    delta: float
    samples: int

    def to_json(self) -> dict:
        def enc(w):
            return None if w is None else [w.real, w.imag]

        return {
            "w_in": enc(self.w_in),
            "w_out": enc(self.w_out),
            "w_in_weak": enc(self.w_in_weak),
            "w_out_weak": enc(self.w_out_weak),
            "n_inside_samples": self.n_inside_samples,
            "n_outside_samples": self.n_outside_samples,
            "unresolved_inside": self.unresolved_inside,
            "unresolved_outside": self.unresolved_outside,
            "delta": self.delta,
            "samples": self.samples,
        }


def _pick(pts, mask, margin):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return None
    return complex(pts[idx[np.argmax(margin[idx])]])


def condition_witnesses(s: Symbol, delta: float | None = None, samples: int | None = None,
                        policy: SamplingPolicy = DEFAULT_POLICY) -> ConditionWitnesses:
    delta = policy.delta if delta is None else delta
    samples = policy.samples if samples is None else samples
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    R = policy.box_half_width or default_half_width(s, policy.circle_samples)
    near_curve = np.concatenate([
        eval_symbol(s, _polar(policy.outer_radii, policy.angles, 0.25)),
        eval_symbol(s, _polar(policy.radii[-4:], policy.angles, 0.5)),
    ])
    disc_grid = _polar(np.linspace(0.0, 1.0, 17)[1:-1], policy.angles // 2)
    inside_pts = np.concatenate([
        [0j],
        _polar([1 - delta], samples),
        disc_grid,
        near_curve[np.abs(near_curve) < 1],
    ])
    grid = _grid(R, policy.grid_res)
    outside_pts = np.concatenate([
        _polar([1 + delta], samples),
        grid[np.abs(grid) > 1],
        near_curve[np.abs(near_curve) > 1],
    ])
    closed_pts = np.concatenate([inside_pts, _polar([1.0], samples)])

    cin = valence_many(s, closed_pts, policy.boundary_tol)
    cout = valence_many(s, outside_pts, policy.boundary_tol)
    ok_in, ok_out = cin.resolved, cout.resolved
    open_mask = np.abs(closed_pts) < 1
    return ConditionWitnesses(
        w_in=_pick(closed_pts, ok_in & open_mask & (cin.count == 0), cin.margin),
        w_out=_pick(outside_pts, ok_out & (cout.count == 0), cout.margin),
        w_in_weak=_pick(closed_pts, ok_in & (cin.count < s.N), cin.margin),
        w_out_weak=_pick(outside_pts, ok_out & (cout.count < s.N), cout.margin),
        n_inside_samples=int(closed_pts.size),
        n_outside_samples=int(outside_pts.size),
        unresolved_inside=int((~ok_in).sum()),
        unresolved_outside=int((~ok_out).sum()),
        delta=delta,
        samples=samples,
    )
