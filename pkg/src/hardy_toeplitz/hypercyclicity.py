"""Three-valued hypercyclicity decisions for T_Phi.

Necessity routes (each yields NOT_HYPERCYCLIC only with a re-checkable
witness or certificate):

* a resolved sample w with more than N solutions of Phi(z) = w in D (then
  the adjoint has an eigenvector);
* sup |Phi| <= 1 on the circle, certified from samples plus a Lipschitz
  bound (or the coefficient l1 norm), so that ||T_Phi|| <= 1;
* min |Phi| > 1 on the circle with N solutions at w = 0: the count is then
  constant on the closed disc, which therefore misses the spectrum.

Sufficiency: exact N-valence on the closed punctured disc plus resolved
points outside the closure of Phi(D) both inside and outside the unit circle.
Anything else is UNDECIDED.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .eigensystem import eigenvector
from .errors import PreconditionError
from .polyroots import BOUNDARY_TOL, winding_count
from .symbol import Symbol, circle_modulus_bounds
from .valence import (
    DEFAULT_POLICY,
    SamplingPolicy,
    SpectralClass,
    classify_many,
    closed_disc_exact_valence,
    condition_witnesses,
    valence_at,
    valence_scan,
)


class Status(str, enum.Enum):
    HYPERCYCLIC = "HYPERCYCLIC"
    NOT_HYPERCYCLIC = "NOT_HYPERCYCLIC"
    UNDECIDED = "UNDECIDED"


def _cplx(w: complex | None):
    return None if w is None else [float(w.real), float(w.imag)]


@dataclass
class Verdict:
    status: Status
    reasons: list[dict] = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    policy: dict = field(default_factory=dict)

    @property
    def definitive(self) -> bool:
        return self.status is not Status.UNDECIDED

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "reasons": self.reasons,
            "witnesses": self.witnesses,
            "policy": self.policy,
        }


def decide(s: Symbol, policy: SamplingPolicy = DEFAULT_POLICY) -> Verdict:
    reasons: list[dict] = []
    witnesses: dict = {}
    pol = policy.to_json()

    scan = valence_scan(s, policy)
    witnesses["valence"] = {
        "N": s.N,
        "max_count": scan.max_count,
        "n_points": scan.n_points,
        "n_unresolved": int(scan.unresolved_points.size),
    }
    if scan.violation_witness is not None:
        w, k = scan.violation_witness
        reasons.append({"kind": "valence_violation", "w": _cplx(w), "count": k})
        return Verdict(Status.NOT_HYPERCYCLIC, reasons, witnesses, pol)

    lo, hi, slack = circle_modulus_bounds(s, policy.circle_samples)
    sup_bound = min(hi + slack, s.coefficient_l1())
    witnesses["circle_modulus"] = {"min": lo, "max": hi, "slack": slack, "sup_bound": sup_bound}
    if sup_bound <= 1.0:
        reasons.append({"kind": "norm_bound_violation", "sup_bound": sup_bound})
        return Verdict(Status.NOT_HYPERCYCLIC, reasons, witnesses, pol)
    if lo - slack > 1.0:
        at_zero = valence_at(s, 0j, policy.boundary_tol)
        if at_zero.resolved and at_zero.count == s.N:
            reasons.append({"kind": "condition_b_failure", "side": "inside", "certified": True,
                            "inf_bound": lo - slack, "count_at_0": at_zero.count})
            return Verdict(Status.NOT_HYPERCYCLIC, reasons, witnesses, pol)

    cw = condition_witnesses(s, policy=policy)
    cv = closed_disc_exact_valence(s, policy)
    witnesses["conditions"] = cw.to_json()
    witnesses["closed_valence"] = cv.to_json()

    if cv.holds and cw.w_in is not None and cw.w_out is not None:
        reasons.append({
            "kind": "sufficient_conditions_met",
            "closed_valence_samples": cv.n_samples,
            "w_in": _cplx(cw.w_in),
            "w_out": _cplx(cw.w_out),
        })
        return Verdict(Status.HYPERCYCLIC, reasons, witnesses, pol)

    if cw.w_in_weak is None:
        reasons.append({"kind": "condition_b_failure", "side": "inside", "certified": False})
    if cw.w_out_weak is None:
        reasons.append({"kind": "condition_b_failure", "side": "outside", "certified": False})
    if cv.holds is False:
        reasons.append({"kind": "closed_valence_failure", "w": _cplx(cv.witness[0]),
                        "closed_count": cv.witness[1]})
    elif cv.holds is None:
        reasons.append({"kind": "closed_valence_unresolved", "n_unresolved": cv.n_unresolved})
    if cw.w_in is None and cw.w_in_weak is not None:
        reasons.append({"kind": "interior_gap", "w_in_weak": _cplx(cw.w_in_weak)})
    if cw.w_out is None and cw.w_out_weak is not None:
        reasons.append({"kind": "exterior_gap", "w_out_weak": _cplx(cw.w_out_weak)})
    return Verdict(Status.UNDECIDED, reasons, witnesses, pol)


def _curve_extremes(a: complex, b: complex, c: complex, samples: int = 4096) -> tuple[float, float]:
    """min and max of |b + a e^{-it} + c e^{it}| over t."""

    def mod(t):
        return abs(b + a * np.exp(-1j * t) + c * np.exp(1j * t))

    t = 2 * np.pi * np.arange(samples) / samples
    vals = np.abs(b + a * np.exp(-1j * t) + c * np.exp(1j * t))
    h = 2 * np.pi / samples
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))
    rmin = minimize_scalar(mod, bounds=(t[i_min] - h, t[i_min] + h), method="bounded",
                           options={"xatol": 1e-13})
    rmax = minimize_scalar(lambda x: -mod(x), bounds=(t[i_max] - h, t[i_max] + h), method="bounded",
                           options={"xatol": 1e-13})
    return min(float(rmin.fun), float(vals[i_min])), max(float(-rmax.fun), float(vals[i_max]))


def shkarin_oracle(a: complex, b: complex, c: complex, tol: float = BOUNDARY_TOL) -> Verdict:
    """Closed-form decision for the tridiagonal symbol a/z + b + c z.

    Hypercyclic iff |a| > |c| and the filled ellipse E bounded by
    t -> b + a e^{-it} + c e^{it} meets both the open disc and the exterior.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if a == 0:
        raise ValueError("a must be nonzero (antianalytic degree exactly 1)")
    pol = {"tol": tol}
    wit = {"a": _cplx(a), "b": _cplx(b), "c": _cplx(c), "abs_a": abs(a), "abs_c": abs(c)}
    if abs(a) <= abs(c):
        kind = "normal_operator" if abs(a) == abs(c) else "univalence_failure"
        return Verdict(Status.NOT_HYPERCYCLIC, [{"kind": kind}], wit, pol)
    cmin, cmax = _curve_extremes(a, b, c)
    # e^{it} w(t) = a + b e^{it} + c e^{2it}: the curve winds around 0 once
    # (clockwise) exactly when that quadratic has no zeros in the disc.
    if cmin >= tol:
        zero_in_E = winding_count([a, b, c], 1.0) == 0
    else:
        zero_in_E = True
    emin = 0.0 if zero_in_E else cmin
    emax = cmax
    wit.update({"min_abs_E": emin, "max_abs_E": emax, "semi_axes": [abs(a) + abs(c), abs(a) - abs(c)]})
    inside_res = abs(emin - 1) >= tol
    outside_res = abs(emax - 1) >= tol
    inside_ok = emin < 1
    outside_ok = emax > 1
    reasons = []
    if inside_res and not inside_ok:
        reasons.append({"kind": "condition_b_failure", "side": "inside"})
    if outside_res and not outside_ok:
        reasons.append({"kind": "condition_b_failure", "side": "outside"})
    if reasons:
        return Verdict(Status.NOT_HYPERCYCLIC, reasons, wit, pol)
    if inside_res and outside_res:
        return Verdict(Status.HYPERCYCLIC, [{"kind": "sufficient_conditions_met"}], wit, pol)
    return Verdict(Status.UNDECIDED, [{"kind": "boundary_unresolved"}], wit, pol)


def _radical_inverse(i: int, base: int) -> float:
    out, f = 0.0, 1.0 / base
    while i:
        out += f * (i % base)
        i //= base
        f /= base
    return out


def disc_points(center: complex, radius: float, K: int) -> np.ndarray:
    """K points of a fixed low-discrepancy sequence in the open disc.

    The first point is the centre and the first K points of the sequence
    never depend on K, so sets for increasing K are nested.
    """
    pts = [complex(center)]
    for i in range(1, K):
        r = radius * np.sqrt(_radical_inverse(i, 2))
        t = 2 * np.pi * _radical_inverse(i, 3)
        pts.append(complex(center) + r * np.exp(1j * t))
    return np.array(pts[:K], dtype=complex)


@dataclass
class CompletenessReport:
    lambda0: complex
    radius: float
    eigenvalues: np.ndarray
    numerators: list[int]
    target_indices: list[int]
    residuals: list[float]
    rank: int
    n_vectors: int
    regularization: float
    tail_bound: float
    M: int

    def to_json(self) -> dict:
        return {
            "lambda0": _cplx(self.lambda0),
            "radius": self.radius,
            "K": int(self.eigenvalues.size),
            "numerators": self.numerators,
            "target_indices": self.target_indices,
            "residuals": self.residuals,
            "rank": self.rank,
            "n_vectors": self.n_vectors,
            "regularization": self.regularization,
            "tail_bound": self.tail_bound,
            "M": self.M,
        }


def _nested_basis(cols, cutoff: float) -> np.ndarray:
    """Orthonormal basis built column by column (Gram-Schmidt, two passes).

    A unit column is dropped when less than ``cutoff`` of it is left after
    projecting out the basis so far.  The basis for a prefix of the columns
    is a prefix of the basis for all of them.
    """
    basis: list[np.ndarray] = []
    for v in cols:
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r -= q * np.vdot(q, r)
        nr = np.linalg.norm(r)
        if nr > cutoff:
            basis.append(r / nr)
    return np.array(basis).T if basis else np.zeros((len(cols[0]), 0), dtype=complex)


def gs_completeness_residual(s: Symbol, center: complex, radius: float, K: int,
                             targets=range(5), M: int = 128, numerators=None,
                             cutoff: float = 1e-10) -> CompletenessReport:
    """Distance from each monomial e_m to the span of eigenvectors with
    eigenvalues in a disc off the closure of Phi(D).

    For every eigenvalue all numerators z^j (j < N by default) are used.  The
    projection is regularised by :func:`_nested_basis`, so the residuals for
    nested eigenvalue sets never increase with K.
    """
    lams = disc_points(center, radius, K)
    classes = classify_many(s, lams)
    bad = [lam for lam, cl in zip(lams, classes) if cl is not SpectralClass.SPECTRUM_EIGEN_RICH]
    if bad:
        raise PreconditionError(f"{len(bad)} sampled eigenvalues lie in the closure of Phi(D)",
                                first=complex(bad[0]))
    numerators = list(range(s.N)) if numerators is None else list(numerators)
    cols, tail = [], 0.0
    for lam in lams:
        for j in numerators:
            q = np.zeros(j + 1, dtype=complex)
            q[j] = 1.0
            ev = eigenvector(s, lam, q, M=M)
            v = ev.series.coeffs
            nv = np.linalg.norm(v)
            cols.append(v / nv)
            tail = max(tail, ev.tail_estimate / nv)
    Q = _nested_basis(cols, cutoff)
    targets = list(targets)
    residuals = []
    for m in targets:
        t = np.zeros(M, dtype=complex)
        t[m] = 1.0
        r = t - Q @ (Q.conj().T @ t)
        r = r - Q @ (Q.conj().T @ r)
        residuals.append(float(np.linalg.norm(r)))
    return CompletenessReport(complex(center), float(radius), lams, numerators, targets, residuals,
                              int(Q.shape[1]), len(cols), cutoff, float(tail), M)
