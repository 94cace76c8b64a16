"""The degree-5 Blaschke model family and its critical parametrization.

B(z) = e^{2 pi i t} z^3 (z-p)/(1 - conj(p) z) (z-q)/(1 - conj(q) z) with
|p|, |q| > 1 preserves the unit circle, fixes 0 and infinity
superattractingly, and restricts to a degree-1 circle map. The zeros (p, q)
are pinned down by requiring a double critical point at 1 plus a marked
critical point at mu; the rotation factor t is then calibrated so the circle
restriction has rotation number theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .arith import (
    BlaschkeCircleLift,
    CalibrationResult,
    RotationAngle,
    calibrate_t,
    refine_t,
    rotation_number,
)
from .errors import PoleError, SolverFailureError

ESCAPE_THRESHOLD = 1e6
POLE_TOL = 1e-14
UNIT_CIRCLE_TOL = 1e-9  # |mu| within this of 1 takes the boundary branch


@dataclass(frozen=True)
class BlaschkeParams:
    """A solved member of the critically marked degree-5 family."""

    t: float
    p: complex
    q: complex
    mu: complex
    theta: RotationAngle
    rho_error: float = 0.0  # certified error bound on the rotation number

    @property
    def tau(self) -> complex:
        return complex(np.exp(2j * np.pi * self.t))

    def __call__(self, z: complex) -> complex:
        return blaschke_eval(self, z)

    def lift(self) -> BlaschkeCircleLift:
        return BlaschkeCircleLift(self.t, 3, (self.p, self.q))

    @property
    def free_critical_point(self) -> complex:
        """The marked critical point outside (or on) the closed unit disk."""
        if abs(self.mu) < 1.0 - UNIT_CIRCLE_TOL:
            return 1.0 / self.mu
        return self.mu

    def residuals(self) -> np.ndarray:
        return critical_residuals(self.p, self.q, self.mu)

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "p": [self.p.real, self.p.imag],
            "q": [self.q.real, self.q.imag],
            "mu": [self.mu.real, self.mu.imag],
            "theta": self.theta.value,
            "rho_error": self.rho_error,
            "residuals": [float(r) for r in self.residuals()],
        }


def blaschke_eval(params: BlaschkeParams, z: complex) -> complex:
    """Evaluate the degree-5 map, with infinity mapped to infinity."""
    z = complex(z)
    if np.isinf(z.real) or np.isinf(z.imag):
        return complex(np.inf, np.inf)
    for a in (params.p, params.q):
        if abs(z - 1.0 / np.conj(a)) < POLE_TOL:
            raise PoleError(f"evaluation at z={z}: within {POLE_TOL} of a pole")
    return _kernels.blaschke_step(params.tau, params.p, params.q, z)


def _yek(p: complex, q: complex, u: complex) -> float:
    """Sum of boundary derivative contributions of the two Blaschke factors
    at the unit-circle point u; equals 3 exactly when u is a critical point
    (the z^3 factor contributes 3 of the total degree there)."""
    return (abs(p) ** 2 - 1.0) / abs(p - u) ** 2 + (abs(q) ** 2 - 1.0) / abs(q - u) ** 2


def _do(p: complex, q: complex, u: complex) -> float:
    """Tangential balance at the unit-circle point u; vanishes together with
    the companion equation exactly when u is a double critical point."""
    return (
        2.0 * (p * np.conj(u)).imag * (abs(p) ** 2 - 1.0) / abs(p - u) ** 4
        + 2.0 * (q * np.conj(u)).imag * (abs(q) ** 2 - 1.0) / abs(q - u) ** 4
    )


def log_derivative(p: complex, q: complex, z: complex) -> complex:
    """L(z) = B'(z)/B(z); its zeros off {0, infinity} are the free critical
    points of B, independent of the rotation factor t."""
    return (
        3.0 / z
        + 1.0 / (z - p)
        + np.conj(p) / (1.0 - np.conj(p) * z)
        + 1.0 / (z - q)
        + np.conj(q) / (1.0 - np.conj(q) * z)
    )


def critical_residuals(p: complex, q: complex, mu: complex) -> np.ndarray:
    """Residuals of the four real critical equations at (p, q).

    Entries 0-1 force a double critical point at z=1. When |mu| is off the
    unit circle, entries 2-3 are Re/Im of L(mu) (simple critical point at
    mu); on the circle they are replaced by the double-critical pair at mu.
    """
    p, q, mu = complex(p), complex(q), complex(mu)
    r = np.empty(4)
    r[0] = _yek(p, q, 1.0) - 3.0
    r[1] = _do(p, q, 1.0)
    if abs(abs(mu) - 1.0) <= UNIT_CIRCLE_TOL:
        u = mu / abs(mu)
        r[2] = _yek(p, q, u) - 3.0
        r[3] = _do(p, q, u)
    else:
        L = log_derivative(p, q, mu)
        r[2] = L.real
        r[3] = L.imag
    return r


_DOMAIN_BOUND = 1e6  # runaway toward the degenerate |p| -> infinity limit


def _newton_solve(mu: complex, x0: np.ndarray, tol: float, max_steps: int = 200):
    """Damped Newton on the 4 real critical equations. Returns (x, resnorm).

    The residual decreases monotonically toward the degenerate configuration
    with one zero at infinity, so plain damping can run away; a stalled or
    out-of-domain iteration falls back to a Powell dogleg solve from the
    same start before giving up.
    """

    def res(x):
        try:
            r = critical_residuals(complex(x[0], x[1]), complex(x[2], x[3]), mu)
        except ZeroDivisionError:
            return np.full(4, np.inf)
        return np.where(np.isfinite(r), r, np.inf)

    x = x0.astype(float).copy()
    rn = np.max(np.abs(res(x)))
    h = 1e-6
    for _ in range(max_steps):
        if rn <= tol or np.max(np.abs(x)) > _DOMAIN_BOUND:
            break
        r = res(x)
        J = np.empty((4, 4))
        for j in range(4):
            xp = x.copy()
            xm = x.copy()
            xp[j] += h
            xm[j] -= h
            J[:, j] = (res(xp) - res(xm)) / (2.0 * h)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        improved = False
        for _ in range(30):
            xn = x - lam * step
            rn_new = np.max(np.abs(res(xn)))
            if rn_new < rn:
                x, rn = xn, rn_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    if rn > tol:
        from scipy.optimize import root

        def res_safe(x):
            r = res(x)
            return np.where(np.isfinite(r), r, 1e12)

        sol = root(res_safe, x0.astype(float), method="hybr", tol=1e-13)
        rn_alt = np.max(np.abs(res(sol.x)))
        if rn_alt < rn:
            x, rn = sol.x, rn_alt
    return x, rn


def _starts(mu: complex, seeds: Optional[Sequence[tuple]] = None):
    """Multi-start schedule: caller-supplied continuation seeds first, the
    asymptotic start (p=mu, q=3) for large |mu|, then 8 deterministic random
    starts in the annulus 1.2 < |.| < 8 seeded from mu."""
    out = []
    if seeds:
        for p0, q0 in seeds:
            out.append(np.array([p0.real, p0.imag, q0.real, q0.imag]))
    # nudge the marked-point start off mu itself (L has a pole there)
    near = mu + 0.05 + 0.05j
    out.append(np.array([near.real, near.imag, 3.0, 0.0]) if abs(mu) >= 10.0
               else np.array([3.0, 0.0, near.real, near.imag]))
    seed = hash((round(mu.real, 12), round(mu.imag, 12))) & 0xFFFFFFFF
    rng = np.random.default_rng(seed)
    for _ in range(8):
        r1 = 1.2 + (8.0 - 1.2) * rng.random()
        r2 = 1.2 + (8.0 - 1.2) * rng.random()
        a1 = 2.0 * np.pi * rng.random()
        a2 = 2.0 * np.pi * rng.random()
        out.append(np.array([r1 * np.cos(a1), r1 * np.sin(a1),
                             r2 * np.cos(a2), r2 * np.sin(a2)]))
    return out


def solve_critical_points(mu: complex, tol: float = 1e-11,
                          seeds: Optional[Sequence[tuple]] = None,
                          require_agreement: bool = False):
    """Solve the critical equations for (p, q) at marked parameter mu.

    mu must satisfy |mu| >= 1 here (callers swap mu -> 1/mu below that).
    Solutions with |p| <= 1 or |q| <= 1 are rejected and the next start is
    tried. With require_agreement, every converged start must agree on the
    unordered pair {p, q} to 1e-8 or a solver-failure is raised.
    """
    best = None
    best_rn = np.inf
    accepted = []
    for x0 in _starts(mu, seeds):
        x, rn = _newton_solve(mu, x0, tol)
        if rn < best_rn:
            best, best_rn = x, rn
        if rn <= tol:
            p = complex(x[0], x[1])
            q = complex(x[2], x[3])
            if abs(p) <= 1.0 or abs(q) <= 1.0:
                continue
            accepted.append((p, q))
            if not require_agreement:
                return p, q
    if accepted:
        p0, q0 = accepted[0]
        for p, q in accepted[1:]:
            same = abs(p - p0) < 1e-8 and abs(q - q0) < 1e-8
            swapped = abs(p - q0) < 1e-8 and abs(q - p0) < 1e-8
            if not (same or swapped):
                raise SolverFailureError(
                    f"multi-start disagreement at mu={mu}: ({p0},{q0}) vs ({p},{q})",
                    best_residual=best_rn,
                )
        return p0, q0
    raise SolverFailureError(
        f"Newton failed for mu={mu} from all starts", best_residual=best_rn
    )


def solve_blaschke(mu: complex, theta: RotationAngle, tol: float = 5e-7,
                   seeds: Optional[Sequence[tuple]] = None,
                   require_agreement: bool = False,
                   newton_tol: float = 1e-11) -> BlaschkeParams:
    """Solve for the family member with marked critical parameter mu.

    The critical equations fix (p, q) independently of t (the prefactor
    e^{2 pi i t} does not move the zeros of B'/B); t is then calibrated so
    the circle restriction has rotation number theta within tol. A marked
    parameter inside the disk is handled by solving at 1/mu, which yields
    the same map with the marking read off the other critical point.
    """
    mu = complex(mu)
    if mu == 0:
        raise ValueError("mu must be nonzero")
    solve_at = mu
    if abs(mu) < 1.0 - UNIT_CIRCLE_TOL:
        solve_at = 1.0 / mu
        if seeds is not None:
            seeds = [(complex(p), complex(q)) for p, q in seeds]
    p, q = solve_critical_points(solve_at, tol=newton_tol, seeds=seeds,
                                 require_agreement=require_agreement)

    def family(t: float) -> BlaschkeCircleLift:
        return BlaschkeCircleLift(t, 3, (p, q))

    cal = calibrate_t(family, theta.value, tol)
    return BlaschkeParams(t=cal.t, p=p, q=q, mu=mu, theta=theta,
                          rho_error=cal.rho_error)


def sharpen_rotation(params: BlaschkeParams, q_cap: int = 60_000) -> BlaschkeParams:
    """Re-tune t so the rotation number matches theta far more tightly.

    Bisects the return displacement at a large continued-fraction
    convergent denominator (see refine_t), bringing the rotation-number
    error down to roughly 1/(q * q_next).  Needed when long circle orbits
    must follow the rigid-rotation combinatorics, e.g. conjugacy tables
    with thousands of points.
    """

    def family(t: float) -> BlaschkeCircleLift:
        return BlaschkeCircleLift(t, 3, (params.p, params.q))

    res = refine_t(family, params.theta, params.t, q_cap=q_cap)
    return replace(params, t=res.t, rho_error=res.rho_error)


def standard_f_theta(theta: RotationAngle, tol: float = 1e-6) -> CalibrationResult:
    """Calibrate t for the degree-3 map e^{2 pi i t} z^2 (z-3)/(1-3z).

    The single zero a=3 is forced by requiring a double critical point at 1;
    the returned t makes the circle restriction have rotation number theta.
    """

    def family(t: float) -> BlaschkeCircleLift:
        return BlaschkeCircleLift(t, 2, (3.0 + 0.0j,))

    return calibrate_t(family, theta.value, tol)


@dataclass(frozen=True)
class C5Class:
    """Classification of the free critical orbit of a solved family member.

    tag is 'hits-closed-disk' (orbit enters the closed unit disk; step is
    the first such index), 'escapes' (modulus exceeded the threshold), or
    'bounded-outside' (stayed outside through the budget). Membership in
    the connectedness locus = hits-closed-disk or bounded-outside.
    """

    tag: str
    iterations_used: int
    step: Optional[int] = None

    @property
    def member(self) -> bool:
        return self.tag in ("hits-closed-disk", "bounded-outside")

    def as_dict(self) -> dict:
        d = {"tag": self.tag, "iterations_used": self.iterations_used,
             "member": self.member}
        if self.step is not None:
            d["step"] = self.step
        return d


def classify_c5(mu: complex, theta: RotationAngle, max_iter: int = 2000,
                params: Optional[BlaschkeParams] = None) -> C5Class:
    """Classify mu by iterating the free critical point of the solved map.

    An already-solved BlaschkeParams for the same mu may be passed to skip
    the solve (renders do this).
    """
    if params is None:
        params = solve_blaschke(mu, theta)
    z0 = params.free_critical_point
    code, k = _kernels.blaschke_orbit_classify(
        params.tau, params.p, params.q, z0, max_iter, ESCAPE_THRESHOLD
    )
    if code == 0:
        return C5Class("hits-closed-disk", k, step=k)
    if code == 1:
        return C5Class("escapes", k)
    return C5Class("bounded-outside", max_iter)


def first_entry_time(params: BlaschkeParams, z: complex, kmax: int) -> Optional[int]:
    """Smallest k <= kmax with |B^k(z)| <= 1, or None."""
    k = _kernels.blaschke_first_entry(params.tau, params.p, params.q,
                                      complex(z), kmax)
    return None if k < 0 else int(k)
