"""Constructive stages of the quasiconformal surgery on the degree-5 model.

From a solved family member B this builds: the circle homeomorphism h with
h(1)=1 conjugating B|_T to the rigid rotation (realized on the critical
orbit, which is dense); its Douady-Earle conformal-barycenter extension H
to the disk; the modified map equal to B outside the unit circle and to
H^-1 o R_theta o H inside; and Beltrami-coefficient sampling of H with
dilatation reporting. The straightening (measurable Riemann mapping) step
is not performed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .blaschke import BlaschkeParams, blaschke_eval
from .errors import ExtensionError, InversionError, SampleError

# Orbit angles compress cubically near the double critical point on the
# circle, so genuine gaps can reach ~1e-13 for tables of ~10^4 points, at
# which point angle round-off can scramble the order of neighbouring points.
# Angles closer than this are treated as one cluster and ordered by their
# target values, which are exact.
_CLUSTER_TOL = 1e-10


@dataclass(frozen=True)
class CircleConjugacy:
    """Angle table of the circle conjugacy h (angles in [0,1), h(0)=0).

    Between table points h is interpolated monotonically and piecewise
    linearly, with degree-1 wraparound.
    """

    params: Optional[BlaschkeParams]
    angles: np.ndarray    # sorted sample angles x
    values: np.ndarray    # h(x), circularly increasing
    # unwrapped copies with the closing point appended, used by interpolation
    _xs: np.ndarray = field(repr=False, default=None)
    _hs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        x = np.asarray(self.angles, dtype=float)
        h = np.asarray(self.values, dtype=float)
        if x.shape != h.shape or x.ndim != 1 or x.size < 3:
            raise ValueError("need matching 1-d angle/value tables, >= 3 points")
        order = np.argsort(x, kind="stable")
        x = x[order]
        h = h[order]
        # Angle round-off can invert the order inside clusters of angles
        # closer than _CLUSTER_TOL; within each cluster the values carry the
        # exact circular order, so re-sort clusters by value (wrap-safely).
        breaks = np.flatnonzero(np.diff(x) > _CLUSTER_TOL)
        starts = np.concatenate([[0], breaks + 1])
        stops = np.concatenate([breaks + 1, [x.size]])
        for a, b in zip(starts, stops):
            if b - a > 1:
                key = np.mod(h[a:b] - h[a] + 0.5, 1.0)
                sub = np.argsort(key, kind="stable")
                x[a:b] = np.sort(x[a:b])
                h[a:b] = h[a:b][sub]
        # unwrap h: circular order preservation means h increases with at
        # most one wrap across the sorted table
        hu = h.copy()
        wraps = 0
        for i in range(1, hu.size):
            if hu[i] + wraps <= hu[i - 1]:
                wraps += 1.0
            hu[i] += wraps
        # a valid circular table wraps at most once and spans less than a
        # full turn after unwrapping
        if wraps > 1 or hu[-1] - hu[0] >= 1.0 or np.any(np.diff(hu) <= 0):
            raise ValueError("value table is not circularly increasing")
        # keep interpolation abscissae strictly increasing after the repair
        for i in range(1, x.size):
            if x[i] <= x[i - 1]:
                x[i] = np.nextafter(x[i - 1], np.inf)
        object.__setattr__(self, "angles", x)
        object.__setattr__(self, "values", h)
        object.__setattr__(self, "_xs", np.concatenate([x, [x[0] + 1.0]]))
        object.__setattr__(self, "_hs", np.concatenate([hu, [hu[0] + 1.0]]))

    def __call__(self, x):
        """h at angle x (mod 1), piecewise linear; returns angles in [0,1)."""
        t = np.mod(np.asarray(x, dtype=float), 1.0)
        lo = self._xs[0]
        t = np.where(t < lo, t + 1.0, t)
        out = np.mod(np.interp(t, self._xs, self._hs), 1.0)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    def boundary_point(self, x) -> complex:
        return complex(np.exp(2j * np.pi * self(x)))

    @classmethod
    def identity(cls, n: int = 256) -> "CircleConjugacy":
        x = np.arange(n) / n
        return cls(params=None, angles=x, values=x.copy())

    def conjugacy_residual(self, x: float) -> float:
        """Distance mod 1 of h(B(x)) - h(x) from theta at the angle x."""
        if self.params is None:
            raise ValueError("no underlying map (identity table)")
        lift = self.params.lift()
        bx = lift(float(x)) % 1.0
        d = self(bx) - self(float(x)) - self.params.theta.value
        d = d % 1.0
        return min(d, 1.0 - d)


def circle_conjugacy(params: BlaschkeParams, n: int = 4096) -> CircleConjugacy:
    """Build h on the critical orbit: h(angle of B^k(1)) = frac(k*theta).

    The orbit of the critical angle 0 is dense on the circle because B
    restricted to it has irrational rotation number theta; the conjugacy
    residual vanishes identically on the table by construction.
    """
    if n < 3:
        raise ValueError("orbit length must be >= 3")
    lift = params.lift()
    xs = lift.orbit_angles(0.0, n)
    hs = np.mod(np.arange(n) * params.theta.value, 1.0)
    return CircleConjugacy(params=params, angles=xs, values=hs)


@dataclass
class DiskExtension:
    """Douady-Earle conformal-barycenter extension of a circle conjugacy.

    Holds an M-point quadrature grid of boundary values and a lock-guarded
    evaluation cache; evaluations are pure, so results are independent of
    thread interleaving.
    """

    conjugacy: CircleConjugacy
    quadrature: int = 2048
    newton_tol: float = 1e-12
    max_steps: int = 100

    def __post_init__(self):
        M = self.quadrature
        if M < 16:
            raise ValueError("quadrature order must be >= 16")
        grid = np.arange(M) / M
        self._zeta = np.exp(2j * np.pi * grid)
        self._h = np.exp(2j * np.pi * self.conjugacy(grid))
        self._cache = {}
        self._lock = threading.Lock()

    def boundary_samples(self, w: complex) -> np.ndarray:
        """Boundary values of h sampled by the harmonic measure of w.

        The harmonic measure of w is the pushforward of the uniform measure
        under the disk Moebius map centering w, so transporting the uniform
        grid and weighting equally resolves the measure even when it
        concentrates near the boundary.
        """
        if w == 0:
            return self._h
        omega = (self._zeta + w) / (1.0 + np.conj(w) * self._zeta)
        x = np.angle(omega) / (2.0 * np.pi)
        return np.exp(2j * np.pi * self.conjugacy(x))

    def __call__(self, w: complex) -> complex:
        return douady_earle_eval(self, w)


def douady_earle_eval(ext: DiskExtension, w: complex) -> complex:
    """H(w): the conformal barycenter of h pushed through harmonic measure.

    Solves sum_k nu_k (h_k - z)/(1 - conj(z) h_k) = 0 with nu the Poisson
    weights of w, by Newton in (z, conj(z)), seeded at the Euclidean
    barycenter. The solution lies in the open disk.
    """
    w = complex(w)
    if abs(w) >= 1.0:
        raise ValueError(f"|w| must be < 1, got {abs(w)}")
    key = (w.real, w.imag)
    with ext._lock:
        hit = ext._cache.get(key)
    if hit is not None:
        return hit
    h = ext.boundary_samples(w)
    nu = 1.0 / h.size

    def residual(z):
        return nu * complex(np.sum((h - z) / (1.0 - np.conj(z) * h)))

    z = complex(np.sum(nu * h))
    if abs(z) >= 1.0:
        z *= 0.99 / abs(z)
    G = residual(z)
    resid = abs(G)
    converged = False
    for _ in range(ext.max_steps):
        if resid < ext.newton_tol:
            converged = True
            break
        denom = 1.0 - np.conj(z) * h
        Gz = -nu * complex(np.sum(1.0 / denom))
        Gzb = nu * complex(np.sum((h - z) * h / denom ** 2))
        det = abs(Gz) ** 2 - abs(Gzb) ** 2
        if det == 0.0 or not np.isfinite(det):
            raise ExtensionError(
                f"degenerate barycenter Jacobian at w={w}", residual=resid
            )
        dz = (-G * np.conj(Gz) + Gzb * np.conj(G)) / det
        # damp by halving until the residual decreases (the equation is
        # nearly singular when the measure concentrates at the boundary)
        lam = 1.0
        improved = False
        for _ in range(40):
            zn = z + lam * dz
            if abs(zn) >= 1.0:
                zn *= (1.0 - 1e-12) / abs(zn)
            Gn = residual(zn)
            if abs(Gn) < resid:
                z, G, resid = zn, Gn, abs(Gn)
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    if not converged:
        # the residual evaluation loses precision like eps/(1-|z|) when the
        # barycenter sits near the boundary; accept a stall at that floor
        floor = 1e3 * np.finfo(float).eps / max(1.0 - abs(z), 1e-15)
        if resid >= max(ext.newton_tol, floor):
            raise ExtensionError(
                f"barycenter Newton did not converge at w={w}", residual=resid
            )
    with ext._lock:
        ext._cache[key] = z
    return z


def _extension_jacobian(ext: DiskExtension, z: complex, h: float = 1e-6):
    """2x2 real Jacobian of H at z by central finite differences."""
    fxp = douady_earle_eval(ext, z + h)
    fxm = douady_earle_eval(ext, z - h)
    fyp = douady_earle_eval(ext, z + 1j * h)
    fym = douady_earle_eval(ext, z - 1j * h)
    dx = (fxp - fxm) / (2.0 * h)
    dy = (fyp - fym) / (2.0 * h)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def invert_extension(ext: DiskExtension, target: complex, seed: complex,
                     tol: float = 1e-10, max_steps: int = 60) -> complex:
    """Solve H(y) = target for y in the disk, Newton from the given seed."""
    y = complex(seed)
    if abs(y) >= 1.0:
        y *= 0.98 / abs(y)
    fn = abs(douady_earle_eval(ext, y) - target)
    for _ in range(max_steps):
        f = douady_earle_eval(ext, y) - target
        if abs(f) < tol:
            return y
        J = _extension_jacobian(ext, y, h=min(1e-6, 0.1 * (1.0 - abs(y))))
        try:
            step = np.linalg.solve(J, np.array([f.real, f.imag]))
        except np.linalg.LinAlgError:
            raise InversionError(f"singular Jacobian inverting H at {target}")
        dy = -complex(step[0], step[1])
        lam = 1.0
        improved = False
        for _ in range(30):
            yn = y + lam * dy
            if abs(yn) >= 1.0:
                # pull overshoots back inside rather than clamping onto the rim
                yn = y + (yn - y) * 0.5 * (1.0 - abs(y)) / abs(lam * dy)
            fn_new = abs(douady_earle_eval(ext, yn) - target)
            if fn_new < fn:
                y, fn = yn, fn_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            break
    if fn < tol:
        return y
    raise InversionError(
        f"H inversion did not reach {tol} at target={target} (best {fn:.2e})"
    )


def modified_blaschke_eval(params: BlaschkeParams, ext: DiskExtension,
                           z: complex) -> complex:
    """The pre-surgery model map: B outside the unit circle, the conjugated
    rotation H^-1(e^{2 pi i theta} H(z)) strictly inside.

    Inversion failures propagate; there is no silent fallback to B.
    """
    z = complex(z)
    if abs(z) >= 1.0:
        return blaschke_eval(params, z)
    rot = complex(np.exp(2j * np.pi * params.theta.value))
    target = rot * douady_earle_eval(ext, z)
    return invert_extension(ext, target, seed=z)


def beltrami_sample(ext: DiskExtension, w: complex, step: Optional[float] = None):
    """Beltrami coefficient and dilatation of H at w by central differences.

    Returns (mu, K) with mu = dbar H / d H and K = (1+|mu|)/(1-|mu|).
    """
    w = complex(w)
    if step is None:
        step = 1e-4 * (1.0 - abs(w))
    if step <= 0 or abs(w) + 2.0 * step >= 1.0:
        raise SampleError(f"w={w} too close to the boundary for step {step}")
    hx = (douady_earle_eval(ext, w + step) - douady_earle_eval(ext, w - step)) / (2 * step)
    hy = (douady_earle_eval(ext, w + 1j * step) - douady_earle_eval(ext, w - 1j * step)) / (2 * step)
    d = 0.5 * (hx - 1j * hy)
    dbar = 0.5 * (hx + 1j * hy)
    if d == 0:
        raise SampleError(f"vanishing holomorphic derivative at w={w}")
    mu = dbar / d
    if abs(mu) >= 1.0:
        raise SampleError(f"|mu| = {abs(mu):.4f} >= 1 at w={w}")
    K = (1.0 + abs(mu)) / (1.0 - abs(mu))
    return mu, K
