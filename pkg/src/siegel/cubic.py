"""The marked cubic family P_c and the quadratic reference map.

P_c(z) = lam*z*(1 - (1/2)(1+1/c) z + (1/(3c)) z^2) with lam = e^{2 pi i theta}
fixes 0 with multiplier lam and has critical points at c and 1. Provides
escape classification of parameters, the linearizing power series at the
Siegel fixed point, capacity estimation, and a capture probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .arith import RotationAngle

ESCAPE_FACTOR = 4.38  # escape radius m_c = 4.38 * max(|c|, 1)


@dataclass(frozen=True)
class CubicMap:
    theta: RotationAngle
    c: complex

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("c must be nonzero")
        object.__setattr__(self, "c", complex(self.c))

    @property
    def lam(self) -> complex:
        return self.theta.multiplier

    def __call__(self, z: complex) -> complex:
        c = self.c
        return self.lam * z * (1.0 - 0.5 * (1.0 + 1.0 / c) * z + z * z / (3.0 * c))

    def deriv(self, z: complex) -> complex:
        # P'(z) = lam (1/c)(z-1)(z-c)
        return self.lam * (z - 1.0) * (z - self.c) / self.c

    @property
    def escape_radius(self) -> float:
        return ESCAPE_FACTOR * max(abs(self.c), 1.0)


def cubic_eval(m: CubicMap, z: complex) -> complex:
    return m(z)


def escape_radius(m: CubicMap) -> float:
    return m.escape_radius


def quadratic_eval(theta: RotationAngle, z: complex) -> complex:
    """The quadratic reference map lam*z + z^2."""
    return theta.multiplier * z + z * z


@dataclass(frozen=True)
class OrbitClass:
    """Classification outcome for a cubic parameter.

    tag is one of 'exterior-escape', 'interior-escape', 'hyperbolic-like',
    'capture', 'in-locus-unresolved'.
    """

    tag: str
    iterations_used: int
    period: Optional[int] = None
    multiplier: Optional[complex] = None
    entry_index: Optional[int] = None

    @property
    def in_locus(self) -> bool:
        return self.tag not in ("exterior-escape", "interior-escape")

    def as_dict(self) -> dict:
        d = {"tag": self.tag, "iterations_used": self.iterations_used}
        if self.period is not None:
            d["period"] = self.period
        if self.multiplier is not None:
            d["multiplier"] = [self.multiplier.real, self.multiplier.imag]
            d["multiplier_abs"] = abs(self.multiplier)
        if self.entry_index is not None:
            d["entry_index"] = self.entry_index
        return d


@dataclass(frozen=True)
class LinearizerSeries:
    """Truncated linearizer h(z) = z + a_2 z^2 + ... with h(lam z) = P_c(h(z))."""

    c: complex
    coefficients: np.ndarray  # index 0..N, coefficients[1] == 1
    capacity_estimate: float
    truncated: bool = False

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, w: complex) -> complex:
        return _kernels.series_eval(self.coefficients, w)


def linearizer(m: CubicMap, order: int = 256) -> LinearizerSeries:
    """Linearizer series to the given order with a tail-window capacity estimate.

    capacity = 1 / max_{j in [order/2, order]} |a_j|^{1/j}: a root-test read
    off a window of the tail rather than a single term.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    coeffs, upto = _kernels.linearizer_series(m.lam, m.c, order, m.theta.value)
    truncated = upto < order
    if truncated:
        coeffs = coeffs[: upto + 1]
    n = len(coeffs) - 1
    lo = max(2, n // 2)
    roots = [abs(coeffs[j]) ** (1.0 / j) for j in range(lo, n + 1) if coeffs[j] != 0]
    kappa = 1.0 / max(roots) if roots else 0.0
    return LinearizerSeries(
        c=m.c, coefficients=coeffs, capacity_estimate=kappa, truncated=truncated
    )


# Safety margins for the capture probe: enter at half the estimated capacity,
# require the checked orbit to stay inside 0.9 of it. Heuristic.
_CAPTURE_ENTER = 0.5
_CAPTURE_STAY = 0.9


def capture_probe(m: CubicMap, series: LinearizerSeries, orbit_point: complex,
                  checks: int = 200) -> Optional[bool]:
    """Does orbit_point lie well inside the Siegel disk?

    True if the series inversion places it inside radius 0.5*capacity and the
    inversions of its next `checks` iterates stay inside 0.9*capacity.
    None means the inversion Newton failed (verdict unknown).
    """
    kappa = series.capacity_estimate
    if kappa <= 0:
        return None
    if abs(orbit_point) > m.escape_radius:
        return False
    w, ok = _kernels.series_invert(series.coefficients, orbit_point, orbit_point,
                                   1e-12, 60)
    if not ok:
        return None
    if abs(w) > _CAPTURE_ENTER * kappa:
        return False
    lam = m.lam
    z = orbit_point
    for _ in range(checks):
        z = m(z)
        w = lam * w  # rotation in the linearizing coordinate seeds the next solve
        w, ok = _kernels.series_invert(series.coefficients, z, w, 1e-12, 60)
        if not ok:
            return None
        if abs(w) > _CAPTURE_STAY * kappa:
            return False
    return True


@dataclass(frozen=True)
class ClassifyOptions:
    cycle_tol: float = 1e-9          # near-recurrence threshold
    max_period: int = 64
    multiplier_margin: float = 1e-6  # accept |mult| < 1 - margin
    capture_orbit_checks: int = 256  # how many orbit points get the capture probe
    linearizer_order: int = 256
    run_capture_probe: bool = True


def _cycle_probe(m: CubicMap, max_iter: int, opts: ClassifyOptions):
    """Near-recurrence attracting-cycle detection on the free critical orbit.

    Returns (period, multiplier) or None. The multiplier is the product of
    central finite-difference derivatives along the detected cycle.
    """
    tail_len = 2 * opts.max_period + 8
    settle = max(max_iter - tail_len, 0)
    tail = _kernels.cubic_orbit_tail(m.lam, m.c, m.c, settle, tail_len)
    if not np.all(np.isfinite(tail.view(np.float64))):
        return None
    base = tail_len - opts.max_period - 1
    for p in range(1, opts.max_period + 1):
        if abs(tail[base + p] - tail[base]) < opts.cycle_tol:
            # minimal period within the detected one
            period = p
            for d in range(1, p):
                if p % d == 0 and abs(tail[base + d] - tail[base]) < opts.cycle_tol:
                    period = d
                    break
            h = 1e-6
            mult = 1.0 + 0.0j
            z = tail[base]
            for _ in range(period):
                mult *= (m(z + h) - m(z - h)) / (2.0 * h)
                z = m(z)
            if abs(mult) < 1.0 - opts.multiplier_margin:
                return period, mult
    return None


def classify_cubic(m: CubicMap, max_iter: int = 2000,
                   opts: ClassifyOptions = ClassifyOptions()) -> OrbitClass:
    """Classify a cubic parameter by its critical orbits.

    Escape of the orbit of c past m_c is exterior escape; escape of the orbit
    of 1 is interior escape. Non-escaping parameters get the attracting-cycle
    probe, then the capture probe; anything else is the honest
    'in-locus-unresolved' (boundary and putative queer parameters land here).
    """
    if max_iter < 100:
        raise ValueError("max_iter must be >= 100")
    code, iters = _kernels.cubic_escape(m.lam, m.c, max_iter, m.escape_radius)
    if code == 1:
        return OrbitClass("exterior-escape", iters)
    if code == 2:
        return OrbitClass("interior-escape", iters)
    cyc = _cycle_probe(m, max_iter, opts)
    if cyc is not None:
        return OrbitClass("hyperbolic-like", max_iter, period=cyc[0], multiplier=cyc[1])
    if opts.run_capture_probe:
        series = linearizer(m, opts.linearizer_order)
        if series.capacity_estimate > 0:
            z = complex(m.c)
            for k in range(min(max_iter, opts.capture_orbit_checks) + 1):
                if capture_probe(m, series, z):
                    return OrbitClass("capture", max_iter, entry_index=k)
                z = m(z)
    return OrbitClass("in-locus-unresolved", max_iter)


def superattracting_center(theta: RotationAngle) -> complex:
    """The parameter c = 3 - 6*conj(lam) at which P_c(c) = c superattracting."""
    return 3.0 - 6.0 * np.conj(theta.multiplier)
