"""Escape-side structure: Green's function, Boettcher coordinate, and the
parameter map Phi on the exterior double cover.

The symmetric chart P^s(z) = lam*z*(1 - (1/2)(s+1/s)z + (1/3)z^2) is
conjugate to P_{c=s^2} by z -> s*z and has critical points at s and 1/s.
The Boettcher coordinate is computed from the telescoped product

    beta(z) = z * prod_n [ P^n(z) / P^{n-1}(z)^3 ]^{3^-n}

in logarithmic form with branch continuity along the orbit, normalized so
beta(z)/z -> sqrt(lam/3) as z -> infinity (the derivative-at-infinity
convention sqrt(3/lam) read in the chart w = 1/z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .arith import RotationAngle
from .cubic import ESCAPE_FACTOR, CubicMap
from .errors import BranchError, WindingError

GREEN_WORKING_THRESHOLD = 0.05  # minimum escape rate for a direct product eval


@dataclass(frozen=True)
class SCubic:
    """The symmetric cubic P^s; s lives on the double cover of the c-plane."""

    theta: RotationAngle
    s: complex

    def __post_init__(self):
        if self.s == 0:
            raise ValueError("s must be nonzero")
        object.__setattr__(self, "s", complex(self.s))

    @property
    def lam(self) -> complex:
        return self.theta.multiplier

    def __call__(self, z: complex) -> complex:
        return self.lam * z * (1.0 - 0.5 * (self.s + 1.0 / self.s) * z + z * z / 3.0)

    @property
    def critical_points(self) -> tuple:
        return (self.s, 1.0 / self.s)

    @property
    def critical_value(self) -> complex:
        # P^s(s) = -(lam/6) s^3 + (lam/2) s
        return -(self.lam / 6.0) * self.s ** 3 + (self.lam / 2.0) * self.s

    @property
    def escape_radius(self) -> float:
        # escape radius of P_{s^2} pulled back through z -> s*z
        return ESCAPE_FACTOR * max(abs(self.s) ** 2, 1.0) / abs(self.s)

    def to_cubic(self) -> CubicMap:
        return CubicMap(self.theta, self.s ** 2)


def _cubic_coeffs(m: Union[SCubic, CubicMap]):
    """(step function, a3, a2) with P(w)/w^3 = a3 + a2/w + lam/w^2."""
    lam = m.lam
    if isinstance(m, SCubic):
        return lam / 3.0, -(lam / 2.0) * (m.s + 1.0 / m.s)
    return lam / (3.0 * m.c), -(lam / 2.0) * (1.0 + 1.0 / m.c)


def green_function(m: Union[SCubic, CubicMap], z: complex, n: int = 200) -> float:
    """Escape rate G(z) = lim 3^-k log+|P^k(z)|; 0 for non-escapers in budget.

    Once the orbit escapes, successive estimates are refined through the
    reciprocal-orbit series until they agree to 1e-12.
    """
    a3, a2 = _cubic_coeffs(m)
    lam = m.lam
    radius = m.escape_radius
    z = complex(z)
    w = z
    k = 0
    while k < n:
        if abs(w) > radius:
            break
        w = m(w)
        k += 1
    else:
        return 0.0
    # refine: G = 3^-k [ log|w| + sum_{j>=0} 3^-(j+1) log|g_j| ], g -> a3
    iw = 1.0 / w
    total = math.log(abs(w))
    scale = 1.0
    for _ in range(k, n):
        g = a3 + a2 * iw + lam * iw * iw
        scale /= 3.0
        term = scale * math.log(abs(g))
        total += term
        if abs(term) < 1e-12 * max(abs(total), 1.0):
            # analytic tail: remaining factors are a3 to working precision
            total += 0.5 * scale * math.log(abs(a3))
            break
        iw = iw ** 3 / g
        if iw == 0.0:
            total += 0.5 * scale * math.log(abs(a3))
            break
    return total / 3.0 ** k


def _log_boettcher(m: Union[SCubic, CubicMap], z: complex, n: int,
                   cut_jitter: float = 0.0) -> complex:
    """A branch of log beta(z) via the telescoped product.

    Each term 3^-k Log g_k takes the principal branch rotated by cut_jitter,
    then is shifted by 2*pi*i multiples for continuity against the previous
    term (the terms settle to Log(a3) geometrically).
    """
    a3, a2 = _cubic_coeffs(m)
    lam = m.lam
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    total = cmath.log(z)
    iw = 1.0 / z
    scale = 1.0
    weight = 0.0  # sum of the 3^-k weights of accumulated terms
    prev = None
    jit = cmath.exp(1j * cut_jitter)
    for _ in range(n):
        g = a3 + a2 * iw + lam * iw * iw
        if abs(g) < 1e-13:
            raise BranchError(f"orbit passes within 1e-13 of a zero of P (z={z})")
        lg = cmath.log(g * jit) - 1j * cut_jitter
        if prev is not None:
            lg -= 2j * math.pi * round((lg.imag - prev.imag) / (2.0 * math.pi))
        prev = lg
        scale /= 3.0
        weight += scale
        term = scale * lg
        total += term
        if abs(term) < 1e-15 * max(abs(total), 1.0):
            break
        iw = iw ** 3 / g
        if iw == 0.0:
            break
    la3 = cmath.log(a3 * jit) - 1j * cut_jitter
    if prev is not None:
        # Anchor the branch chain at its tail: the settled terms must equal
        # the principal Log(a3).  Chain continuity makes any discrepancy a
        # common 2*pi*i multiple across all accumulated terms; remove it,
        # otherwise beta picks up a spurious root-of-unity factor.
        sheets = round((prev.imag - la3.imag) / (2.0 * math.pi))
        total -= 2j * math.pi * sheets * weight
    total += 0.5 * scale * la3
    return total


def boettcher_map(m: Union[SCubic, CubicMap], z: complex, n: int = 200) -> complex:
    """Boettcher coordinate beta(z) for escaping z.

    Requires the escape rate to exceed a working threshold so the product
    converges within budget; conjugacy beta(P(z)) = beta(z)^3 holds because
    the per-term branch shifts telescope away under exponentiation. Branch
    trouble near the logarithm's cut is retried with a rotated cut.
    """
    g = green_function(m, z, n)
    if g <= 0.0:
        raise ValueError(f"z={z} does not escape within the budget")
    if g < GREEN_WORKING_THRESHOLD:
        raise ValueError(
            f"escape rate {g:.2e} below working threshold {GREEN_WORKING_THRESHOLD}"
        )
    last = None
    for jitter in (0.0, 0.37, -0.83):
        try:
            val = cmath.exp(_log_boettcher(m, z, n, cut_jitter=jitter))
        except BranchError as e:
            last = e
            continue
        return val
    raise BranchError(f"branch tracking failed for z={z}: {last}")


def phi(theta: RotationAngle, s: complex, budget: int = 400) -> complex:
    """The parameter map Phi(s) = beta_s(P^s(s)) on the exterior double cover.

    The critical value is pushed forward implicitly: the logarithmic product
    is evaluated along its forward orbit, which is exactly the 3^k-th-root
    form with branches tracked, so slow escape only costs budget.
    """
    m = SCubic(theta, s)
    cv = m.critical_value
    g = green_function(m, cv, budget)
    if g <= 0.0:
        raise ValueError(f"critical value of s={s} does not escape within budget")
    last = None
    for jitter in (0.0, 0.37, -0.83):
        try:
            return cmath.exp(_log_boettcher(m, cv, budget, cut_jitter=jitter))
        except BranchError as e:
            last = e
    raise BranchError(f"branch tracking failed for Phi at s={s}: {last}")


def phi_asymptotic(theta: RotationAngle, s: complex) -> complex:
    """Leading behavior sqrt(lam/3) * (-(lam/6) s^3 + (lam/2) s) of Phi."""
    lam = theta.multiplier
    return cmath.sqrt(lam / 3.0) * (-(lam / 6.0) * s ** 3 + (lam / 2.0) * s)


def winding_degree(values: np.ndarray, max_residue: float = 0.1) -> int:
    """Winding number of a sampled closed curve of nonzero complex values.

    Consecutive angular steps must stay below pi (otherwise the sampling is
    too sparse to track the argument), and the total increment must be
    within max_residue of a multiple of 2*pi.
    """
    v = np.asarray(values, dtype=complex)
    if v.size < 3:
        raise WindingError("need at least 3 samples")
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        raise WindingError("samples must be finite and nonzero")
    closed = np.concatenate([v, v[:1]])
    steps = np.angle(closed[1:] / closed[:-1])
    if np.max(np.abs(steps)) >= np.pi * (1.0 - 1e-9):
        raise WindingError("angular step >= pi between samples; resample denser")
    total = float(np.sum(steps)) / (2.0 * np.pi)
    deg = round(total)
    if abs(total - deg) > max_residue:
        raise WindingError(f"winding residue {abs(total - deg):.3f} exceeds tolerance")
    return int(deg)


def phi_winding(theta: RotationAngle, radius: float, samples: int = 1024,
                budget: int = 400) -> int:
    """Winding number of Phi over the circle |s| = radius."""
    angles = 2.0 * np.pi * np.arange(samples) / samples
    vals = np.array([phi(theta, radius * cmath.exp(1j * a), budget) for a in angles])
    return winding_degree(vals)
