"""Rotation-number arithmetic.

Continued fractions and convergents, Brjuno partial sums, rotation-number
estimation for monotone circle-map lifts, and monotone calibration of the
rotation factor of a one-parameter circle-map family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from mpmath import mp, mpf

from . import _kernels
from .errors import (
    BracketError,
    BudgetExhaustedError,
    InvalidLiftError,
    RationalInputError,
)

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0

# Below this the denominator of the Gauss map is treated as zero and the
# expansion is considered terminated (rational input).
_RATIONAL_CUTOFF = mpf("1e-30")


@dataclass(frozen=True)
class RotationAngle:
    """An irrational angle in (0,1) with its continued-fraction data.

    digits are the partial quotients a_1..a_n; convergents the pairs
    (p_k, q_k) with p_k/q_k = [a_1,...,a_k]; brjuno_sum the truncated
    sum of log(q_{k+1})/q_k over the computed convergents.
    """

    value: float
    digits: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    brjuno_sum: float

    def is_bounded_type(self, bound: int) -> bool:
        return max(self.digits) <= bound

    @property
    def multiplier(self) -> complex:
        """e^{2 pi i theta}."""
        return complex(np.exp(2j * np.pi * self.value))

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "digits": list(self.digits),
            "convergents": [[p, q] for p, q in self.convergents],
            "brjuno_sum": self.brjuno_sum,
        }


def _cf_digits(x: mpf, n: int) -> list[int]:
    digits = []
    y = x
    for _ in range(n):
        if y < _RATIONAL_CUTOFF:
            break
        inv = 1 / y
        a = int(mp.floor(inv))
        if a < 1:
            break
        digits.append(a)
        y = inv - a
    return digits


def _convergents(digits: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in digits:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append((p, q))
    return out


def continued_fraction(value, n: int) -> RotationAngle:
    """Continued-fraction expansion of value in (0,1) to n partial quotients.

    Computed in extended precision (60 significant digits) so long
    convergents stay honest. Raises RationalInputError if the expansion
    terminates before n digits (value rational at working precision).
    """
    with mp.workdps(60):
        x = mpf(value) if not isinstance(value, str) else mpf(value)
        if not 0 < x < 1:
            raise ValueError(f"value must lie in (0,1), got {value}")
        digits = _cf_digits(x, n)
    if len(digits) < n:
        raise RationalInputError(
            f"expansion terminated after {len(digits)} digits (< {n}); "
            "input is rational at working precision"
        )
    convergents = _convergents(digits)
    brjuno = 0.0
    for k in range(len(convergents) - 1):
        q_k = convergents[k][1]
        q_next = convergents[k + 1][1]
        brjuno += math.log(q_next) / q_k
    return RotationAngle(
        value=float(x),
        digits=tuple(digits),
        convergents=tuple(convergents),
        brjuno_sum=brjuno,
    )


def golden_mean(n: int = 30) -> RotationAngle:
    """The golden rotation number (sqrt(5)-1)/2 with n partial quotients."""
    with mp.workdps(60):
        val = (mp.sqrt(5) - 1) / 2
        return continued_fraction(val, n)


def _cf_of_float(x: float, max_digits: int = 25) -> list[tuple[int, int]]:
    """Convergents of a float, tolerant of rational termination."""
    with mp.workdps(40):
        digits = _cf_digits(mpf(x), max_digits)
    return _convergents(digits)


class CircleMapLift:
    """A monotone lift F: R -> R with F(x+1) = F(x) + 1 of a circle map.

    Wraps an arbitrary callable; subclasses may provide a fast
    `displacement` implementation for long orbits.
    """

    def __init__(self, f: Callable[[float], float], name: str = ""):
        self._f = f
        self.name = name

    def __call__(self, x: float) -> float:
        return self._f(x)

    def displacement(self, x0: float, n: int) -> float:
        """F^n(x0) - x0."""
        y = x0 % 1.0
        acc = 0.0
        for _ in range(n):
            ynew = self._f(y)
            acc += ynew - y
            y = ynew % 1.0
        return acc

    def validate(self, samples: int = 256, tol: float = 1e-12) -> None:
        """Check periodicity F(x+1)=F(x)+1 and monotonicity on a sample grid."""
        xs = np.linspace(0.0, 1.0, samples, endpoint=False)
        vals = np.array([self(float(x)) for x in xs])
        shifted = np.array([self(float(x) + 1.0) for x in xs])
        if np.max(np.abs(shifted - vals - 1.0)) > tol:
            raise InvalidLiftError(f"lift {self.name!r} violates F(x+1)=F(x)+1")
        ext = np.append(vals, vals[0] + 1.0)
        if np.any(np.diff(ext) < -tol):
            raise InvalidLiftError(f"lift {self.name!r} is not monotone on samples")


class BlaschkeCircleLift(CircleMapLift):
    """Lift of z -> e^{2 pi i t} z^winding * prod (z - a_j)/(1 - conj(a_j) z) on T.

    All zeros must lie outside the closed unit disk. winding is the monomial
    degree; the circle map has degree winding - len(zeros).
    """

    def __init__(self, t: float, winding: int, zeros: Sequence[complex], name: str = ""):
        zeros = [complex(a) for a in zeros]
        if any(abs(a) <= 1.0 for a in zeros):
            raise ValueError("all zeros must satisfy |a| > 1")
        self.t = float(t)
        self.winding = int(winding)
        self.zeros = tuple(zeros)
        self._zre = np.array([a.real for a in zeros], dtype=np.float64)
        self._zim = np.array([a.imag for a in zeros], dtype=np.float64)
        super().__init__(self._eval, name or f"blaschke-lift(deg {winding - len(zeros)})")

    def _eval(self, x: float) -> float:
        return _kernels.circle_lift(x, self.t, self.winding, self._zre, self._zim)

    def displacement(self, x0: float, n: int) -> float:
        return _kernels.lift_displacement(x0, n, self.t, self.winding, self._zre, self._zim)

    def orbit_angles(self, x0: float, n: int) -> np.ndarray:
        """First n orbit angles (mod 1)."""
        return _kernels.lift_orbit_angles(x0, n, self.t, self.winding, self._zre, self._zim)


def rigid_lift(t: float) -> BlaschkeCircleLift:
    """Lift of the rigid rotation by t."""
    return BlaschkeCircleLift(t, 1, [], name=f"rotation({t})")


@dataclass(frozen=True)
class RotationEstimate:
    estimate: float
    error_bound: float
    refinements: tuple[float, ...] = field(default=())


def rotation_number(
    lift: CircleMapLift,
    x0: float = 0.0,
    budget: int = 100_000,
    validate: bool = True,
) -> RotationEstimate:
    """Estimate the rotation number of a circle map from its lift.

    Birkhoff average (F^N(x0)-x0)/N, refined by re-evaluating at the
    convergent denominators of the running estimate. For any circle
    homeomorphism |F^n(x)-x-n*rho| < 1, so 1/N is a rigorous bracket; the
    reported error bound is the max of that and the spread of the last
    three refinements.
    """
    if budget < 1000:
        raise ValueError("budget must be at least 10^3")
    if validate:
        lift.validate()
    rho0 = lift.displacement(x0, budget) / budget
    frac = rho0 % 1.0
    whole = rho0 - frac
    qs = [q for _, q in _cf_of_float(frac) if 16 <= q <= budget]
    estimates = []
    for q in qs[-4:]:
        estimates.append(lift.displacement(x0, q) / q)
    estimates.append(rho0)
    last = estimates[-3:]
    spread = max(last) - min(last) if len(last) > 1 else 0.0
    return RotationEstimate(
        estimate=estimates[-1],
        error_bound=max(spread, 1.0 / budget),
        refinements=tuple(estimates),
    )


@dataclass(frozen=True)
class CalibrationResult:
    t: float
    bracket: tuple[float, float]
    rho: float
    rho_error: float
    evaluations: int


_MIN_BRACKET = 1e-9  # refused resolution floor in t; estimator noise dominates below


def calibrate_t(
    family: Callable[[float], CircleMapLift],
    target,
    tol: float,
    n0: int = 20_000,
    n_max: int = 8_000_000,
    coarse: int = 16,
) -> CalibrationResult:
    """Find t with |rho(family(t)) - target| <= tol by guarded bisection.

    The family's rotation number must be nondecreasing in t (checked on a
    coarse grid). The returned bracket is the final bisection interval.
    Brackets narrower than 1e-9 in t are refused: rotation-number noise
    dominates below that scale.
    """
    theta = target.value if isinstance(target, RotationAngle) else float(target)
    if tol < 1e-9:
        raise ValueError("tol below 1e-9 is refused (estimator noise dominates)")

    evals = 0

    def rho_at(t: float, n: int) -> float:
        nonlocal evals
        evals += 1
        return family(t).displacement(0.0, n) / n

    # Coarse scan; unwrap mod-1 jumps so the staircase is increasing.
    ts = [i / coarse for i in range(coarse)] + [1.0 - 1e-12]
    raw = [rho_at(t, n0) for t in ts]
    rhos = [raw[0]]
    for r in raw[1:]:
        r_lift = r + math.ceil(rhos[-1] - r - 1.0 / n0)
        if r_lift < rhos[-1] - 2.0 / n0:
            raise BracketError("family rotation number not nondecreasing on coarse grid")
        rhos.append(max(r_lift, rhos[-1]))
    # Lift the target into the achieved range (rho(t) is continuous in t for
    # a family whose lifts vary continuously, so no further unwrapping).
    goal = theta + math.ceil(rhos[0] - theta - 1e-9)
    slack = 2.0 / n0
    if not rhos[0] - slack <= goal <= rhos[-1] + slack:
        raise BracketError(
            f"target {theta} outside achieved rotation numbers "
            f"[{rhos[0]:.6f}, {rhos[-1]:.6f}]"
        )
    lo, hi = ts[0], ts[-1]
    rlo, rhi = rhos[0], rhos[-1]
    for i in range(len(ts) - 1):
        if rhos[i] - slack <= goal <= rhos[i + 1] + slack:
            lo, hi = ts[i], ts[i + 1]
            rlo, rhi = rhos[i], rhos[i + 1]
            break

    def measure(t: float) -> tuple[float, float]:
        """Adaptive-budget estimate at t: (rho - goal, certified error)."""
        n = n0
        while True:
            gap = rho_at(t, n) - goal
            if abs(gap) > 4.0 / n or n >= n_max:
                return gap, 1.0 / n
            n = min(n * 8, n_max)

    best = None
    use_secant = False
    while hi - lo > _MIN_BRACKET:
        if use_secant and rhi > rlo + 1e-15:
            t = lo + (goal - rlo) * (hi - lo) / (rhi - rlo)
            t = min(max(t, lo + 0.1 * (hi - lo)), hi - 0.1 * (hi - lo))
        else:
            t = 0.5 * (lo + hi)
        use_secant = not use_secant
        gap, err = measure(t)
        if abs(gap) + err <= tol:
            return CalibrationResult(t, (lo, hi), theta + gap, err, evals)
        if best is None or abs(gap) < abs(best[1]):
            best = (t, gap, err)
        if gap < 0:
            lo, rlo = t, goal + gap
        else:
            hi, rhi = t, goal + gap
    if best is not None and abs(best[1]) <= tol:
        t, gap, err = best
        return CalibrationResult(t, (lo, hi), theta + gap, err, evals)
    raise BudgetExhaustedError(
        f"bracket narrowed to {hi - lo:.2e} without certifying tol={tol}"
        + (f"; best residual {abs(best[1]):.2e}" if best else "")
    )


def refine_t(
    family: Callable[[float], CircleMapLift],
    target: RotationAngle,
    t0: float,
    radius: float = 1e-5,
    q_cap: int = 60_000,
) -> CalibrationResult:
    """Sharpen a calibrated t via the return displacement at a convergent.

    For a family whose lift increases pointwise in t, the q-th return
    displacement D(t) = F_t^q(0) - p is strictly increasing in t, where
    p/q is a continued-fraction convergent of the target.  Bisecting D to
    zero pins the rotation number near p/q to within the spread of
    F^q - id, which for these maps is far tighter than what direct
    rotation-number estimation can certify.  Typical resulting error is
    of order 1/(q * q_next).
    """
    usable = [(p, q) for p, q in target.convergents if q <= q_cap]
    if not usable:
        raise BracketError(f"no convergent with denominator <= {q_cap}")
    p, q = usable[-1]

    def disp(t: float) -> float:
        return family(t).displacement(0.0, q) - p

    lo, hi = t0 - radius, t0 + radius
    dlo, dhi = disp(lo), disp(hi)
    grow = 0
    while dlo > 0.0 and grow < 40:
        lo -= radius * 2.0**grow
        dlo = disp(lo)
        grow += 1
    grow = 0
    while dhi < 0.0 and grow < 40:
        hi += radius * 2.0**grow
        dhi = disp(hi)
        grow += 1
    if dlo > 0.0 or dhi < 0.0:
        raise BracketError("return displacement does not change sign near t0")
    d = math.inf
    evals = 2 + 2 * grow
    while hi - lo > 1e-15:
        t = 0.5 * (lo + hi)
        d = disp(t)
        evals += 1
        if d < 0.0:
            lo = t
        else:
            hi = t
    t = 0.5 * (lo + hi)
    # honest error report: distance of the convergent to the target plus the
    # observed spread of the return displacement over a few base points
    spread = max(
        abs(family(t).displacement(x, q) - p) for x in (0.0, 0.33, 0.71)
    )
    err = abs(target.value - p / q) + spread / q
    return CalibrationResult(t, (lo, hi), p / q, err, evals)
