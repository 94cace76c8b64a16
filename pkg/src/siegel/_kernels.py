"""Numba-compiled inner loops.

Everything here is scalar orbit iteration: circle-map lifts, escape-time
classification for the cubic and Blaschke families, and the linearizer
coefficient recursion. Pure functions of their arguments, no global state.
"""

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi


@njit(cache=True)
def circle_lift(x, t, winding, zre, zim):
    """Lift F(x) of the circle map z -> e^{2 pi i t} z^winding * prod (z-a)/(1-conj(a)z).

    All zeros a = zre[j] + i*zim[j] must satisfy |a| > 1. Satisfies
    F(x+1) = F(x) + 1 exactly (each Blaschke factor contributes winding -1
    on the circle, the monomial contributes +winding).
    """
    total = t + winding * x
    phi = TWO_PI * x
    for j in range(zre.shape[0]):
        R = np.hypot(zre[j], zim[j])
        alpha = np.arctan2(zim[j], zre[j])
        psi = phi - alpha
        c = np.cos(psi)
        s = np.sin(psi)
        # arg(e^{i psi} - R) = pi + arg(R - e^{i psi}), Re(R - e^{i psi}) > 0
        th1 = np.arctan2(-s, R - c)
        # arg(1 - R e^{i psi}) = pi + psi + arg(1 - e^{-i psi}/R), Re(...) > 0
        th2 = np.arctan2(s / R, 1.0 - c / R)
        total += (2.0 * alpha - phi + th1 - th2) / TWO_PI
    return total


@njit(cache=True)
def lift_displacement(x0, n, t, winding, zre, zim):
    """F^n(x0) - x0 for the lift above, with Kahan-compensated accumulation."""
    y = x0 % 1.0
    acc = 0.0
    comp = 0.0
    for _ in range(n):
        ynew = circle_lift(y, t, winding, zre, zim)
        d = (ynew - y) - comp
        s = acc + d
        comp = (s - acc) - d
        acc = s
        y = ynew % 1.0
    return acc


@njit(cache=True)
def lift_orbit_angles(x0, n, t, winding, zre, zim):
    """First n orbit angles (mod 1) of x0 under the circle map."""
    out = np.empty(n)
    y = x0 % 1.0
    for i in range(n):
        out[i] = y
        y = circle_lift(y, t, winding, zre, zim) % 1.0
    return out


@njit(cache=True)
def cubic_step(lam, c, z):
    return lam * z * (1.0 - 0.5 * (1.0 + 1.0 / c) * z + z * z / (3.0 * c))


@njit(cache=True)
def cubic_escape(lam, c, max_iter, m):
    """Escape test for both critical orbits of P_c.

    Returns (code, iters): code 1 if the orbit of c exceeds m first,
    2 if the orbit of 1 does, 0 if neither escapes within max_iter.
    """
    zc = c
    z1 = 1.0 + 0.0j
    for k in range(max_iter):
        if abs(zc) > m:
            return 1, k
        if abs(z1) > m:
            return 2, k
        zc = cubic_step(lam, c, zc)
        z1 = cubic_step(lam, c, z1)
    if abs(zc) > m:
        return 1, max_iter
    if abs(z1) > m:
        return 2, max_iter
    return 0, max_iter


@njit(cache=True)
def cubic_orbit_tail(lam, c, z0, n_settle, n_tail):
    """Iterate z0 n_settle times, then return the next n_tail orbit points."""
    z = z0
    for _ in range(n_settle):
        z = cubic_step(lam, c, z)
    out = np.empty(n_tail, dtype=np.complex128)
    for i in range(n_tail):
        out[i] = z
        z = cubic_step(lam, c, z)
    return out


@njit(cache=True)
def linearizer_series(lam, c, n, theta):
    """Linearizer coefficients a_0..a_n of h with h(lam z) = P_c(h(z)), a_1 = 1.

    Order-by-order: a_j (lam^j - lam) = -(lam/2)(1+1/c)[h^2]_j + (lam/(3c))[h^3]_j,
    where both brackets involve only lower-order coefficients. lam^j is taken
    from theta*j mod 1 to avoid argument drift. Returns (coeffs, truncated_at);
    truncated_at < n signals overflow of the coefficient sequence.
    """
    a = np.zeros(n + 1, dtype=np.complex128)
    a[1] = 1.0
    A = -(lam / 2.0) * (1.0 + 1.0 / c)
    B = lam / (3.0 * c)
    for j in range(2, n + 1):
        # [h^2]_j = sum_{i=1}^{j-1} a_i a_{j-i}
        s2 = 0.0 + 0.0j
        for i in range(1, j):
            s2 += a[i] * a[j - i]
        # [h^3]_j = sum_{i=1}^{j-2} a_i [h^2]_{j-i}; compute via double sum
        s3 = 0.0 + 0.0j
        for i in range(1, j - 1):
            inner = 0.0 + 0.0j
            for k in range(1, j - i):
                inner += a[k] * a[j - i - k]
            s3 += a[i] * inner
        lamj = np.exp(2j * np.pi * ((theta * j) % 1.0))
        aj = (A * s2 + B * s3) / (lamj - lam)
        if not np.isfinite(aj.real) or not np.isfinite(aj.imag) or abs(aj) > 1e280:
            return a, j - 1
        a[j] = aj
    return a, n


@njit(cache=True)
def series_eval(coeffs, w):
    """Evaluate sum coeffs[j] w^j by Horner."""
    acc = 0.0 + 0.0j
    for j in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * w + coeffs[j]
    return acc


@njit(cache=True)
def series_invert(coeffs, z, seed, tol, max_steps):
    """Newton-solve h(w) = z for w on the truncated series; returns (w, ok)."""
    w = seed
    for _ in range(max_steps):
        # value and derivative by simultaneous Horner
        val = 0.0 + 0.0j
        dval = 0.0 + 0.0j
        for j in range(coeffs.shape[0] - 1, -1, -1):
            dval = dval * w + val
            val = val * w + coeffs[j]
        f = val - z
        if abs(f) < tol:
            return w, True
        if dval == 0.0:
            return w, False
        step = f / dval
        if not (np.isfinite(step.real) and np.isfinite(step.imag)):
            return w, False
        w = w - step
    return w, False


@njit(cache=True)
def blaschke_step(tau, p, q, z):
    return tau * z ** 3 * ((z - p) / (1.0 - np.conj(p) * z)) * (
        (z - q) / (1.0 - np.conj(q) * z)
    )


@njit(cache=True)
def blaschke_orbit_classify(tau, p, q, z0, max_iter, esc):
    """First-hit / escape classification for an orbit of the degree-5 model.

    Returns (code, k): code 0 = hits the closed unit disk at step k,
    1 = modulus exceeds esc at step k, 2 = bounded outside through max_iter.
    """
    z = z0
    for k in range(max_iter + 1):
        az = abs(z)
        if az <= 1.0:
            return 0, k
        if az > esc or not (np.isfinite(z.real) and np.isfinite(z.imag)):
            return 1, k
        z = blaschke_step(tau, p, q, z)
    return 2, max_iter


@njit(cache=True)
def blaschke_first_entry(tau, p, q, z0, kmax):
    """Smallest k <= kmax with |B^k(z0)| <= 1, or -1."""
    z = z0
    for k in range(kmax + 1):
        if abs(z) <= 1.0:
            return k
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            return -1
        z = blaschke_step(tau, p, q, z)
    return -1


@njit(cache=True)
def julia_escape_grid(lam, c, grid, max_iter, m, quadratic):
    """Escape-time raster for P_c (or Q_theta when quadratic): codes and times.

    code 1 = escaped, 3 = bounded through the budget.
    """
    ny, nx = grid.shape
    codes = np.zeros((ny, nx), dtype=np.uint8)
    times = np.zeros((ny, nx), dtype=np.int32)
    for j in range(ny):
        for i in range(nx):
            z = grid[j, i]
            code = 3
            k = max_iter
            for n in range(max_iter):
                if abs(z) > m:
                    code = 1
                    k = n
                    break
                if quadratic:
                    z = lam * z + z * z
                else:
                    z = cubic_step(lam, c, z)
            codes[j, i] = code
            times[j, i] = k
    return codes, times


@njit(cache=True)
def julia_blaschke_grid(tau, p, q, grid, max_iter):
    """Basin raster for the degree-5 model: codes and first-entry times.

    code 1 = basin of infinity (|z| > 1e6), 2 = basin of 0 (|z| < 1e-6),
    3 = neither within the budget. times = first k with |B^k(z)| <= 1, else -1.
    """
    ny, nx = grid.shape
    codes = np.zeros((ny, nx), dtype=np.uint8)
    times = np.full((ny, nx), -1, dtype=np.int32)
    for j in range(ny):
        for i in range(nx):
            z = grid[j, i]
            code = 3
            entry = -1
            for n in range(max_iter):
                az = abs(z)
                if entry < 0 and az <= 1.0:
                    entry = n
                if az < 1e-6:
                    code = 2
                    break
                if az > 1e6 or not (np.isfinite(z.real) and np.isfinite(z.imag)):
                    code = 1
                    break
                z = blaschke_step(tau, p, q, z)
            codes[j, i] = code
            times[j, i] = entry
    return codes, times
