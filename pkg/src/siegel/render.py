"""Raster rendering of parameter planes and filled Julia sets, plus orbit
dumps. Scanline-parallel, deterministic, and reproducible: the pixel map and
palette are fixed and versioned, and metadata records everything needed to
regenerate a raster bit-for-bit.

Pixel convention (row-major, top-left origin): pixel (i, j) with column i in
[0, nx) and row j in [0, ny) has plane coordinates

    re = cx + width  * ((i + 0.5) / nx - 0.5)
    im = cy + height * (0.5 - (j + 0.5) / ny)
"""

from __future__ import annotations

import cmath
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .arith import RotationAngle
from .blaschke import BlaschkeParams, classify_c5, solve_blaschke
from .cubic import ClassifyOptions, CubicMap, classify_cubic
from .errors import SiegelError, SolverFailureError

PALETTE_VERSION = 1

# cell classification codes (shared across render kinds)
CODE_INVALID = 0          # pixel could not be evaluated (e.g. c = 0)
CODE_ESCAPE_OUTER = 1     # exterior escape / basin of infinity / escapes
CODE_ESCAPE_INNER = 2     # interior escape / basin of 0
CODE_BOUNDED = 3          # bounded, not further resolved
CODE_HYPERBOLIC = 4       # attracting-cycle parameter
CODE_CAPTURE = 5          # captured critical orbit / hits the closed disk
CODE_SOLVER_FAILURE = 6   # per-pixel solver failure (parameter renders)

# palette version 1: code -> base RGB
_PALETTE = {
    CODE_INVALID: (20, 20, 20),
    CODE_ESCAPE_OUTER: (40, 60, 160),
    CODE_ESCAPE_INNER: (150, 60, 40),
    CODE_BOUNDED: (10, 10, 10),
    CODE_HYPERBOLIC: (40, 140, 60),
    CODE_CAPTURE: (220, 180, 60),
    CODE_SOLVER_FAILURE: (255, 0, 255),
}
_SHADED_CODES = (CODE_ESCAPE_OUTER, CODE_ESCAPE_INNER, CODE_CAPTURE)


@dataclass(frozen=True)
class Window:
    """An axis-aligned view rectangle with a pixel resolution."""

    center: complex
    width: float
    height: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("resolution must be positive")
        object.__setattr__(self, "center", complex(self.center))

    def pixel_center(self, i: int, j: int) -> complex:
        re = self.center.real + self.width * ((i + 0.5) / self.nx - 0.5)
        im = self.center.imag + self.height * (0.5 - (j + 0.5) / self.ny)
        return complex(re, im)

    def grid(self) -> np.ndarray:
        """All pixel centers as a (ny, nx) complex array."""
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        re = self.center.real + self.width * ((i + 0.5) / self.nx - 0.5)
        im = self.center.imag + self.height * (0.5 - (j + 0.5) / self.ny)
        return im[:, None] * 1j + re[None, :]

    def pixel_of(self, z: complex):
        """(i, j) of the pixel containing z, or None if outside the window."""
        i = int(np.floor((z.real - self.center.real) / self.width * self.nx
                         + self.nx / 2.0))
        j = int(np.floor((self.center.imag - z.imag) / self.height * self.ny
                         + self.ny / 2.0))
        if 0 <= i < self.nx and 0 <= j < self.ny:
            return i, j
        return None

    def as_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag],
                "width": self.width, "height": self.height,
                "nx": self.nx, "ny": self.ny}


@dataclass
class Raster:
    """Per-pixel classification codes and scalars plus regeneration metadata."""

    window: Window
    codes: np.ndarray   # (ny, nx) uint8
    values: np.ndarray  # (ny, nx) int32: iterations or first-entry index
    metadata: dict = field(default_factory=dict)

    def code_counts(self) -> dict:
        vals, counts = np.unique(self.codes, return_counts=True)
        return {int(v): int(n) for v, n in zip(vals, counts)}

    def to_rgb(self) -> np.ndarray:
        """(ny, nx, 3) uint8 image under the versioned palette.

        Escape-type cells are brightness-modulated by their scalar in a
        fixed integer scheme so repeated renders stay byte-identical.
        """
        ny, nx = self.codes.shape
        img = np.zeros((ny, nx, 3), dtype=np.uint8)
        for code, rgb in _PALETTE.items():
            mask = self.codes == code
            if not np.any(mask):
                continue
            if code in _SHADED_CODES:
                v = np.mod(self.values[mask], 64).astype(np.int64)
                for k in range(3):
                    img[mask, k] = (rgb[k] * (40 + v) // 104).astype(np.uint8)
            else:
                img[mask] = rgb
        return img

    def write_ppm(self, path: str) -> None:
        img = self.to_rgb()
        ny, nx, _ = img.shape
        with open(path, "wb") as f:
            f.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
            f.write(img.tobytes())

    def write_png(self, path: str, dpi: int = 100) -> None:
        """Optional matplotlib figure with axes in plane coordinates."""
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        w = self.window
        extent = [w.center.real - w.width / 2, w.center.real + w.width / 2,
                  w.center.imag - w.height / 2, w.center.imag + w.height / 2]
        fig, ax = plt.subplots(figsize=(6, 6 * w.height / w.width))
        ax.imshow(self.to_rgb(), extent=extent, origin="upper",
                  interpolation="nearest", aspect="auto")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title(self.metadata.get("kind", "raster"))
        fig.savefig(path, dpi=dpi, bbox_inches="tight")
        plt.close(fig)

    def write_metadata(self, path: str) -> None:
        meta = dict(self.metadata)
        meta["window"] = self.window.as_dict()
        meta["palette_version"] = PALETTE_VERSION
        meta["code_counts"] = self.code_counts()
        with open(path, "w") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")


def _base_metadata(kind: str, theta: RotationAngle, max_iter: int) -> dict:
    from . import __version__

    return {
        "kind": kind,
        "theta": theta.value,
        "theta_digits": list(theta.digits),
        "max_iter": int(max_iter),
        "version": __version__,
        "palette_version": PALETTE_VERSION,
    }


# ---------------------------------------------------------------------------
# cubic parameter plane

_M3_OPTS = ClassifyOptions(linearizer_order=96, capture_orbit_checks=64)


def _m3_rows(args):
    theta, grid_rows, max_iter, j0 = args
    ny, nx = grid_rows.shape
    codes = np.zeros((ny, nx), dtype=np.uint8)
    values = np.zeros((ny, nx), dtype=np.int32)
    tag_code = {"exterior-escape": CODE_ESCAPE_OUTER,
                "interior-escape": CODE_ESCAPE_INNER,
                "in-locus-unresolved": CODE_BOUNDED,
                "hyperbolic-like": CODE_HYPERBOLIC,
                "capture": CODE_CAPTURE}
    for j in range(ny):
        for i in range(nx):
            c = grid_rows[j, i]
            if abs(c) < 1e-12:
                codes[j, i] = CODE_INVALID
                continue
            try:
                oc = classify_cubic(CubicMap(theta, c), max_iter, _M3_OPTS)
            except SiegelError:
                codes[j, i] = CODE_INVALID
                continue
            codes[j, i] = tag_code[oc.tag]
            values[j, i] = oc.iterations_used
    return j0, codes, values


def render_parameter_cubic(theta: RotationAngle, window: Window,
                           max_iter: int = 2000, workers: int = 1) -> Raster:
    """Classify every pixel of the cubic connectedness-locus window."""
    grid = window.grid()
    chunks = _row_chunks(window.ny, workers)
    args = [(theta, grid[a:b], max_iter, a) for a, b in chunks]
    results = _run_chunks(_m3_rows, args, workers)
    codes = np.zeros((window.ny, window.nx), dtype=np.uint8)
    values = np.zeros((window.ny, window.nx), dtype=np.int32)
    for j0, cc, vv in results:
        codes[j0:j0 + cc.shape[0]] = cc
        values[j0:j0 + vv.shape[0]] = vv
    return Raster(window, codes, values,
                  _base_metadata("parameter-cubic", theta, max_iter))


# ---------------------------------------------------------------------------
# degree-5 model parameter plane

def _c5_rows(args):
    theta, grid_rows, max_iter, j0, rho_tol = args
    ny, nx = grid_rows.shape
    codes = np.zeros((ny, nx), dtype=np.uint8)
    values = np.zeros((ny, nx), dtype=np.int32)
    failures = 0
    tag_code = {"hits-closed-disk": CODE_CAPTURE,
                "bounded-outside": CODE_BOUNDED,
                "escapes": CODE_ESCAPE_OUTER}
    for j in range(ny):
        seeds = None  # left-neighbor continuation, reset per scanline
        for i in range(nx):
            mu = grid_rows[j, i]
            if abs(mu) < 1e-9:
                codes[j, i] = CODE_INVALID
                continue
            try:
                params = solve_blaschke(mu, theta, tol=rho_tol, seeds=seeds)
                seeds = [(params.p, params.q)]
            except SiegelError:
                codes[j, i] = CODE_SOLVER_FAILURE
                failures += 1
                seeds = None
                continue
            cls = classify_c5(mu, theta, max_iter, params=params)
            codes[j, i] = tag_code[cls.tag]
            values[j, i] = cls.step if cls.step is not None else cls.iterations_used
    return j0, codes, values, failures


def render_parameter_blaschke(theta: RotationAngle, window: Window,
                              max_iter: int = 2000, workers: int = 1,
                              rho_tol: float = 1e-4) -> Raster:
    """Solve the critical parametrization per pixel (with left-neighbor
    continuation along each scanline) and classify the free critical orbit.

    Solver failures become a dedicated cell code and are counted in the
    metadata; they never abort the render.
    """
    grid = window.grid()
    chunks = _row_chunks(window.ny, workers)
    args = [(theta, grid[a:b], max_iter, a, rho_tol) for a, b in chunks]
    results = _run_chunks(_c5_rows, args, workers)
    codes = np.zeros((window.ny, window.nx), dtype=np.uint8)
    values = np.zeros((window.ny, window.nx), dtype=np.int32)
    failures = 0
    for j0, cc, vv, nf in results:
        codes[j0:j0 + cc.shape[0]] = cc
        values[j0:j0 + vv.shape[0]] = vv
        failures += nf
    meta = _base_metadata("parameter-blaschke", theta, max_iter)
    meta["solver_failures"] = failures
    meta["rho_tol"] = rho_tol
    return Raster(window, codes, values, meta)


# ---------------------------------------------------------------------------
# dynamical planes

@dataclass(frozen=True)
class MapSpec:
    """Which dynamical system a Julia render or orbit dump iterates.

    kind: 'cubic' (needs c), 'quadratic', 'blaschke' (needs mu, solved on
    demand), or 'rotation' (rigid rotation by theta, orbit dumps only).
    """

    kind: str
    theta: RotationAngle
    c: Optional[complex] = None
    mu: Optional[complex] = None
    params: Optional[BlaschkeParams] = None

    def __post_init__(self):
        if self.kind not in ("cubic", "quadratic", "blaschke", "rotation"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "cubic" and self.c is None:
            raise ValueError("cubic map needs c")
        if self.kind == "blaschke" and self.mu is None and self.params is None:
            raise ValueError("blaschke map needs mu")

    def resolved(self) -> "MapSpec":
        if self.kind == "blaschke" and self.params is None:
            params = solve_blaschke(self.mu, self.theta)
            return MapSpec(self.kind, self.theta, mu=self.mu, params=params)
        return self

    def step(self, z: complex) -> complex:
        lam = self.theta.multiplier
        if self.kind == "cubic":
            return _kernels.cubic_step(lam, complex(self.c), z)
        if self.kind == "quadratic":
            return lam * z + z * z
        if self.kind == "rotation":
            return lam * z
        p = self.params
        return _kernels.blaschke_step(p.tau, p.p, p.q, z)

    def describe(self) -> dict:
        d = {"kind": self.kind, "theta": self.theta.value}
        if self.c is not None:
            d["c"] = [self.c.real, self.c.imag]
        if self.mu is not None:
            d["mu"] = [complex(self.mu).real, complex(self.mu).imag]
        if self.params is not None:
            d["blaschke"] = self.params.as_dict()
        return d


def _julia_rows(args):
    spec_kind, theta, payload, grid_rows, max_iter, j0 = args
    lam = theta.multiplier
    if spec_kind == "blaschke":
        tau, p, q = payload
        kcodes, ktimes = _kernels.julia_blaschke_grid(tau, p, q, grid_rows, max_iter)
        codes = np.where(kcodes == 1, CODE_ESCAPE_OUTER,
                         np.where(kcodes == 2, CODE_ESCAPE_INNER,
                                  CODE_BOUNDED)).astype(np.uint8)
        return j0, codes, ktimes.astype(np.int32)
    if spec_kind == "quadratic":
        kcodes, ktimes = _kernels.julia_escape_grid(lam, 0j, grid_rows, max_iter,
                                                    2.0, True)
    else:
        c = payload
        m = CubicMap(theta, c).escape_radius
        kcodes, ktimes = _kernels.julia_escape_grid(lam, c, grid_rows, max_iter,
                                                    m, False)
    codes = np.where(kcodes == 1, CODE_ESCAPE_OUTER, CODE_BOUNDED).astype(np.uint8)
    return j0, codes, ktimes.astype(np.int32)


def render_julia(spec: MapSpec, window: Window, max_iter: int = 1000,
                 workers: int = 1) -> Raster:
    """Filled-Julia-set raster of the given dynamical system.

    Cubic and quadratic pixels are bounded-vs-escape against the escape
    radius; the degree-5 model classifies convergence to the superattracting
    basins of 0 and infinity, with first-entry index as the cell scalar.
    """
    spec = spec.resolved()
    if spec.kind == "rotation":
        raise ValueError("rotation maps have no Julia raster")
    if spec.kind == "blaschke":
        payload = (spec.params.tau, spec.params.p, spec.params.q)
    elif spec.kind == "cubic":
        payload = complex(spec.c)
    else:
        payload = None
    grid = window.grid()
    chunks = _row_chunks(window.ny, workers)
    args = [(spec.kind, spec.theta, payload, grid[a:b], max_iter, a)
            for a, b in chunks]
    results = _run_chunks(_julia_rows, args, workers)
    codes = np.zeros((window.ny, window.nx), dtype=np.uint8)
    values = np.zeros((window.ny, window.nx), dtype=np.int32)
    for j0, cc, vv in results:
        codes[j0:j0 + cc.shape[0]] = cc
        values[j0:j0 + vv.shape[0]] = vv
    meta = _base_metadata(f"julia-{spec.kind}", spec.theta, max_iter)
    meta["map"] = spec.describe()
    return Raster(window, codes, values, meta)


def orbit_dump(spec: MapSpec, z0: complex, n: int) -> list:
    """Records of the first n+1 orbit points of z0; overflow truncates with
    a flag on the final record."""
    spec = spec.resolved()
    records = []
    z = complex(z0)
    for k in range(n + 1):
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            records.append({"n": k, "overflow": True})
            break
        records.append({"n": k, "re": z.real, "im": z.imag, "abs": abs(z)})
        if k < n:
            z = spec.step(z)
    return records


def write_orbit_jsonl(records: list, path: str) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


# ---------------------------------------------------------------------------
# scanline parallelism

def _row_chunks(ny: int, workers: int):
    nchunks = min(max(workers, 1) * 4, ny)
    bounds = np.linspace(0, ny, nchunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _run_chunks(fn, args, workers: int):
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    import multiprocessing as mp

    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(fn, args))
