"""Command-line front door.

Subcommands cover the rotation-number machinery, parameter classification,
the critical-parametrization solver, escape-side probes, surgery probes, and
rasterization. Render commands write a binary PPM plus a matplotlib PNG and
a JSON metadata sidecar next to it; numeric commands emit JSON (lines).

A config file of plain `key=value` text may supply defaults for any long
flag; command-line flags override it. Exit codes: 0 success, 2 partial
success (some per-pixel solver failures), 1 fatal error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .arith import continued_fraction, golden_mean, rotation_number
from .blaschke import classify_c5, sharpen_rotation, solve_blaschke, standard_f_theta
from .boettcher import phi, phi_asymptotic, phi_winding
from .cubic import CubicMap, classify_cubic, linearizer
from .errors import SiegelError
from .render import (
    MapSpec,
    Window,
    orbit_dump,
    render_julia,
    render_parameter_blaschke,
    render_parameter_cubic,
    write_orbit_jsonl,
)
from .surgery import DiskExtension, beltrami_sample, circle_conjugacy


def _parse_theta(text: str, digits: int = 30):
    if text.strip().lower() in ("golden", "golden-mean"):
        return golden_mean(digits)
    return continued_fraction(float(text), digits)


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    return complex(text)


def _parse_window(window: str, res: str) -> Window:
    cx, cy, w, h = (float(v) for v in window.split(","))
    nx, ny = (int(v) for v in res.split(","))
    return Window(complex(cx, cy), w, h, nx, ny)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout)
    sys.stdout.write("\n")


def _read_config(path: str) -> dict:
    out = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _write_raster(raster, out: str) -> None:
    base = out[:-4] if out.endswith(".ppm") else out
    raster.write_ppm(base + ".ppm")
    raster.write_png(base + ".png")
    raster.write_metadata(base + ".json")
    print(f"wrote {base}.ppm {base}.png {base}.json")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="siegel",
        description="Dynamics of cubic Siegel polynomials and their degree-5 "
                    "Blaschke models.",
    )
    ap.add_argument("--config", help="key=value file supplying flag defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--theta", default="golden",
                       help="rotation number: 'golden' or a float in (0,1)")
        p.add_argument("--digits", type=int, default=30,
                       help="continued-fraction digits to keep")
        return p

    add("theta", help="continued-fraction digits, convergents, Brjuno sum")

    p = add("t-of-theta", help="rotation factor t of the standard degree-3 model")
    p.add_argument("--tol", type=float, default=1e-5)

    p = add("classify-cubic", help="classify a cubic parameter c")
    p.add_argument("--c", required=True, help="complex as re,im")
    p.add_argument("--iters", type=int, default=2000)

    p = add("capacity", help="linearizer capacity estimate at c")
    p.add_argument("--c", required=True)
    p.add_argument("--order", type=int, default=256)

    p = add("solve-blaschke", help="solve the critical parametrization at mu")
    p.add_argument("--mu", required=True)
    p.add_argument("--tol", type=float, default=5e-7)

    p = add("classify-c5", help="free-critical-orbit classification at mu")
    p.add_argument("--mu", required=True)
    p.add_argument("--iters", type=int, default=2000)

    p = add("phi", help="parameter map Phi(s) on the exterior double cover")
    p.add_argument("--s", required=True)
    p.add_argument("--budget", type=int, default=400)

    p = add("phi-winding", help="winding number of Phi over |s| = radius")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--samples", type=int, default=1024)

    p = add("surgery-probe", help="sample the Douady-Earle extension of the "
                                  "circle conjugacy at mu")
    p.add_argument("--mu", required=True)
    p.add_argument("--orbit", type=int, default=4096)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--quadrature", type=int, default=2048)
    p.add_argument("--out", help="JSON-lines output path (default stdout)")

    for name, helptext in (("render-m3", "cubic connectedness locus"),
                           ("render-c5", "degree-5 model connectedness locus")):
        p = add(name, help=f"render the {helptext}")
        p.add_argument("--window", default="0,0,24,24", help="cx,cy,width,height")
        p.add_argument("--res", default="128,128", help="nx,ny")
        p.add_argument("--iters", type=int, default=2000)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", required=True, help="output basename or .ppm path")
    p.add_argument("--rho-tol", type=float, default=1e-4,
                   help="rotation-number calibration tolerance per pixel")

    p = add("render-julia", help="render a filled Julia set")
    p.add_argument("--map", default="quadratic",
                   choices=["cubic", "quadratic", "blaschke"])
    p.add_argument("--c", help="cubic parameter re,im")
    p.add_argument("--mu", help="blaschke parameter re,im")
    p.add_argument("--window", default="0,0,4,4")
    p.add_argument("--res", default="256,256")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("orbit", help="dump an orbit as JSON lines")
    p.add_argument("--map", default="cubic",
                   choices=["cubic", "quadratic", "blaschke", "rotation"])
    p.add_argument("--c", help="cubic parameter re,im")
    p.add_argument("--mu", help="blaschke parameter re,im")
    p.add_argument("--z0", required=True, help="starting point re,im")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--out", help="output path (default stdout)")
    return ap


def _map_spec(args, theta) -> MapSpec:
    kind = args.map
    c = _parse_complex(args.c) if getattr(args, "c", None) else None
    mu = _parse_complex(args.mu) if getattr(args, "mu", None) else None
    return MapSpec(kind, theta, c=c, mu=mu)


def run(argv=None) -> int:
    ap = _build_parser()
    # a config file supplies defaults; explicit flags win because argparse
    # applies them on top of the defaults we set here
    preview, _ = ap.parse_known_args(argv)
    if preview.config:
        cfg = _read_config(preview.config)
        for action in ap._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in cfg.items() if k in known})
    args = ap.parse_args(argv)
    theta = _parse_theta(args.theta, int(args.digits))

    if args.command == "theta":
        _emit(theta.as_dict())
        return 0

    if args.command == "t-of-theta":
        cal = standard_f_theta(theta, tol=float(args.tol))
        _emit({"t": cal.t, "rho": cal.rho, "rho_error": cal.rho_error,
               "evaluations": cal.evaluations})
        return 0

    if args.command == "classify-cubic":
        m = CubicMap(theta, _parse_complex(args.c))
        _emit(classify_cubic(m, int(args.iters)).as_dict())
        return 0

    if args.command == "capacity":
        m = CubicMap(theta, _parse_complex(args.c))
        series = linearizer(m, int(args.order))
        _emit({"c": [m.c.real, m.c.imag], "order": series.order,
               "capacity": series.capacity_estimate,
               "truncated": series.truncated})
        return 0

    if args.command == "solve-blaschke":
        params = solve_blaschke(_parse_complex(args.mu), theta,
                                tol=float(args.tol))
        _emit(params.as_dict())
        return 0

    if args.command == "classify-c5":
        _emit(classify_c5(_parse_complex(args.mu), theta,
                          int(args.iters)).as_dict())
        return 0

    if args.command == "phi":
        s = _parse_complex(args.s)
        val = phi(theta, s, int(args.budget))
        asym = phi_asymptotic(theta, s)
        _emit({"s": [s.real, s.imag], "phi": [val.real, val.imag],
               "asymptotic": [asym.real, asym.imag]})
        return 0

    if args.command == "phi-winding":
        deg = phi_winding(theta, float(args.radius), int(args.samples))
        _emit({"radius": float(args.radius), "samples": int(args.samples),
               "winding": deg})
        return 0

    if args.command == "surgery-probe":
        params = sharpen_rotation(solve_blaschke(_parse_complex(args.mu), theta))
        ext = DiskExtension(circle_conjugacy(params, int(args.orbit)),
                            int(args.quadrature))
        k = int(args.grid)
        lines = []
        for a in range(k):
            for b in range(k):
                w = complex((a + 0.5) / k * 1.8 - 0.9, (b + 0.5) / k * 1.8 - 0.9)
                if abs(w) > 0.9:
                    continue
                mu_b, K = beltrami_sample(ext, w)
                H = ext(w)
                lines.append({"w": [w.real, w.imag], "H": [H.real, H.imag],
                              "mu_beltrami": [mu_b.real, mu_b.imag], "K": K})
        out = open(args.out, "w") if args.out else sys.stdout
        try:
            for rec in lines:
                out.write(json.dumps(rec) + "\n")
        finally:
            if args.out:
                out.close()
        return 0

    if args.command == "orbit":
        records = orbit_dump(_map_spec(args, theta), _parse_complex(args.z0),
                             int(args.n))
        if args.out:
            write_orbit_jsonl(records, args.out)
            print(f"wrote {args.out}")
        else:
            for rec in records:
                _emit(rec)
        return 0

    window = _parse_window(args.window, args.res)

    if args.command == "render-m3":
        raster = render_parameter_cubic(theta, window, int(args.iters),
                                        workers=int(args.workers))
        _write_raster(raster, args.out)
        return 0

    if args.command == "render-c5":
        raster = render_parameter_blaschke(theta, window, int(args.iters),
                                           workers=int(args.workers),
                                           rho_tol=float(args.rho_tol))
        _write_raster(raster, args.out)
        return 2 if raster.metadata.get("solver_failures", 0) > 0 else 0

    if args.command == "render-julia":
        raster = render_julia(_map_spec(args, theta), window, int(args.iters),
                              workers=int(args.workers))
        _write_raster(raster, args.out)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    try:
        return run(argv)
    except SiegelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
