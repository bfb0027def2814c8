"""Command-line driver: surface generation, pipelines, check suites, reports.

    qg generate --kind torus --param r=1 --param R=3 --grid-nu 65 --out t.json
    qg lift --surface t.json --out lift_report.json
    qg check --suite pq-identity --grids 33,65,129 --out report.json
    qg merge --out summary.json report1.json report2.json ...

Configuration is plain key=value (one per line, # comments) via --config,
overridden by command-line flags.  Reports are deterministic given the same
config and seed.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import checks, functionals as fn, gauss_map as gm, jsonio, legendre as lg
from . import loop_tools as lt, streamnet as sn, surfaces as sf
from .errors import QuadGeoError, UsageError
from .grids import interior

GENERATORS = {
    "torus": (sf.TorusSampler, ("r", "R"), checks.TORUS_WINDOW),
    "ellipsoid": (sf.EllipsoidConfocalSampler, ("a", "b", "c"), checks.ELL_WINDOW),
    "sphere": (sf.SphereSampler, ("radius",), (0.4, 1.2, 0.1, 1.2)),
    "quadric_graph": (lambda: sf.quadric_graph_sampler(), (), checks.GRAPH_WINDOW),
    "perturbed_graph": (
        lambda cx=0.1, cy=0.1: sf.perturbed_graph_sampler(cx, cy),
        ("cx", "cy"),
        checks.GRAPH_WINDOW,
    ),
    "revolution": (
        lambda profile="catenoid", c=1.0, slope=0.5: sf.RevolutionSampler(profile, c, slope),
        ("profile", "c", "slope"),
        (-0.8, 0.8, 0.1, 1.5),
    ),
}


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_json(data, path):
    text = json.dumps(_sanitize(data), sort_keys=True, indent=1)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def load_config(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            return text


def _generate(args, params):
    if args.kind not in GENERATORS:
        raise UsageError(f"unknown surface kind {args.kind!r}")
    factory, names, default_window = GENERATORS[args.kind]
    kwargs = {k: params[k] for k in names if k in params}
    sampler = factory(**kwargs)
    window = tuple(
        params.get(key, default_window[i])
        for i, key in enumerate(("window_u0", "window_u1", "window_v0", "window_v1"))
    )
    surface = sf.make_surface(sampler, window, args.grid_nu, args.grid_nv,
                              reality=params.get("reality", "real"))
    if args.asymptotic:
        if surface.geometry != sf.PROJECTIVE3:
            raise UsageError("--asymptotic needs a projective generator")
        h = params.get("net_step", 0.45 / (args.grid_nu - 1))
        surface = sn.asymptotic_reparametrize(
            surface, args.grid_nu, args.grid_nv, h, h, sampler=sampler
        )
    jsonio.write_surface(surface, args.out)
    return 0


def _load_surface(path):
    surface = jsonio.read_surface(path)
    if surface.geometry == sf.EUCLIDEAN3 and not surface.has_kappa():
        surface, _ = sf.principal_data(surface)
    return surface


def _lift(surface):
    if surface.geometry == sf.EUCLIDEAN3:
        return lg.lie_lift(surface)
    return lg.proj_lift(surface)


def cmd_generate(args, params):
    return _generate(args, params)


def cmd_lift(args, params):
    grid = _lift(_load_surface(args.surface))
    rep = lg.validate(grid)
    _write_json(
        {
            "nullity_max": rep["nullity_max"],
            "legendre_max": rep["legendre_max"],
            "focal_max": rep["focal_max"],
        },
        args.out,
    )
    return 0


def cmd_gauss(args, params):
    gauss = gm.conformal_gauss(_lift(_load_surface(args.surface)))
    _write_json(
        {
            "orthogonality_max": float(np.max(interior(gm.orthogonality_residual(gauss)))),
            "conformality_max": float(np.max(interior(gm.conformality_residual(gauss)))),
            "degenerate_nodes": int(gauss.degenerate.sum()),
            "eps": "i" if gauss.eps == 1j else "1",
            "signature_z": gauss.signature_z,
        },
        args.out,
    )
    return 0


def cmd_energy(args, params):
    gauss = gm.conformal_gauss(_lift(_load_surface(args.surface)))
    report = fn.willmore_energy(gauss)
    _write_json(jsonio.energy_to_dict(report), args.out)
    return 0


def cmd_tension(args, params):
    gauss = gm.conformal_gauss(_lift(_load_surface(args.surface)))
    tf = gm.tension(gauss)
    margin = gm.TENSION_MARGIN
    _write_json(
        {
            "tau_max": float(np.max(interior(tf.norm, margin))),
            "tau_min": float(np.min(interior(tf.norm, margin))),
            "codazzi_max": float(np.max(interior(tf.codazzi_diff, margin))),
        },
        args.out,
    )
    return 0


def cmd_check(args, params):
    kwargs = {}
    if args.grids:
        kwargs["grids"] = tuple(int(g) for g in args.grids.split(","))
    if args.tolerance is not None:
        kwargs["tol"] = args.tolerance
    if args.seed is not None:
        kwargs["seed"] = args.seed
    lam = complex(args.lambda_re, args.lambda_im)
    if lam not in (0, 1) and args.suite in ("flatness", "deform"):
        kwargs["lam"] = lam.real if lam.imag == 0 else lam
    for key, val in params.items():
        kwargs.setdefault(key, _parse_value(val) if isinstance(val, str) else val)
    report = checks.run_suite(args.suite, **kwargs)
    report["config"] = {
        "suite": args.suite,
        "grids": list(kwargs.get("grids", checks.DEFAULT_GRIDS)),
        "seed": kwargs.get("seed"),
    }
    _write_json(report, args.out)
    return 0 if report["pass"] else 1


def cmd_deform(args, params):
    gauss = gm.conformal_gauss(_lift(_load_surface(args.surface)))
    lam = complex(args.lambda_re, args.lambda_im)
    lam = lam.real if lam.imag == 0 else lam
    deformed = lt.spectral_deform(gauss, lam)
    r1, r2 = gm.blaschke_residual(deformed)
    _write_json(
        {
            "lambda_re": float(np.real(lam)),
            "lambda_im": float(np.imag(lam)),
            "blaschke_u": float(np.max(interior(r1))),
            "blaschke_v": float(np.max(interior(r2))),
            "integration_consistency": deformed.meta["integration_consistency"],
        },
        args.out,
    )
    return 0


def cmd_dualize(args, params):
    gauss = gm.conformal_gauss(_lift(_load_surface(args.surface)))
    dual = lt.dualize(gauss)
    alpha = lt.maurer_cartan(lt.frame(dual))
    if args.connection_out:
        jsonio.write_connection(alpha, args.connection_out)
    _write_json(
        {
            "source_signature": [gauss.space.m, gauss.space.n],
            "dual_signature": [dual.space.m, dual.space.n],
            "imaginary_defect": dual.meta["imaginary_defect"],
            "integration_consistency": dual.meta["integration_consistency"],
        },
        args.out,
    )
    return 0


def cmd_descent(args, params):
    surface = _load_surface(args.surface)
    reports, _ = fn.willmore_descent(
        surface, steps=args.steps, step_size=args.step_size
    )
    w = [r.total for r in reports]
    _write_json(
        {
            "energy_sequence": w,
            "drop": w[0] - w[-1],
            "monotone": all(b <= a + 1e-15 for a, b in zip(w, w[1:])),
        },
        args.out,
    )
    return 0


def cmd_merge(args, params):
    reports = [jsonio.read_report(p) for p in args.reports]
    merged = checks.report_merge(reports)
    _write_json(merged, args.out)
    return 0 if merged["pass"] else 1


def build_parser():
    top = argparse.ArgumentParser(prog="qg", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", default="-", help="output JSON path (default stdout)")
        p.add_argument("--param", action="append", default=[],
                       help="extra key=value parameter (repeatable)")

    p = sub.add_parser("generate", help="write a surface grid JSON")
    common(p)
    p.add_argument("--kind", required=True, help="|".join(GENERATORS))
    p.add_argument("--grid-nu", type=int, default=65)
    p.add_argument("--grid-nv", type=int, default=65)
    p.add_argument("--asymptotic", action="store_true",
                   help="reparametrize a projective graph to asymptotic lines")

    for name in ("lift", "gauss", "energy", "tension"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--surface", required=True)

    p = sub.add_parser("check", help="run a named verification suite")
    common(p)
    p.add_argument("--suite", required=True)
    p.add_argument("--grids", help="comma-separated refinement sizes")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda-re", type=float, default=0.0)
    p.add_argument("--lambda-im", type=float, default=0.0)

    p = sub.add_parser("deform")
    common(p)
    p.add_argument("--surface", required=True)
    p.add_argument("--lambda-re", type=float, default=2.0)
    p.add_argument("--lambda-im", type=float, default=0.0)

    p = sub.add_parser("dualize")
    common(p)
    p.add_argument("--surface", required=True)
    p.add_argument("--connection-out")

    p = sub.add_parser("descent")
    common(p)
    p.add_argument("--surface", required=True)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--step-size", type=float, default=2e-6)

    p = sub.add_parser("merge")
    common(p)
    p.add_argument("reports", nargs="+")
    return top


COMMANDS = {
    "generate": cmd_generate,
    "lift": cmd_lift,
    "gauss": cmd_gauss,
    "energy": cmd_energy,
    "tension": cmd_tension,
    "check": cmd_check,
    "deform": cmd_deform,
    "dualize": cmd_dualize,
    "descent": cmd_descent,
    "merge": cmd_merge,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    params = {}
    if getattr(args, "config", None):
        params.update(load_config(args.config))
    for item in getattr(args, "param", []):
        if "=" not in item:
            raise UsageError(f"--param needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        params[key.replace("-", "_")] = _parse_value(val)
    params = {k: (_parse_value(v) if isinstance(v, str) else v) for k, v in params.items()}
    try:
        return COMMANDS[args.command](args, params)
    except (QuadGeoError, ValueError) as exc:
        print(f"qg {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
