"""Command-line frontend: reproducible generation and analysis runs.

Every command is a thin adapter over the library (no numerics live here).
Reports carry a reproducibility header (tool version plus the full config
echo); identical configs give byte-identical reports apart from the timestamp
field.  Exit codes: 0 success, 2 analysis ran but was inconclusive, 1 error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys

import numpy as np

from . import __version__
from .generators import (
    SCHEME_PRESETS,
    SUBSTITUTION_PRESETS,
    CutProjectScheme,
    SubstitutionSystem,
    lattice,
)
from .pointset import (
    Box,
    covering_radius,
    difference_set,
    epsilon_dual,
    load_pattern,
    meyer_check,
    min_gap,
    repetitivity_radius,
    save_pattern,
    window_ladder,
)
from .proximal import coincidence_rank, proximality_probe
from .spectral import (
    EPS_PE,
    THETA_BRAGG,
    bragg_scan,
    classify_wavevector,
    fiber_collision_ladder,
    torus_coordinates,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _interval(text: str) -> tuple[float, float]:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _box(text: str) -> Box:
    lo_s, hi_s = text.split(":")
    lo = tuple(float(v) for v in lo_s.split(","))
    hi = tuple(float(v) for v in hi_s.split(","))
    return Box(lo, hi)


def _load_substitution(args) -> SubstitutionSystem:
    if args.preset:
        if args.preset not in SUBSTITUTION_PRESETS:
            raise ValueError(
                f"unknown preset {args.preset!r}; available: "
                + ", ".join(sorted(SUBSTITUTION_PRESETS) + sorted(SCHEME_PRESETS))
            )
        return SUBSTITUTION_PRESETS[args.preset]()
    if not args.substitution:
        raise ValueError(
            "a pattern source is required: --preset, --substitution, --scheme "
            "or --lattice"
        )
    with open(args.substitution) as fh:
        return SubstitutionSystem.from_json(fh.read())


def _report(args, result: dict) -> dict:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func",) and v is not None
    }
    return {
        "tool": "apd",
        "version": __version__,
        "command": args.command,
        "config": config,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "result": result,
    }


def _emit(args, doc: dict) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, default=float)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_generate(args) -> int:
    if args.lattice:
        spacings = _floats(args.spacing)
        window = _box(args.window)
        pattern = lattice(len(spacings), spacings, window)
    elif args.preset in SCHEME_PRESETS or args.scheme:
        if args.scheme:
            with open(args.scheme) as fh:
                scheme = CutProjectScheme.from_json(fh.read())
        else:
            scheme = SCHEME_PRESETS[args.preset]()
        pattern = scheme.cut_project(_interval(args.physical_window))
    else:
        system = _load_substitution(args)
        select = set(args.select.split(",")) if args.select else None
        if args.two_sided:
            left, right, power = system.bi_infinite_seed()
            reps = max(1, -(-args.iterations // power))
            pattern = system.realize_two_sided(
                left, right, reps * power, select=select
            )
        else:
            seed = args.seed or system.alphabet[0]
            word = system.substitute(seed, args.iterations)
            pattern = system.realize(word, origin=args.origin, select=select)
    save_pattern(pattern, args.output, fmt=args.format)
    print(f"wrote {len(pattern)} points to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    p = load_pattern(args.input)
    result: dict = {"points": len(p), "window": p.window.as_dict(), "label": p.label}
    result["min_gap"] = min_gap(p)
    lo, hi = covering_radius(p)
    result["covering_radius"] = {"lower": lo, "upper": hi}
    census = p.census(args.radius)
    result["patch_census"] = {
        "radius": args.radius,
        "classes": census.class_count,
        "interior_anchors": len(census.anchors),
    }
    rep = repetitivity_radius(p, args.radius)
    result["repetitivity"] = rep.as_dict()
    delta = difference_set(p, args.cutoff)
    result["difference_set"] = {"cutoff": args.cutoff, "size": len(delta)}
    mc = meyer_check(p, args.cutoff)
    result["meyer"] = mc.as_dict()
    _emit(args, _report(args, result))
    return EXIT_INCONCLUSIVE if mc.verdict == "inconclusive" else EXIT_OK


def cmd_diffract(args) -> int:
    p = load_pattern(args.input)
    grid = np.arange(args.kmin, args.kmax + 0.5 * args.kstep, args.kstep)
    ladder = window_ladder(p, steps=args.ladder_steps, ratio=args.ladder_ratio)
    radii = _floats(args.radii) if args.radii else None
    report = bragg_scan(
        p, grid, ladder=ladder, theta=args.theta, radius_ladder=radii,
        epsilon=args.epsilon,
    )
    if args.format == "csv":
        if not args.output:
            raise ValueError("--format csv requires -o")
        report.write_csv(args.output)
    else:
        _emit(args, _report(args, report.as_dict()))
    if args.plot:
        target = (args.output or "spectrum") + ".svg"
        report.plot_svg(target)
        print(f"plot written to {target}", file=sys.stderr)
    return EXIT_OK


def cmd_pe_test(args) -> int:
    p = load_pattern(args.input)
    radii = _floats(args.radii)
    entries = []
    for k in _floats(args.k):
        entries.append(classify_wavevector(p, k, radii, epsilon=args.epsilon))
    result = {"radii": radii, "entries": [e.as_dict() for e in entries]}
    _emit(args, _report(args, result))
    return EXIT_OK


def cmd_dual(args) -> int:
    p = load_pattern(args.input)
    grid = np.arange(args.kmin, args.kmax + 0.5 * args.kstep, args.kstep)
    res = epsilon_dual(p, args.epsilon, grid)
    _emit(args, _report(args, res.as_dict()))
    return EXIT_OK


def cmd_cr(args) -> int:
    system = _load_substitution(args)
    rank = coincidence_rank(system, power_max=args.power_max)
    _emit(args, _report(args, rank.as_dict()))
    return EXIT_OK


def cmd_proximal(args) -> int:
    a = load_pattern(args.pattern_a)
    b = load_pattern(args.pattern_b)
    if args.schedule:
        start, step, count = args.schedule.split(":")
        centers = [
            (float(start) + float(step) * i,) for i in range(int(count))
        ]
    else:
        centers = [(c,) for c in _floats(args.shifts)]
    rep = proximality_probe(
        a, b, centers, growth=args.growth, distal_bound=args.distal_bound
    )
    if args.format == "csv":
        if not args.output:
            raise ValueError("--format csv requires -o")
        with open(args.output, "w") as fh:
            fh.write("center,radius,capped\n")
            for c, r, capped in rep.agreement_radii:
                fh.write(f"{','.join(repr(v) for v in c)},{r!r},{capped}\n")
        print(f"verdict: {rep.verdict}", file=sys.stderr)
    else:
        _emit(args, _report(args, rep.as_dict()))
    return EXIT_INCONCLUSIVE if rep.verdict == "inconclusive" else EXIT_OK


def cmd_torus(args) -> int:
    p = load_pattern(args.input)
    basis = _floats(args.basis)
    result: dict = {"basis": basis}
    if args.x is not None:
        coords = torus_coordinates(p, basis, _floats(args.x))
        result["x"] = _floats(args.x)
        result["coordinates"] = [float(v) for v in coords]
        _emit(args, _report(args, result))
        return EXIT_OK
    radii = _floats(args.radii)
    ladder = fiber_collision_ladder(
        p, basis, radii, args.tol, schedule=args.schedule
    )
    result["schedule"] = args.schedule
    result["ladder"] = [r.as_dict() for r in ladder]
    _emit(args, _report(args, result))
    if any(not r.conclusive for r in ladder):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="apd",
        description="aperiodic point-pattern generation and structure tests",
    )
    ap.add_argument("--version", action="version", version=f"apd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a point-set file")
    g.add_argument("--preset", help="substitution or scheme preset name")
    g.add_argument("--substitution", help="substitution JSON file")
    g.add_argument("--scheme", help="cut & project scheme JSON file")
    g.add_argument("--lattice", action="store_true", help="generate a lattice")
    g.add_argument("--spacing", default="1.0", help="lattice spacings, comma-separated")
    g.add_argument("--window", default="0:100", help="lattice window lo:hi (2d: lo1,lo2:hi1,hi2)")
    g.add_argument("--iterations", type=int, default=8)
    g.add_argument("--seed", default=None, help="seed word (default: first symbol)")
    g.add_argument("--select", help="emit only these symbols, comma-separated")
    g.add_argument("--origin", type=float, default=0.0)
    g.add_argument("--two-sided", action="store_true",
                   help="realize a two-sided fixed point around the origin")
    g.add_argument("--physical-window", default="0:100", help="cut & project physical window lo:hi")
    g.add_argument("--format", choices=("json", "text"), default="json")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="geometric analyzers and Meyer check")
    a.add_argument("-i", "--input", required=True)
    a.add_argument("--radius", type=float, default=2.0, help="patch census radius")
    a.add_argument("--cutoff", type=float, default=6.0, help="difference-set cutoff")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    d = sub.add_parser("diffract", help="Bragg scan over a k grid")
    d.add_argument("-i", "--input", required=True)
    d.add_argument("--kmin", type=float, default=0.0)
    d.add_argument("--kmax", type=float, default=3.0)
    d.add_argument("--kstep", type=float, default=1e-3)
    d.add_argument("--theta", type=float, default=THETA_BRAGG)
    d.add_argument("--ladder-steps", type=int, default=4)
    d.add_argument("--ladder-ratio", type=float, default=2.0)
    d.add_argument("--radii", help="optional phase-spread radius ladder, comma-separated")
    d.add_argument("--epsilon", type=float, default=EPS_PE)
    d.add_argument("--format", choices=("json", "csv"), default="json")
    d.add_argument("--plot", action="store_true", help="write an SVG next to the report")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_diffract)

    pe = sub.add_parser("pe-test", help="topological eigenvalue test for given k")
    pe.add_argument("-i", "--input", required=True)
    pe.add_argument("--k", required=True, help="wave vectors, comma-separated")
    pe.add_argument("--radii", default="2,8,32,128", help="radius ladder")
    pe.add_argument("--epsilon", type=float, default=EPS_PE)
    pe.add_argument("-o", "--output")
    pe.set_defaults(func=cmd_pe_test)

    du = sub.add_parser("dual", help="epsilon-dual wave vectors")
    du.add_argument("-i", "--input", required=True)
    du.add_argument("--epsilon", type=float, default=0.5)
    du.add_argument("--kmin", type=float, default=0.0)
    du.add_argument("--kmax", type=float, default=10.0)
    du.add_argument("--kstep", type=float, default=1e-4)
    du.add_argument("-o", "--output")
    du.set_defaults(func=cmd_dual)

    c = sub.add_parser("cr", help="coincidence rank of a substitution")
    c.add_argument("--preset")
    c.add_argument("--substitution", help="substitution JSON file")
    c.add_argument("--power-max", type=int, default=8)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_cr)

    pr = sub.add_parser("proximal", help="agreement-radius proximality probe")
    pr.add_argument("-a", "--pattern-a", required=True)
    pr.add_argument("-b", "--pattern-b", required=True)
    pr.add_argument("--shifts", help="centers, comma-separated")
    pr.add_argument("--schedule", help="start:step:count center schedule")
    pr.add_argument("--growth", type=float, default=1.0)
    pr.add_argument("--distal-bound", type=float)
    pr.add_argument("--format", choices=("json", "csv"), default="json")
    pr.add_argument("-o", "--output")
    pr.set_defaults(func=cmd_proximal)

    t = sub.add_parser("torus", help="torus coordinates / fiber collision ladder")
    t.add_argument("-i", "--input", required=True)
    t.add_argument("--basis", required=True, help="character basis, comma-separated")
    t.add_argument("--x", help="single location: print its torus coordinates")
    t.add_argument("--radii", default="2,4,8,16", help="patch radius ladder")
    t.add_argument("--tol", type=float, default=0.08)
    t.add_argument("--schedule", choices=("quadratic", "fixed"), default="quadratic")
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_torus)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"apd: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
