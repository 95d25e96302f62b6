"""Command-line front end.

Exit status: 0 on success, 2 on invalid arguments or input files, 1 on any
other failure.  Options may also come from ``--config FILE`` (``key=value``
lines, keys named like the long options with dashes or underscores); flags
given on the command line win over the file.
"""
from __future__ import annotations

import argparse
import logging
import math
import re
import sys

import numpy as np

from . import catalog, formats
from .designer import ConditionSet, DesignProblem, design_symmetric, to_sequence
from .landscape import FIGURE_LEVELS, contours, eval_grid
from .optimizer import OptimizerSpec, optimize
from .su2 import (CompositeSequence, ErrorPoint, InvalidArgument, average_infidelity, compose,
                  duration_error_map, gate_fidelity, target_gate)
from .verification import derivative_report, five_pulse_brackets, format_report

log = logging.getLogger("cpgates")


class UsageError(Exception):
    """Invalid argument; mapped to exit status 2."""


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _floats(text, name, count=None):
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) not in count:
        raise UsageError(f"--{name}: expected {' or '.join(map(str, count))} values, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"--{name}: values must be finite")
    return vals


def parse_box(text, name="box"):
    """``H`` -> [-H, H]^2; ``E,D`` -> [-E, E] x [-D, D]; ``e0,e1,d0,d1`` explicit."""
    vals = _floats(text, name, (1, 2, 4))
    if len(vals) == 1:
        vals = [-vals[0], vals[0], -vals[0], vals[0]]
    elif len(vals) == 2:
        vals = [-vals[0], vals[0], -vals[1], vals[1]]
    e0, e1, d0, d1 = vals
    if not (e1 > e0 and d1 > d0):
        raise UsageError(f"--{name}: empty range {text!r}")
    return (e0, e1), (d0, d1)


def parse_resolution(text, name="resolution"):
    vals = _floats(text, name, (1, 2))
    if any(v != int(v) or v < 2 for v in vals):
        raise UsageError(f"--{name}: must be integers >= 2")
    vals = [int(v) for v in vals]
    return (vals[0], vals[-1])


def parse_grid(text, name="grid"):
    vals = _floats(text, name, (1, 2))
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"--{name}: must be integers >= 1")
    vals = [int(v) for v in vals]
    return (vals[0], vals[-1])


def parse_levels(text):
    vals = _floats(text, "levels")
    if not vals or any(v <= 0 for v in vals):
        raise UsageError("--levels: levels must be positive")
    return vals


def parse_conditions(text):
    """``10,01,11`` or ``1:0,0:1`` -> ((1, 0), (0, 1), (1, 1))."""
    out = []
    for tok in str(text).replace(" ", "").split(","):
        if not tok:
            continue
        parts = tok.split(":") if ":" in tok else list(tok)
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise UsageError(f"--conditions: cannot parse order {tok!r}")
        out.append((int(parts[0]), int(parts[1])))
    try:
        return ConditionSet(tuple(out))
    except InvalidArgument as exc:
        raise UsageError(f"--conditions: {exc}")


def parse_target(text):
    key = str(text).upper()
    aliases = {"X": "X", "RX90": "RX90", "H": "H", "HADAMARD": "H", "I": "I"}
    if key not in aliases:
        raise UsageError(f"--target: unknown gate {text!r} (x, rx90, h, i)")
    return aliases[key]


def landscape_gate(target):
    """Matrix to compare the raw propagator against.

    ``H`` is realised as Rz(pi/2) Rx(pi/2) Rz(pi/2) with virtual Z gates, whose
    fidelity equals that of the raw propagator against Rx(pi/2).
    """
    return target_gate("RX90" if target == "H" else target)


def load_sequence(args) -> tuple[CompositeSequence, str, tuple]:
    if getattr(args, "sequence_file", None):
        try:
            seq, meta = formats.read_sequence(args.sequence_file)
        except OSError as exc:
            raise UsageError(f"--sequence-file: {exc}")
        except formats.FormatError as exc:
            raise UsageError(f"--sequence-file: {exc}")
        return seq, meta["provenance"], tuple(meta["claimed_orders"])
    name = getattr(args, "sequence", None) or getattr(args, "name", None)
    if not name:
        raise UsageError("a sequence name or --sequence-file is required")
    try:
        rec = catalog.get(name)
    except catalog.UnknownSequence as exc:
        raise UsageError(str(exc))
    return rec.sequence, rec.source, rec.claimed_orders


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_catalog_list(args):
    target = parse_target(args.target) if args.target else None
    for name in catalog.names(target):
        rec = catalog.get(name)
        print(f"{name:8s} {rec.target:5s} N={len(rec.sequence):<3d} {rec.source}")
    return 0


def cmd_catalog_show(args):
    try:
        rec = catalog.get(args.name)
    except catalog.UnknownSequence as exc:
        raise UsageError(str(exc))
    s = rec.sequence
    print(f"name:       {rec.name}")
    print(f"target:     {rec.target}")
    print(f"provenance: {rec.source}" + (f" [{rec.notes}]" if rec.notes else ""))
    print(f"kind:       {rec.kind}")
    print("phases/pi:  (" + ", ".join(f"{catalog.signed_over_pi(p):.6g}" for p in s.phases) + ")")
    print("omegas:     (" + ", ".join(f"{w:.6g}" for w in s.omegas) + ")")
    print("taus:       (" + ", ".join(f"{t:.6g}" for t in s.taus) + ")")
    area = f"{rec.area:.4f} pi"
    if rec.nominal_area is not None:
        area += f" (printed {rec.nominal_area} pi)"
    print(f"area:       {area}")
    claimed = ", ".join(f"D{m},{n}" for m, n in rec.claimed_orders) or "none"
    print(f"claimed:    {claimed}")
    infid = 1 - gate_fidelity(compose(s), target_gate(rec.target))
    print(f"nominal infidelity: {infid:.3e}")
    if args.export:
        formats.write_sequence(args.export, s, rec.source, rec.claimed_orders)
    return 0


def cmd_landscape(args):
    seq, _, _ = load_sequence(args)
    target = parse_target(args.target) if args.target else seq.target
    box = parse_box(args.box)
    res = parse_resolution(args.resolution)
    levels = parse_levels(args.levels)
    g = eval_grid(seq, landscape_gate(target), box, res, workers=args.threads)
    c = contours(g, levels)
    if args.out:
        formats.write_grid(args.out, g)
    if args.contours:
        formats.write_contours(args.contours, c)
    if args.svg:
        formats.write_svg(args.svg, c, box, title=f"{seq.name} ({target})")
    centre = g.value_at(0.5 * sum(box[0]), 0.5 * sum(box[1]))
    print(f"{seq.name}: {res[0]}x{res[1]} grid, centre infidelity {centre:.3e}")
    for lv in levels:
        lines = c.polylines(lv)
        print(f"  level {lv:g}: {len(lines)} polylines ({sum(p.closed for p in lines)} closed)")
    return 0


def cmd_verify(args):
    seq, _, claimed = load_sequence(args)
    if args.max_order < 1 or args.max_order > 6:
        raise UsageError("--max-order: must be between 1 and 6")
    infid, rows = derivative_report(seq, args.max_order, claimed)
    print(format_report(seq.name, infid, rows))
    report = {"name": seq.name, "nominal_infidelity": infid,
              "derivatives": [{"order": list(r.order), "norm": r.norm, "vanishes": r.vanishes,
                               "claimed": r.claimed} for r in rows]}
    if len(seq) == 5 and seq.symmetric and np.allclose(seq.omegas, 1) and np.allclose(seq.taus, 1):
        br = five_pulse_brackets(seq.phases[0], seq.phases[1])
        print("  five-pulse brackets: printed Rabi {rabi_printed:.6f}, printed detuning {detuning_printed:.6f} "
              "(sum {s:.6f}); consistent Rabi variant 1 + 2cos(phi1) + 2cos(2phi1 - phi2) = {rabi_consistent:.6f}"
              .format(s=br["rabi_printed"] + br["detuning_printed"], **br))
        report["five_pulse_brackets"] = br
    if args.out:
        formats.write_json(args.out, report)
    bad = [r for r in rows if r.claimed and not r.vanishes]
    return 1 if (bad and args.strict) else 0


def cmd_design(args):
    conds = parse_conditions(args.conditions)
    target = parse_target(args.target)
    try:
        prob = DesignProblem(args.pulses, conds, target)
    except InvalidArgument as exc:
        raise UsageError(f"--pulses: {exc}")
    if args.starts < 1:
        raise UsageError("--starts: must be >= 1")
    sols = design_symmetric(prob, starts=args.starts, seed=args.seed, tol=args.tol, rank=args.rank)
    tag = "".join(f"D{m}{n}" for m, n in conds)
    print(f"{len(sols)} distinct solutions for N={args.pulses}, conditions {tag or 'none'}")
    for k, half in enumerate(sols):
        print(f"  [{k}] phases/pi = (" + ", ".join(f"{p / math.pi:.6f}" for p in half) + ")")
        if args.out_dir:
            seq = to_sequence(half, name=f"design_N{args.pulses}_{k}", target=target)
            formats.write_sequence(f"{args.out_dir}/design_N{args.pulses}_{k}.json", seq,
                                   provenance=f"designed, conditions {tag}, seed {args.seed}",
                                   claimed_orders=conds.orders)
    return 0


def cmd_optimize(args):
    target = parse_target(args.target)
    if target == "H":
        target = "RX90"
    try:
        spec = OptimizerSpec(
            n_pulses=args.pulses, target=target, symmetric=args.symmetric,
            vary_amplitudes=not args.fixed_amplitudes,
            amplitude_bounds=tuple(_floats(args.amplitude_bounds, "amplitude-bounds", (2,))),
            omega=args.omega, tau=args.tau, box=parse_box(args.box), grid=parse_grid(args.grid),
            learning_rate=args.learning_rate, clip_norm=args.clip_norm, starts=args.starts,
            max_iters=args.max_iters, seed=args.seed, area_penalty=args.area_penalty)
    except InvalidArgument as exc:
        raise UsageError(str(exc))
    result = optimize(spec, workers=args.threads)
    seq = result.sequence(args.name)
    print(f"best objective {result.objective:.6e} (start {result.best_start})")
    print("  omegas:    (" + ", ".join(f"{w:.4f}" for w in seq.omegas) + ")")
    print("  phases/pi: (" + ", ".join(f"{p / math.pi:.4f}" for p in seq.phases) + ")")
    if args.out:
        formats.write_sequence(args.out, seq, provenance=f"optimized, seed {spec.seed}")
    if args.report:
        formats.write_json(args.report, formats.optimization_report(result))
    return 0


def cmd_scan_duration(args):
    seq, _, _ = load_sequence(args)
    target = parse_target(args.target) if args.target else seq.target
    lo, hi = _floats(args.eta_range, "eta-range", (2,))
    if not hi > lo or args.points < 2:
        raise UsageError("--eta-range/--points: need lo < hi and at least 2 points")
    G = landscape_gate(target)
    base = ErrorPoint(args.epsilon, args.delta)
    rows = []
    for eta in np.linspace(lo, hi, args.points):
        e = duration_error_map(base, eta)
        rows.append((eta, e.epsilon, e.delta, 1 - gate_fidelity(compose(seq, e), G)))
    text = formats.profile_to_csv(["eta", "epsilon", "delta", "infidelity"], rows)
    if args.out:
        formats.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_average(args):
    seq, _, _ = load_sequence(args)
    target = parse_target(args.target) if args.target else seq.target
    val = average_infidelity(seq, landscape_gate(target), parse_box(args.box), parse_grid(args.grid))
    print(f"{seq.name}: average infidelity {val:.12e}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_sequence_source(p):
    p.add_argument("--sequence", help="catalog name")
    p.add_argument("--sequence-file", help="sequence JSON file")


def build_parser():
    parser = argparse.ArgumentParser(prog="cpgates", description="Robust composite pulse X and Hadamard gates")
    parser.add_argument("--config", help="key=value defaults file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cat = sub.add_parser("catalog", help="list or show catalog sequences")
    cat_sub = p_cat.add_subparsers(dest="catalog_command", required=True)
    p = cat_sub.add_parser("list")
    p.add_argument("--target")
    p.set_defaults(func=cmd_catalog_list)
    p = cat_sub.add_parser("show")
    p.add_argument("name")
    p.add_argument("--export", help="write the record as a sequence file")
    p.set_defaults(func=cmd_catalog_show)

    p = sub.add_parser("landscape", help="infidelity grid, contours and optional SVG")
    _add_sequence_source(p)
    p.add_argument("--target", help="x, rx90 or h (default: the sequence's own target)")
    p.add_argument("--box", default="0.5")
    p.add_argument("--resolution", default="201")
    p.add_argument("--levels", default=",".join(f"{v:g}" for v in FIGURE_LEVELS))
    p.add_argument("--out", help="grid CSV")
    p.add_argument("--contours", help="contour JSON")
    p.add_argument("--svg", help="SVG contour plot")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("verify", help="derivative cancellation report")
    p.add_argument("name", nargs="?")
    p.add_argument("--sequence-file")
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--out", help="JSON report")
    p.add_argument("--strict", action="store_true", help="exit 1 if a claimed order does not vanish")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("design", help="derivative-cancellation design of symmetric sequences")
    p.add_argument("--pulses", type=int, required=True)
    p.add_argument("--conditions", default="10,01,11")
    p.add_argument("--target", default="x")
    p.add_argument("--starts", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--rank", action="store_true", help="rank by robust fraction")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("optimize", help="average-infidelity optimization")
    p.add_argument("--pulses", type=int, required=True)
    p.add_argument("--target", default="x")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--fixed-amplitudes", action="store_true")
    p.add_argument("--amplitude-bounds", default="0,2")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--box", default="0.15")
    p.add_argument("--grid", default="8")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--clip-norm", type=float, default=1.0)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--area-penalty", type=float, default=0.0)
    p.add_argument("--name", default="optimized")
    p.add_argument("--out", help="sequence JSON")
    p.add_argument("--report", help="optimization report JSON")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scan-duration", help="1-D infidelity profile along a duration error")
    _add_sequence_source(p)
    p.add_argument("--target")
    p.add_argument("--eta-range", default="-0.3,0.3")
    p.add_argument("--points", type=int, default=121)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_scan_duration)

    p = sub.add_parser("average", help="average infidelity over an error box")
    _add_sequence_source(p)
    p.add_argument("--target")
    p.add_argument("--box", default="0.15")
    p.add_argument("--grid", default="8")
    p.set_defaults(func=cmd_average)
    return parser


def read_config(path) -> dict:
    out = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: {exc}")
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {n} is not key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, argv, config):
    """Re-parse with config values as defaults so explicit flags still win."""
    ns = parser.parse_args(argv)
    sub_actions = [a for a in parser._subparsers._group_actions]  # noqa: SLF001
    chosen = sub_actions[0].choices[ns.command]
    targets = [chosen]
    if ns.command == "catalog":
        targets.append(chosen._subparsers._group_actions[0].choices[ns.catalog_command])  # noqa: SLF001
    for p in targets:
        known = {a.dest: a for a in p._actions}  # noqa: SLF001
        defaults = {}
        for key, value in config.items():
            if key in known and known[key].option_strings:
                action = known[key]
                if action.nargs == 0:
                    defaults[key] = value.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    try:
                        defaults[key] = action.type(value)
                    except ValueError:
                        raise UsageError(f"--config: bad value for {key}: {value!r}")
                else:
                    defaults[key] = value
        p.set_defaults(**defaults)
    return parser.parse_args(argv)


_LIST_OPTIONS = ("--box", "--eta-range", "--amplitude-bounds", "--levels", "--resolution", "--grid")
_NEGATIVE = re.compile(r"^-\.?\d")


def _join_negative_values(argv):
    """Let ``--box -0.2,0.2,...`` through; argparse would take the value for a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_OPTIONS and i + 1 < len(argv) and _NEGATIVE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            args = _apply_config(parser, argv, read_config(args.config))
        return args.func(args)
    except UsageError as exc:
        print(f"cpgates: error: {exc}", file=sys.stderr)
        return 2
    except formats.FormatError as exc:
        print(f"cpgates: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        log.debug("failure", exc_info=True)
        print(f"cpgates: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
