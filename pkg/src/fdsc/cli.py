"""Command-line surface for the toolkit.

Subcommands: `bench list|run`, `analyze gain`, `synthesize q`, `simulate`,
`export sdpa`. All writers require --out; failures exit nonzero with a
machine-readable JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import benchmark
from .config import design_to_dict, load_config, save_config
from .gkyp import finite_frequency_gain, synthesize_Q
from .metrics import l2_gain_ratio, output_energy
from .model_core import band_peak_gain, close_loop
from .runtime import make_disturbance, simulate_switched, write_switches_csv, write_trajectory_csv


def _fail(code: str, message: str, **extra) -> int:
    record = {"error": code, "message": message}
    record.update(extra)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return 2


def _cmd_bench(args) -> int:
    if args.bench_cmd == "list":
        for name in benchmark.preset_names():
            print(name)
        return 0
    try:
        cfg = benchmark.preset_config(args.preset)
    except KeyError as exc:
        return _fail("unknown_preset", str(exc), preset=args.preset)
    cfg = _apply_overrides(cfg, args)
    try:
        benchmark.run_scenario(cfg, args.out)
    except Exception as exc:  # propagate as error record per contract
        return _fail("scenario_failed", str(exc), preset=args.preset)
    print(f"wrote {args.out}")
    return 0


def _cmd_analyze_gain(args) -> int:
    cfg = _base_config(args)
    if args.controller not in cfg.controllers:
        return _fail("unknown_controller", f"controller {args.controller!r} not in config",
                     controller=args.controller)
    sys_cl = close_loop(cfg.plant, cfg.controllers[args.controller])
    band = benchmark.controller_band(cfg, args.controller)
    bound = finite_frequency_gain(sys_cl, band, tolerance=args.tolerance)
    report = {
        "controller": args.controller,
        "band": {"kind": band.kind, "cutoffs": list(band.cutoffs)},
        "gamma": bound.gamma,
        "grid_peak": bound.grid_peak,
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"gain_{args.controller}.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_synthesize_q(args) -> int:
    cfg = _base_config(args)
    gains = [cfg.controllers[c] for c, _ in cfg.bank]
    bands = [cfg.bands[b] for _, b in cfg.bank]
    try:
        design = synthesize_Q(cfg.plant, gains, bands, len(gains) - 1,
                              args.gamma_tol)
    except Exception as exc:
        return _fail("synthesis_failed", str(exc))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "design.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump(design_to_dict(design), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path} (gamma_in = {design.gammas[-1]:.6g})")
    return 0


def _cmd_simulate(args) -> int:
    cfg = _base_config(args)
    cfg = _apply_overrides(cfg, args)
    if args.disturbance:
        if args.disturbance not in cfg.disturbance_presets:
            return _fail("unknown_disturbance", f"no preset {args.disturbance!r}",
                         disturbance=args.disturbance)
        cfg = replace(cfg, disturbance=cfg.disturbance_presets[args.disturbance])
    if cfg.disturbance is None:
        return _fail("no_disturbance", "config has no disturbance signal")
    d = make_disturbance(cfg.disturbance)
    bank = benchmark.build_bank(cfg)
    try:
        traj = simulate_switched(cfg.plant, bank, d, cfg.x0, cfg.t_span, cfg.h)
    except Exception as exc:
        return _fail("simulation_failed", str(exc))
    os.makedirs(args.out, exist_ok=True)
    write_trajectory_csv(os.path.join(args.out, "trajectory.csv"), traj)
    write_switches_csv(os.path.join(args.out, "switches.csv"), traj)
    save_config(os.path.join(args.out, "config.json"), cfg)
    summary = {
        "output_energy": output_energy(traj),
        "l2_gain_ratio": l2_gain_ratio(traj),
        "switch_count": len(traj.switch_times),
        "sliding_warning": traj.sliding_warning,
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_export(args) -> int:
    cfg = _base_config(args)
    try:
        text = benchmark.export_problem(cfg, args.which)
    except (KeyError, ValueError) as exc:
        return _fail("export_failed", str(exc), which=args.which)
    os.makedirs(args.out, exist_ok=True)
    name = args.which.replace(":", "_") + ".dat-s"
    path = os.path.join(args.out, name)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)
    print(f"wrote {path}")
    return 0


def _base_config(args):
    if getattr(args, "config", None):
        return load_config(args.config)
    return benchmark.builtin_benchmark()


def _apply_overrides(cfg, args):
    updates = {}
    if getattr(args, "t1", None) is not None:
        updates["t_span"] = (cfg.t_span[0], args.t1)
    if getattr(args, "h", None) is not None:
        updates["h"] = args.h
    if getattr(args, "dwell", None) is not None:
        updates["dwell_time"] = args.dwell
    if getattr(args, "hysteresis", None) is not None:
        updates["hysteresis"] = args.hysteresis
    if getattr(args, "q_source", None):
        updates["q_source"] = args.q_source
    return replace(cfg, **updates) if updates else cfg


def _add_common(p, out_required=True):
    p.add_argument("--config", help="scenario config JSON (default: builtin benchmark)")
    if out_required:
        p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdsc", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_bench = sub.add_parser("bench", help="benchmark presets")
    bench_sub = p_bench.add_subparsers(dest="bench_cmd", required=True)
    bench_sub.add_parser("list", help="list preset names")
    p_run = bench_sub.add_parser("run", help="run a preset")
    p_run.add_argument("preset")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--t1", type=float)
    p_run.add_argument("--h", type=float)
    p_run.add_argument("--dwell", type=float)
    p_run.add_argument("--hysteresis", type=float)
    p_run.add_argument("--q-source", dest="q_source",
                       choices=["paper_values", "synthesize"])
    p_bench.set_defaults(func=_cmd_bench)

    p_analyze = sub.add_parser("analyze", help="analysis operations")
    analyze_sub = p_analyze.add_subparsers(dest="analyze_cmd", required=True)
    p_gain = analyze_sub.add_parser("gain", help="certified finite-frequency gain")
    p_gain.add_argument("--controller", required=True)
    p_gain.add_argument("--tolerance", type=float, default=1.0e-6)
    _add_common(p_gain)
    p_gain.set_defaults(func=_cmd_analyze_gain)

    p_synth = sub.add_parser("synthesize", help="design operations")
    synth_sub = p_synth.add_subparsers(dest="synth_cmd", required=True)
    p_q = synth_sub.add_parser("q", help="switching-weight synthesis")
    p_q.add_argument("--gamma-tol", dest="gamma_tol", type=float, default=0.7125)
    _add_common(p_q)
    p_q.set_defaults(func=_cmd_synthesize_q)

    p_sim = sub.add_parser("simulate", help="switched closed-loop simulation")
    p_sim.add_argument("--disturbance", help="named disturbance preset")
    p_sim.add_argument("--t1", type=float)
    p_sim.add_argument("--h", type=float)
    p_sim.add_argument("--dwell", type=float)
    p_sim.add_argument("--hysteresis", type=float)
    p_sim.add_argument("--q-source", dest="q_source",
                       choices=["paper_values", "synthesize"])
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_export = sub.add_parser("export", help="problem export")
    export_sub = p_export.add_subparsers(dest="export_cmd", required=True)
    p_sdpa = export_sub.add_parser("sdpa", help="SDPA sparse export")
    p_sdpa.add_argument("--which", required=True,
                        help="'gain_bound:<controller>' or 'theorem1'")
    _add_common(p_sdpa)
    p_sdpa.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
