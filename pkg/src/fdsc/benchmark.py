"""Bundled aircraft benchmark and scenario orchestration.

Holds the longitudinal aircraft model, the four fixed-gain controllers with
their bands, the published switching weights, and the named disturbance
presets; runs complete scenarios (four controllers, metrics, CSV and plot
script emission) and exports the underlying LMI problems.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
from dataclasses import replace

import numpy as np

from .config import ScenarioConfig, config_to_dict, signal_to_dict
from .gkyp import assemble_gkyp_lmi, assemble_theorem1, synthesize_Q
from .metrics import l2_gain_ratio, output_energy, switching_stats
from .model_core import close_loop, make_band, StateSpacePlant
from .runtime import (BankEntry, ControllerBank, SignalSpec, make_disturbance,
                      simulate_switched, write_switches_csv, write_trajectory_csv)
from .sdp import embed_hermitian
from .sdpa_io import export_sdpa

__all__ = [
    "builtin_benchmark",
    "build_bank",
    "preset_names",
    "preset_config",
    "run_scenario",
    "export_problem",
]

# Longitudinal aircraft dynamics and the fixed-gain controller set.
_A = [[-1.175, 0.9871], [-8.458, -0.8776]]
_B2 = [[-0.194, -0.03593], [-19.29, -3.803]]
_B1 = [[1.0], [4.0]]
_C = [[0.0, 4.0], [0.0, 0.0], [0.0, 0.0]]
_D2 = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]
_D1 = [[0.0], [0.0], [0.0]]

_GAINS = {
    "PassC-LF": [[0.1048, 15.0897], [0.0205, 2.9760]],
    "PassC-MF": [[-1.6368, 39.1121], [-0.3229, 7.7111]],
    "PassC-HF": [[-0.4217, -0.0433], [-0.0832, -0.0085]],
    "PassC-EF": [[-1.6360, 39.0849], [-0.3228, 7.7057]],
}

# Published switching weights, paired with (PassC-LF, PassC-HF) in that order.
_Q1 = (1.0e6 * np.array([[0.8559, -0.2207], [-0.2207, 0.0613]]))
_Q2 = np.array([[0.0211, 0.0285], [0.0285, 0.1449]])

# Published per-band gain bounds (used by analysis presets and tests).
GAIN_BOUNDS = {
    "PassC-LF": 0.3443,
    "PassC-MF": 0.4025,
    "PassC-HF": 0.1714,
    "PassC-EF": 0.7125,
}

T_INSERT = 500.0
RHO_P_STAR = 0.1

_LF_TONES = ((1.0, 0.1, 0.0), (1.0, 0.2, 0.0), (1.0, 0.3, 0.0))
_HF_TONES = ((1.0, 100.0, 0.0), (1.0, 200.0, 0.0), (1.0, 300.0, 0.0))


def lf_signal() -> SignalSpec:
    return SignalSpec("sum_of_sines", tones=_LF_TONES)


def hf_signal() -> SignalSpec:
    return SignalSpec("sum_of_sines", tones=_HF_TONES)


def mixed_signal(rho_p: float) -> SignalSpec:
    return SignalSpec("mixed", mix=(float(rho_p), hf_signal(), lf_signal()))


def inserted_signal(rho_t: float, T: float = T_INSERT,
                    rho_p_star: float = RHO_P_STAR) -> SignalSpec:
    scaled_lf = SignalSpec("sum_of_sines",
                           tones=tuple((rho_p_star * a, w, p) for a, w, p in _LF_TONES))
    schedule = (
        ((0.0, T), hf_signal()),
        ((T, T + rho_t * T), scaled_lf),
        ((T + rho_t * T, 2.0 * T + rho_t * T), hf_signal()),
    )
    return SignalSpec("piecewise", schedule=schedule)


def builtin_benchmark() -> ScenarioConfig:
    """The aircraft benchmark: plant, gains, bands, weights, presets."""
    plant = StateSpacePlant(A=_A, B1=_B1, B2=_B2, C=_C, D1=_D1, D2=_D2)
    bands = {
        "Omega1": make_band("LF", [1.0]),
        "Omega2": make_band("MF", [1.0, 10.0]),
        "Omega3": make_band("HF", [10.0]),
        "EF": make_band("LF", [1.0e6]),  # entire-frequency surrogate band
    }
    presets = {
        "lf": lf_signal(),
        "hf": hf_signal(),
        "mixed": mixed_signal(0.1),
        "inserted": inserted_signal(0.3),
    }
    return ScenarioConfig(
        plant=plant,
        controllers={name: np.asarray(K, dtype=float) for name, K in _GAINS.items()},
        bands=bands,
        bank=(("PassC-LF", "Omega1"), ("PassC-HF", "Omega3")),
        q_source="paper_values",
        q_values=(np.array(_Q1), np.array(_Q2)),
        gamma_tol=GAIN_BOUNDS["PassC-EF"],
        disturbance=lf_signal(),
        t_span=(0.0, 500.0),
        h=1.0e-3,
        label="benchmark",
        disturbance_presets=presets,
    )


def controller_band(cfg: ScenarioConfig, name: str):
    """Band associated with a named controller in the benchmark layout."""
    mapping = {"PassC-LF": "Omega1", "PassC-MF": "Omega2",
               "PassC-HF": "Omega3", "PassC-EF": "EF"}
    return cfg.bands[mapping[name]]


def build_bank(cfg: ScenarioConfig) -> ControllerBank:
    """Materialize the switching bank, synthesizing Q when requested."""
    if cfg.q_source == "synthesize":
        gains = [cfg.controllers[c] for c, _ in cfg.bank]
        bands = [cfg.bands[b] for _, b in cfg.bank]
        # in-band entry: the last bank entry by convention (HF for the benchmark)
        design = synthesize_Q(cfg.plant, gains, bands, len(gains) - 1, cfg.gamma_tol)
        q_values = design.bank_Q
    else:
        q_values = cfg.q_values
    entries = tuple(BankEntry(K=cfg.controllers[c], band=cfg.bands[b], Q=Q)
                    for (c, b), Q in zip(cfg.bank, q_values))
    return ControllerBank(entries=entries, dwell_time=cfg.dwell_time,
                          hysteresis=cfg.hysteresis)


def preset_names() -> list:
    return ["fig2-gains", "lf", "hf", "mixed-sweep", "inserted-lf"]


def preset_config(name: str) -> ScenarioConfig:
    """Named figure presets mapped onto scenario configurations."""
    cfg = builtin_benchmark()
    if name == "fig2-gains":
        return replace(cfg, label="fig2-gains", disturbance=None)
    if name == "lf":
        return replace(cfg, label="lf", disturbance=lf_signal())
    if name == "hf":
        return replace(cfg, label="hf", disturbance=hf_signal())
    if name == "mixed-sweep":
        return replace(cfg, label="mixed-sweep", disturbance=mixed_signal(0.0),
                       sweep=("rho_p", (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)))
    if name == "inserted-lf":
        return replace(cfg, label="inserted-lf", disturbance=inserted_signal(0.1),
                       sweep=("rho_t", (0.1, 0.3, 0.5)))
    raise KeyError(f"unknown preset {name!r}")


def _sweep_point_config(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "rho_p":
        return replace(cfg, disturbance=mixed_signal(value), sweep=None,
                       label=f"{cfg.label}_rho_p_{value:g}")
    rho_t = value
    return replace(cfg, disturbance=inserted_signal(rho_t), sweep=None,
                   t_span=(0.0, 2.0 * T_INSERT + rho_t * T_INSERT),
                   label=f"{cfg.label}_rho_t_{value:g}")


def _run_single(cfg: ScenarioConfig, out_dir: str, write_trajectories: bool = True) -> dict:
    """Simulate all four controllers plus FDSC for one disturbance setting."""
    os.makedirs(out_dir, exist_ok=True)
    d = make_disturbance(cfg.disturbance)
    bank = build_bank(cfg)
    runs = {}
    for name in ("PassC-EF", "PassC-LF", "PassC-HF"):
        single = ControllerBank(entries=(
            BankEntry(K=cfg.controllers[name], band=controller_band(cfg, name),
                      Q=np.eye(cfg.plant.n)),))
        runs[name] = simulate_switched(cfg.plant, single, d, cfg.x0, cfg.t_span, cfg.h)
    runs["FDSC"] = simulate_switched(cfg.plant, bank, d, cfg.x0, cfg.t_span, cfg.h)

    rows = []
    for name, traj in runs.items():
        energy = output_energy(traj)
        ratio = l2_gain_ratio(traj)
        stats = switching_stats(traj, n_entries=len(bank) if name == "FDSC" else 1)
        rows.append((name, energy, ratio, stats.switch_count,
                     stats.beta[0] if name == "FDSC" else 1.0))
        if write_trajectories:
            write_trajectory_csv(os.path.join(out_dir, f"trajectory_{name}.csv"), traj)
            if name == "FDSC":
                write_switches_csv(os.path.join(out_dir, "switches_FDSC.csv"), traj)
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="ascii") as fh:
        fh.write("controller,output_energy,l2_gain_ratio,switch_count,beta_first\n")
        for name, energy, ratio, count, beta in rows:
            fh.write(f"{name},{energy!r},{ratio!r},{count},{beta!r}\n")
    return {"runs": runs, "metrics": rows, "out_dir": out_dir}


def _write_plot_script(out_dir: str, label: str, csvs: list) -> None:
    lines = [
        "#!/usr/bin/env python3",
        f'"""Plot helper for the {label} scenario outputs."""',
        "import matplotlib.pyplot as plt",
        "import numpy as np",
        "",
    ]
    for path in csvs:
        base = os.path.basename(path)
        lines += [
            f"data = np.genfromtxt({base!r}, delimiter=',', names=True)",
            f"label = {base!r}",
            "cols = data.dtype.names",
            "plt.figure()",
            "for col in cols[1:]:",
            "    plt.plot(data[cols[0]], data[col], label=col)",
            "plt.xlabel(cols[0]); plt.legend(); plt.title(label)",
            "",
        ]
    lines += [
        "# note: published comparisons display PassC-HF divided by 5000",
        "# (mixed sweep) or 100 (inserted-LF); raw values are written here.",
        "plt.show()",
    ]
    with open(os.path.join(out_dir, "plot.py"), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_gain_sweeps(cfg: ScenarioConfig, out_dir: str) -> dict:
    """Closed-loop singular-value sweeps for every controller (Fig.-2 style)."""
    from .model_core import band_grid, sigma_max_sweep, write_sweep_csv

    paths = {}
    for name in sorted(cfg.controllers):
        sys_cl = close_loop(cfg.plant, cfg.controllers[name])
        grid = band_grid(controller_band(cfg, name), 100)
        sweep = sigma_max_sweep(sys_cl, grid)
        path = os.path.join(out_dir, f"sigma_{name}.csv")
        write_sweep_csv(path, sweep)
        paths[name] = path
    _write_plot_script(out_dir, cfg.label, [paths[n] for n in sorted(paths)])
    return {"sweeps": paths, "out_dir": out_dir}


def run_scenario(cfg: ScenarioConfig, out_dir: str) -> dict:
    """Execute a scenario (or sweep) and emit CSVs plus a plot script."""
    os.makedirs(out_dir, exist_ok=True)
    save_path = os.path.join(out_dir, "config.json")
    with open(save_path, "w", encoding="ascii") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")

    if cfg.disturbance is None:
        return _run_gain_sweeps(cfg, out_dir)

    if cfg.sweep is None:
        bundle = _run_single(cfg, out_dir)
        _write_plot_script(out_dir, cfg.label,
                           [os.path.join(out_dir, f"trajectory_{n}.csv")
                            for n in ("PassC-EF", "PassC-LF", "PassC-HF", "FDSC")])
        return bundle

    param, grid = cfg.sweep
    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(4, len(grid))) as pool:
        futures = {}
        for value in grid:
            sub = _sweep_point_config(cfg, param, value)
            sub_dir = os.path.join(out_dir, f"{param}_{value:g}")
            futures[pool.submit(_run_single, sub, sub_dir, False)] = value
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
    sweep_csv = os.path.join(out_dir, "sweep.csv")
    with open(sweep_csv, "w", encoding="ascii") as fh:
        fh.write(f"{param},controller,output_energy,l2_gain_ratio\n")
        for value in grid:
            for name, energy, ratio, _, _ in results[value]["metrics"]:
                fh.write(f"{value!r},{name},{energy!r},{ratio!r}\n")
    _write_plot_script(out_dir, cfg.label, [sweep_csv])
    return {"sweep": results, "out_dir": out_dir}


def export_problem(cfg: ScenarioConfig, which: str) -> str:
    """Export a scenario LMI ('gain_bound:<controller>' or 'theorem1') as SDPA text."""
    if which.startswith("gain_bound"):
        try:
            _, cname = which.split(":", 1)
        except ValueError as exc:
            raise ValueError("gain_bound export needs 'gain_bound:<controller>'") from exc
        if cname not in cfg.controllers:
            raise KeyError(f"unknown controller {cname!r}")
        sys_cl = close_loop(cfg.plant, cfg.controllers[cname])
        problem = assemble_gkyp_lmi(sys_cl, controller_band(cfg, cname))
        problem = embed_hermitian(problem)
        return export_sdpa(problem)
    if which == "theorem1":
        subsystems = [close_loop(cfg.plant, cfg.controllers[c]) for c, _ in cfg.bank]
        bands = [cfg.bands[b] for _, b in cfg.bank]
        problem = assemble_theorem1(subsystems, bands)
        return export_sdpa(problem)
    raise ValueError(f"unknown export target {which!r}")
