"""Structured configuration for scenarios and designs.

JSON-compatible tree with a schema_version field; matrices are row-major
nested arrays and all frequencies are rad/s.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model_core import FrequencyBand, StateSpacePlant, make_band
from .runtime import SignalSpec

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioConfig",
    "signal_to_dict",
    "signal_from_dict",
    "design_to_dict",
    "load_config",
    "save_config",
]

SCHEMA_VERSION = 1


def _mat(M) -> list:
    return np.asarray(M, dtype=float).tolist()


@dataclass
class ScenarioConfig:
    """A complete scenario: plant, controllers, bank, disturbance, horizon."""

    plant: StateSpacePlant
    controllers: dict                 # name -> gain matrix
    bands: dict                       # name -> FrequencyBand
    bank: tuple                       # ((controller name, band name), ...) in order
    q_source: str = "paper_values"    # 'paper_values' | 'synthesize'
    q_values: tuple = ()              # per-bank-entry Q when q_source='paper_values'
    gamma_tol: float = 0.7125
    disturbance: SignalSpec | None = None
    t_span: tuple = (0.0, 500.0)
    h: float = 1.0e-3
    x0: tuple = ()
    dwell_time: float = 0.0
    hysteresis: float = 0.0
    sweep: tuple | None = None        # (parameter in {'rho_p','rho_t'}, grid)
    label: str = "scenario"
    disturbance_presets: dict = field(default_factory=dict)

    def __post_init__(self):
        for cname, _ in self.bank:
            if cname not in self.controllers:
                raise KeyError(f"bank references unknown controller {cname!r}")
        for _, bname in self.bank:
            if bname not in self.bands:
                raise KeyError(f"bank references unknown band {bname!r}")
        if self.q_source not in ("paper_values", "synthesize"):
            raise ValueError(f"unknown q_source {self.q_source!r}")
        if self.q_source == "paper_values" and len(self.q_values) != len(self.bank):
            raise ValueError("q_values must align with bank entries")
        if self.sweep is not None:
            param, grid = self.sweep
            if param not in ("rho_p", "rho_t"):
                raise ValueError(f"unknown sweep parameter {param!r}")
            if any(not (0.0 <= g <= 0.5) for g in grid):
                raise ValueError("sweep grid must lie within [0, 0.5]")
        if not self.x0:
            self.x0 = tuple(0.0 for _ in range(self.plant.n))


def signal_to_dict(spec: SignalSpec) -> dict:
    d: dict = {"kind": spec.kind}
    if spec.kind == "sum_of_sines":
        d["tones"] = [list(t) for t in spec.tones]
    elif spec.kind == "mixed":
        rho_p, base, added = spec.mix
        d["rho_p"] = float(rho_p)
        d["base"] = signal_to_dict(base)
        d["added"] = signal_to_dict(added)
    else:
        d["schedule"] = [{"interval": [a, b], "signal": signal_to_dict(sub)}
                         for (a, b), sub in spec.schedule]
    return d


def signal_from_dict(d: dict) -> SignalSpec:
    kind = d["kind"]
    if kind == "sum_of_sines":
        return SignalSpec(kind, tones=tuple(tuple(t) for t in d.get("tones", ())))
    if kind == "mixed":
        return SignalSpec(kind, mix=(float(d["rho_p"]), signal_from_dict(d["base"]),
                                     signal_from_dict(d["added"])))
    sched = tuple((tuple(item["interval"]), signal_from_dict(item["signal"]))
                  for item in d["schedule"])
    return SignalSpec(kind, schedule=sched)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    p = cfg.plant
    return {
        "schema_version": SCHEMA_VERSION,
        "label": cfg.label,
        "plant": {"A": _mat(p.A), "B1": _mat(p.B1), "B2": _mat(p.B2),
                  "C": _mat(p.C), "D1": _mat(p.D1), "D2": _mat(p.D2)},
        "controllers": {name: _mat(K) for name, K in cfg.controllers.items()},
        "bands": {name: {"kind": b.kind, "cutoffs": list(b.cutoffs)}
                  for name, b in cfg.bands.items()},
        "bank": [list(pair) for pair in cfg.bank],
        "q_source": cfg.q_source,
        "q_values": [_mat(Q) for Q in cfg.q_values],
        "gamma_tol": cfg.gamma_tol,
        "disturbance": signal_to_dict(cfg.disturbance) if cfg.disturbance else None,
        "t_span": list(cfg.t_span),
        "h": cfg.h,
        "x0": list(cfg.x0),
        "dwell_time": cfg.dwell_time,
        "hysteresis": cfg.hysteresis,
        "sweep": None if cfg.sweep is None else {"parameter": cfg.sweep[0],
                                                 "grid": list(cfg.sweep[1])},
        "disturbance_presets": {name: signal_to_dict(s)
                                for name, s in cfg.disturbance_presets.items()},
    }


def config_from_dict(d: dict) -> ScenarioConfig:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    pd = d["plant"]
    plant = StateSpacePlant(A=pd["A"], B1=pd["B1"], B2=pd["B2"],
                            C=pd["C"], D1=pd["D1"], D2=pd["D2"])
    bands = {name: make_band(bd["kind"], bd["cutoffs"])
             for name, bd in d.get("bands", {}).items()}
    sweep = d.get("sweep")
    return ScenarioConfig(
        plant=plant,
        controllers={name: np.asarray(K, dtype=float)
                     for name, K in d.get("controllers", {}).items()},
        bands=bands,
        bank=tuple(tuple(pair) for pair in d.get("bank", ())),
        q_source=d.get("q_source", "paper_values"),
        q_values=tuple(np.asarray(Q, dtype=float) for Q in d.get("q_values", ())),
        gamma_tol=float(d.get("gamma_tol", 0.7125)),
        disturbance=signal_from_dict(d["disturbance"]) if d.get("disturbance") else None,
        t_span=tuple(d.get("t_span", (0.0, 500.0))),
        h=float(d.get("h", 1.0e-3)),
        x0=tuple(d.get("x0", ())),
        dwell_time=float(d.get("dwell_time", 0.0)),
        hysteresis=float(d.get("hysteresis", 0.0)),
        sweep=None if not sweep else (sweep["parameter"], tuple(sweep["grid"])),
        label=d.get("label", "scenario"),
        disturbance_presets={name: signal_from_dict(s)
                             for name, s in d.get("disturbance_presets", {}).items()},
    )


def design_to_dict(design) -> dict:
    """Serialize a SwitchingDesign so it is consumable as configuration."""
    return {
        "schema_version": SCHEMA_VERSION,
        "q_matrices": [_mat(Q) for Q in design.bank_Q],
        "gammas": list(design.gammas),
        "gamma_tol": design.gamma_tol,
    }


def save_config(path, cfg: ScenarioConfig) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="ascii") as fh:
        return config_from_dict(json.load(fh))
