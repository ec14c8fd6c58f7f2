"""Shared fixtures.

The long closed-loop simulations are expensive (500 s horizons at h = 1e-3),
so every scenario run is computed once per session and shared between the
acceptance tests and the metrics tests.
"""

import numpy as np
import pytest

from fdsc.benchmark import (builtin_benchmark, build_bank, controller_band,
                            hf_signal, inserted_signal, lf_signal, mixed_signal)
from fdsc.runtime import (BankEntry, ControllerBank, make_disturbance,
                          simulate_switched)

H = 1e-3


@pytest.fixture(scope="session")
def cfg():
    return builtin_benchmark()


@pytest.fixture(scope="session")
def bank(cfg):
    return build_bank(cfg)


@pytest.fixture(scope="session")
def single_bank(cfg):
    """Factory for one-entry banks that pin a named controller."""

    def make(name):
        return ControllerBank(entries=(BankEntry(K=cfg.controllers[name],
                                                 band=controller_band(cfg, name),
                                                 Q=np.eye(2)),))

    return make


@pytest.fixture(scope="session")
def run_scenario_traj(cfg):
    def run(bank_, spec, t_span, h=H):
        d = make_disturbance(spec)
        return simulate_switched(cfg.plant, bank_, d, (0.0, 0.0), t_span, h)

    return run


@pytest.fixture(scope="session")
def lf_runs(bank, single_bank, run_scenario_traj):
    """Stationary low-frequency scenario, 500 s, all controllers."""
    spec = lf_signal()
    runs = {name: run_scenario_traj(single_bank(name), spec, (0.0, 500.0))
            for name in ("PassC-LF", "PassC-HF", "PassC-EF")}
    runs["FDSC"] = run_scenario_traj(bank, spec, (0.0, 500.0))
    return runs


@pytest.fixture(scope="session")
def hf_runs(bank, single_bank, run_scenario_traj):
    """Stationary high-frequency scenario, 500 s."""
    spec = hf_signal()
    runs = {name: run_scenario_traj(single_bank(name), spec, (0.0, 500.0))
            for name in ("PassC-LF", "PassC-HF")}
    runs["FDSC"] = run_scenario_traj(bank, spec, (0.0, 500.0))
    return runs


@pytest.fixture(scope="session")
def mixed_runs(bank, single_bank, run_scenario_traj):
    """Mixed-spectrum sweep over rho_p, 500 s each."""
    out = {}
    for rho_p in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
        spec = mixed_signal(rho_p)
        out[rho_p] = {
            "PassC-LF": run_scenario_traj(single_bank("PassC-LF"), spec, (0.0, 500.0)),
            "PassC-HF": run_scenario_traj(single_bank("PassC-HF"), spec, (0.0, 500.0)),
            "FDSC": run_scenario_traj(bank, spec, (0.0, 500.0)),
        }
    return out


@pytest.fixture(scope="session")
def inserted_runs(bank, single_bank, run_scenario_traj):
    """Inserted low-frequency window sweep over rho_t."""
    out = {}
    for rho_t in (0.1, 0.3, 0.5):
        spec = inserted_signal(rho_t)
        span = (0.0, 1000.0 + 500.0 * rho_t)
        out[rho_t] = {
            "PassC-HF": run_scenario_traj(single_bank("PassC-HF"), spec, span),
            "FDSC": run_scenario_traj(bank, spec, span),
        }
    return out
