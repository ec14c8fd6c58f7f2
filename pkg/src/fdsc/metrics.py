"""Trajectory and signal analytics.

Energy ratios and windowed output energy by trapezoid integration, dominance
degree of a band via a rectangular-window DFT, and switching statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_core import FrequencyBand
from .runtime import Trajectory

__all__ = [
    "BandEnergyReport",
    "SwitchingStats",
    "l2_gain_ratio",
    "output_energy",
    "dominance_degree",
    "switching_stats",
    "write_dominance_csv",
]

MIN_DISTURBANCE_ENERGY = 1.0e-12


@dataclass(frozen=True)
class BandEnergyReport:
    """Windowed spectral energy split of a signal against one band."""

    window: tuple
    in_band: float
    total: float
    alpha: float


@dataclass(frozen=True)
class SwitchingStats:
    """Per-controller active durations and activation fractions."""

    durations: tuple
    beta: tuple
    switch_count: int


def output_energy(traj: Trajectory, window=None) -> float:
    """Trapezoid integral of z'z over the window (defaults to the full span)."""
    if window is None:
        window = (traj.t[0], traj.t[-1])
    mask = traj.window_mask(window)
    zz = np.sum(traj.z[mask] ** 2, axis=1)
    return float(np.trapezoid(zz, traj.t[mask]))


def l2_gain_ratio(traj: Trajectory, window=None) -> float:
    """Energy ratio int z'z dt / int d'd dt over the window."""
    if window is None:
        window = (traj.t[0], traj.t[-1])
    mask = traj.window_mask(window)
    dd = np.sum(traj.d[mask] ** 2, axis=1)
    denom = float(np.trapezoid(dd, traj.t[mask]))
    if denom <= MIN_DISTURBANCE_ENERGY:
        raise ValueError("disturbance energy too small for a gain ratio")
    zz = np.sum(traj.z[mask] ** 2, axis=1)
    return float(np.trapezoid(zz, traj.t[mask])) / denom


def dominance_degree(samples, dt: float, band: FrequencyBand, window=None,
                     t0: float = 0.0) -> BandEnergyReport:
    """Fraction of windowed spectral energy inside the band.

    samples are uniform scalar signal samples with spacing dt starting at t0;
    the rectangular-window DFT of the selected window is binned and a bin
    counts as in-band when its center frequency lies strictly inside the band.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    t = t0 + dt * np.arange(samples.size)
    if window is None:
        window = (t[0], t[-1])
    mask = (t >= float(window[0])) & (t <= float(window[1]))
    seg = samples[mask]
    if seg.size < 64:
        raise ValueError("dominance window too short (need >= 64 samples)")
    spec = np.fft.rfft(seg)
    power = np.abs(spec) ** 2
    # single-sided correction so tone powers match their analytic values
    power[1:] *= 2.0
    if seg.size % 2 == 0:
        power[-1] /= 2.0
    omega = 2.0 * np.pi * np.fft.rfftfreq(seg.size, d=dt)
    in_mask = band.contains(omega)
    total = float(power.sum())
    in_band = float(power[in_mask].sum())
    alpha = in_band / total if total > 0 else 0.0
    return BandEnergyReport(window=(float(window[0]), float(window[1])),
                            in_band=in_band, total=total, alpha=alpha)


def switching_stats(traj: Trajectory, n_entries: int | None = None,
                    window=None) -> SwitchingStats:
    """Active durations and normalized activation fractions per controller."""
    if traj.t.size == 0:
        raise ValueError("empty trajectory")
    if window is None:
        mask = np.ones(traj.t.size, dtype=bool)
    else:
        mask = traj.window_mask(window)
    sigma = traj.sigma[mask]
    if n_entries is None:
        n_entries = int(sigma.max()) + 1 if sigma.size else 1
    # each sample accounts for one step of length h except the last
    counts = np.bincount(sigma, minlength=n_entries).astype(float)
    durations = counts * traj.h
    total = durations.sum()
    beta = durations / total if total > 0 else durations
    switch_count = int(np.count_nonzero(np.diff(sigma)))
    return SwitchingStats(durations=tuple(durations), beta=tuple(beta),
                          switch_count=switch_count)


def write_dominance_csv(path, reports) -> None:
    """Write dominance sweeps as CSV: window_start,window_end,alpha."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("window_start,window_end,alpha\n")
        for rep in reports:
            fh.write(f"{rep.window[0]!r},{rep.window[1]!r},{rep.alpha!r}\n")
