"""Switching law, disturbance generators, and switched closed-loop simulation.

Implements the frequency-dependent excited power/energy functions, the argmax
switching rule with optional dwell-time and hysteresis guards, deterministic
sum-of-sines/mixed/piecewise disturbance signals, and a fixed-step RK4
simulator for the switched closed loop.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model_core import FrequencyBand, StateSpacePlant

__all__ = [
    "BankEntry",
    "ControllerBank",
    "SignalSpec",
    "Trajectory",
    "SlidingMotionWarning",
    "SimulationDivergence",
    "fd_epf",
    "fd_eef",
    "select_controller",
    "make_disturbance",
    "simulate_switched",
    "rk4_step",
    "write_trajectory_csv",
    "write_switches_csv",
]

# Sliding-motion guard: warn when switches occur on more than this fraction
# of steps within any window of this many seconds.
GUARD_WINDOW_S = 1.0
GUARD_FRACTION = 0.5


class SlidingMotionWarning(UserWarning):
    """Emitted when the switching signal chatters at sliding-motion rates."""


class SimulationDivergence(RuntimeError):
    """State became non-finite during integration."""


@dataclass(frozen=True)
class BankEntry:
    """One candidate controller: gain, band, and switching weight."""

    K: np.ndarray
    band: FrequencyBand
    Q: np.ndarray

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-10 * (1 + np.abs(Q).max())):
            raise ValueError("Q must be symmetric")
        if np.linalg.eigvalsh(Q)[0] <= 0:
            raise ValueError("Q must be positive definite")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "Q", Q)


@dataclass(frozen=True)
class ControllerBank:
    """Ordered candidate controllers plus switching-law guard parameters."""

    entries: tuple
    dwell_time: float = 0.0
    hysteresis: float = 0.0

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise ValueError("bank needs at least one entry")
        if self.dwell_time < 0 or self.hysteresis < 0:
            raise ValueError("dwell_time and hysteresis must be >= 0")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SignalSpec:
    """Deterministic disturbance description.

    kind 'sum_of_sines' uses tones [(amplitude, rad/s, phase)];
    kind 'mixed' uses mix = (rho_p, base spec, added spec) meaning
    base(t) + rho_p * added(t); kind 'piecewise' uses schedule =
    [((t0, t1), spec), ...] with contiguous, non-overlapping intervals.
    """

    kind: str
    tones: tuple = ()
    mix: tuple | None = None
    schedule: tuple = ()

    def __post_init__(self):
        if self.kind not in ("sum_of_sines", "mixed", "piecewise"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        tones = tuple((float(a), float(w), float(p)) for a, w, p in self.tones)
        object.__setattr__(self, "tones", tones)
        if self.kind == "mixed":
            if self.mix is None:
                raise ValueError("mixed signal needs mix=(rho_p, base, added)")
        if self.kind == "piecewise":
            schedule = tuple(((float(a), float(b)), spec) for (a, b), spec in self.schedule)
            if not schedule:
                raise ValueError("piecewise signal needs a schedule")
            for (a, b), _ in schedule:
                if b <= a:
                    raise ValueError("schedule intervals must have positive length")
            for ((_, b0), _), ((a1, _), _) in zip(schedule, schedule[1:]):
                if not np.isclose(a1, b0):
                    raise ValueError("schedule intervals must be contiguous")
            object.__setattr__(self, "schedule", schedule)


def make_disturbance(spec: SignalSpec):
    """Compile a SignalSpec into a deterministic vectorized callable d(t)."""
    if spec.kind == "sum_of_sines":
        tones = spec.tones

        def signal(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            for a, w, p in tones:
                out = out + a * np.sin(w * t + p)
            return out

        return signal
    if spec.kind == "mixed":
        rho_p, base_spec, added_spec = spec.mix
        base = make_disturbance(base_spec)
        added = make_disturbance(added_spec)
        rho_p = float(rho_p)
        return lambda t: base(t) + rho_p * added(t)

    pieces = [(a, b, make_disturbance(sub)) for (a, b), sub in spec.schedule]
    t_first, t_last = pieces[0][0], pieces[-1][1]

    def signal(t):
        t = np.asarray(t, dtype=float)
        # the last interval is treated as closed at its right endpoint so the
        # final sample of a simulation grid is defined
        if np.any(t < t_first) or np.any(t > t_last):
            raise ValueError("piecewise signal queried outside its schedule")
        out = np.zeros_like(t)
        for a, b, fn in pieces:
            mask = (t >= a) & (t < b) if b < t_last else (t >= a) & (t <= b)
            if np.any(mask):
                out[mask] = fn(t[mask])
        return out

    return signal


def fd_epf(x, xdot, band: FrequencyBand, Q) -> float:
    """Instantaneous frequency-dependent excited power.

    Equals [xdot* x*] (Psi kron Q) [xdot; x] for real data; closed forms:
    LF -> w_l^2 x'Qx - xdot'Q xdot; HF -> xdot'Q xdot - w_h^2 x'Qx;
    MF -> -xdot'Q xdot - w_1 w_2 x'Qx (the imaginary cross terms cancel).
    """
    x = np.asarray(x, dtype=float).ravel()
    xdot = np.asarray(xdot, dtype=float).ravel()
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if x.shape != xdot.shape or Q.shape != (x.size, x.size):
        raise ValueError("dimension mismatch in fd_epf")
    xQx = float(x @ Q @ x)
    dQd = float(xdot @ Q @ xdot)
    if band.kind == "LF":
        wl = band.cutoffs[0]
        return wl * wl * xQx - dQd
    if band.kind == "HF":
        wh = band.cutoffs[0]
        return dQd - wh * wh * xQx
    w1, w2 = band.cutoffs
    return -dQd - w1 * w2 * xQx


def fd_eef(traj: "Trajectory", band: FrequencyBand, Q, window) -> float:
    """Trapezoid integral of the excited power along a stored trajectory window."""
    t_a, t_b = float(window[0]), float(window[1])
    mask = (traj.t >= t_a) & (traj.t <= t_b)
    if mask.sum() < 2:
        raise ValueError("empty or degenerate fd_eef window")
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    x = traj.x[mask]
    xd = traj.xdot[mask]
    xQx = np.einsum("ki,ij,kj->k", x, Q, x)
    dQd = np.einsum("ki,ij,kj->k", xd, Q, xd)
    if band.kind == "LF":
        p = band.cutoffs[0] ** 2 * xQx - dQd
    elif band.kind == "HF":
        p = dQd - band.cutoffs[0] ** 2 * xQx
    else:
        p = -dQd - band.cutoffs[0] * band.cutoffs[1] * xQx
    return float(np.trapezoid(p, traj.t[mask]))


def select_controller(x, xdot, bank: ControllerBank, prev, now: float) -> int:
    """Argmax-of-power switching rule with dwell/hysteresis guards.

    prev is (incumbent index, last switch time). Ties break toward the
    incumbent, then the lowest index; within the dwell window the incumbent
    is kept; with hysteresis the challenger must exceed the incumbent's power
    by the hysteresis margin.
    """
    prev_idx, last_switch = int(prev[0]), float(prev[1])
    if now - last_switch < bank.dwell_time:
        return prev_idx
    powers = [fd_epf(x, xdot, e.band, e.Q) for e in bank.entries]
    best = max(range(len(powers)), key=lambda i: (powers[i], i == prev_idx, -i))
    if best == prev_idx:
        return prev_idx
    if powers[best] > powers[prev_idx] + bank.hysteresis:
        return best
    return prev_idx


@dataclass
class Trajectory:
    """Uniformly sampled switched closed-loop run."""

    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    u: np.ndarray
    d: np.ndarray
    z: np.ndarray
    sigma: np.ndarray
    switch_times: list = field(default_factory=list)
    switch_records: list = field(default_factory=list)  # (t, from, to)
    h: float = 0.0
    sliding_warning: bool = False

    def window_mask(self, window) -> np.ndarray:
        t_a, t_b = float(window[0]), float(window[1])
        if t_a < self.t[0] - 1e-12 or t_b > self.t[-1] + 1e-12:
            raise ValueError("window outside trajectory span")
        return (self.t >= t_a) & (self.t <= t_b)


def rk4_step(A, x, b0, bh, b1, h):
    """One classical RK4 step of xdot = A x + b(t) with b sampled at t, t+h/2, t+h."""
    k1 = A @ x + b0
    k2 = A @ (x + (0.5 * h) * k1) + bh
    k3 = A @ (x + (0.5 * h) * k2) + bh
    k4 = A @ (x + h * k3) + b1
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate_switched(plant: StateSpacePlant, bank: ControllerBank, d, x0,
                      t_span, h: float) -> Trajectory:
    """Fixed-step RK4 simulation of the switched closed loop.

    The active index is re-evaluated once per step boundary from (x, xdot)
    with xdot computed under the incumbent controller (the causally available
    derivative); the stored xdot sample is then recomputed under the selected
    index so that xdot[k] is exactly the right-hand side at (x[k], d_k,
    sigma[k]).
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError("empty time span")
    n = plant.n
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape != (n,):
        raise ValueError("x0 dimension mismatch")

    A_cl = [plant.A + plant.B2 @ e.K for e in bank.entries]
    C_cl = [plant.C + plant.D2 @ e.K for e in bank.entries]
    bands = [e.band for e in bank.entries]
    Qs = [e.Q for e in bank.entries]
    kinds = [b.kind for b in bands]
    wterm = []
    for b in bands:
        if b.kind == "MF":
            wterm.append(b.cutoffs[0] * b.cutoffs[1])
        else:
            wterm.append(b.cutoffs[0] ** 2)

    N = int(round((t1 - t0) / h)) + 1
    t = t0 + np.arange(N) * h
    d_grid = np.atleast_2d(np.asarray(d(t), dtype=float).T).T.reshape(N, -1)
    d_mid = np.atleast_2d(np.asarray(d(t[:-1] + 0.5 * h), dtype=float).T).T.reshape(N - 1, -1)
    if d_grid.shape[1] != plant.n_d:
        raise ValueError("disturbance dimension mismatch")
    b_grid = d_grid @ plant.B1.T
    b_mid = d_mid @ plant.B1.T

    xs = np.empty((N, n))
    xds = np.empty((N, n))
    sigma = np.empty(N, dtype=int)
    switch_times: list = []
    switch_records: list = []
    switch_steps: list = []

    x = x0.copy()
    si = 0
    last_switch = -np.inf
    n_entries = len(bank.entries)
    dwell, hyst = bank.dwell_time, bank.hysteresis
    for k in range(N):
        if not np.all(np.isfinite(x)):
            raise SimulationDivergence(f"non-finite state at t={t[k]:.6g}")
        bk = b_grid[k]
        xd = A_cl[si] @ x + bk
        if n_entries > 1 and (t[k] - last_switch) >= dwell:
            best, best_p, inc_p = si, None, None
            powers = []
            for i in range(n_entries):
                Q = Qs[i]
                xQx = x @ Q @ x
                dQd = xd @ Q @ xd
                if kinds[i] == "LF":
                    p = wterm[i] * xQx - dQd
                elif kinds[i] == "HF":
                    p = dQd - wterm[i] * xQx
                else:
                    p = -dQd - wterm[i] * xQx
                powers.append(p)
            best = max(range(n_entries), key=lambda i: (powers[i], i == si, -i))
            if best != si and powers[best] > powers[si] + hyst:
                switch_times.append(float(t[k]))
                switch_records.append((float(t[k]), si, best))
                switch_steps.append(k)
                si = best
                last_switch = t[k]
                xd = A_cl[si] @ x + bk
        xs[k] = x
        xds[k] = xd
        sigma[k] = si
        if k < N - 1:
            x = rk4_step(A_cl[si], x, bk, b_mid[k], b_grid[k + 1], h)

    z = np.empty((N, plant.n_z))
    u = np.empty((N, plant.n_u))
    for i in range(n_entries):
        mask = sigma == i
        if np.any(mask):
            z[mask] = xs[mask] @ C_cl[i].T + d_grid[mask] @ plant.D1.T
            u[mask] = xs[mask] @ bank.entries[i].K.T

    traj = Trajectory(t=t, x=xs, xdot=xds, u=u, d=d_grid, z=z, sigma=sigma,
                      switch_times=switch_times, switch_records=switch_records, h=h)
    traj.sliding_warning = _sliding_guard(switch_steps, h, N)
    return traj


def _sliding_guard(switch_steps, h: float, n_steps: int) -> bool:
    """Warn when any 1 s window contains switches on > 50% of its steps."""
    if not switch_steps:
        return False
    win = max(1, int(round(GUARD_WINDOW_S / h)))
    limit = GUARD_FRACTION * win
    steps = np.asarray(switch_steps)
    lo = 0
    for hi in range(len(steps)):
        while steps[hi] - steps[lo] >= win:
            lo += 1
        if hi - lo + 1 > limit:
            warnings.warn(
                f"sliding-motion suspicion: {hi - lo + 1} switches within "
                f"{GUARD_WINDOW_S:g} s around t={steps[hi] * h:.3g}",
                SlidingMotionWarning)
            return True
    return False


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Stream a trajectory as CSV: t,x1..xn,xdot1..xdotn,u1..,z1..,d,sigma."""
    n = traj.x.shape[1]
    nu = traj.u.shape[1]
    nz = traj.z.shape[1]
    nd = traj.d.shape[1]
    cols = (["t"] + [f"x{i+1}" for i in range(n)] + [f"xdot{i+1}" for i in range(n)]
            + [f"u{i+1}" for i in range(nu)] + [f"z{i+1}" for i in range(nz)]
            + (["d"] if nd == 1 else [f"d{i+1}" for i in range(nd)]) + ["sigma"])
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(traj.t.size):
            row = [repr(float(traj.t[k]))]
            row += [repr(float(v)) for v in traj.x[k]]
            row += [repr(float(v)) for v in traj.xdot[k]]
            row += [repr(float(v)) for v in traj.u[k]]
            row += [repr(float(v)) for v in traj.z[k]]
            row += [repr(float(v)) for v in traj.d[k]]
            row.append(str(int(traj.sigma[k])))
            fh.write(",".join(row) + "\n")


def write_switches_csv(path, traj: Trajectory) -> None:
    """Write switch events as CSV: t_switch,from,to."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("t_switch,from,to\n")
        for t_sw, i_from, i_to in traj.switch_records:
            fh.write(f"{t_sw!r},{i_from},{i_to}\n")
