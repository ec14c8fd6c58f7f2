"""LTI system representation, frequency bands, and frequency-response evaluation.

Provides the open-loop plant and closed-loop quadruple types, LF/MF/HF
frequency bands together with their (Phi, Psi) matrix pairs, and grid-based
singular-value sweeps of the disturbance-to-output transfer function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StateSpacePlant",
    "LtiSystem",
    "FrequencyBand",
    "PHI_CT",
    "DEFAULT_OMEGA_MAX",
    "make_band",
    "psi_matrix",
    "band_indicator",
    "band_grid",
    "close_loop",
    "transfer_eval",
    "sigma_max_sweep",
    "band_peak_gain",
    "write_sweep_csv",
]

# Continuous-time gKYP outer factor weight.
PHI_CT = np.array([[0.0, 1.0], [1.0, 0.0]])

# HF bands are unbounded; grid operations truncate at this frequency (rad/s).
DEFAULT_OMEGA_MAX = 1.0e4


def _as_matrix(M, name: str, shape=None) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    if shape is not None and M.shape != shape:
        raise ValueError(f"{name} has shape {M.shape}, expected {shape}")
    return M


@dataclass(frozen=True)
class StateSpacePlant:
    """Open-loop plant xdot = A x + B1 d + B2 u, z = C x + D1 d + D2 u."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        B1 = _as_matrix(self.B1, "B1")
        B2 = _as_matrix(self.B2, "B2")
        if B1.shape[0] != n or B2.shape[0] != n:
            raise ValueError("B1/B2 row count must match A")
        C = _as_matrix(self.C, "C")
        if C.shape[1] != n:
            raise ValueError("C column count must match A")
        nz = C.shape[0]
        D1 = _as_matrix(self.D1, "D1", (nz, B1.shape[1]))
        D2 = _as_matrix(self.D2, "D2", (nz, B2.shape[1]))
        for name, val in (("A", A), ("B1", B1), ("B2", B2), ("C", C), ("D1", D1), ("D2", D2)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_d(self) -> int:
        return self.B1.shape[1]

    @property
    def n_u(self) -> int:
        return self.B2.shape[1]

    @property
    def n_z(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class LtiSystem:
    """Analysis quadruple xdot = A x + B d, z = C x + D d."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        B = _as_matrix(self.B, "B")
        if B.shape[0] != n:
            raise ValueError("B row count must match A")
        C = _as_matrix(self.C, "C")
        if C.shape[1] != n:
            raise ValueError("C column count must match A")
        D = _as_matrix(self.D, "D", (C.shape[0], B.shape[1]))
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_d(self) -> int:
        return self.B.shape[1]

    @property
    def n_z(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class FrequencyBand:
    """A low/middle/high frequency band owning its Psi matrix.

    kind is one of 'LF', 'MF', 'HF'; cutoffs holds (w_l,), (w_1, w_2) or
    (w_h,) in rad/s.
    """

    kind: str
    cutoffs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))
        if self.kind not in ("LF", "MF", "HF"):
            raise ValueError(f"unknown band kind {self.kind!r}")
        expect = 2 if self.kind == "MF" else 1
        if len(self.cutoffs) != expect:
            raise ValueError(f"{self.kind} band takes {expect} cutoff(s), got {len(self.cutoffs)}")
        if any(c <= 0 for c in self.cutoffs):
            raise ValueError("cutoffs must be strictly positive")
        if self.kind == "MF" and self.cutoffs[0] >= self.cutoffs[1]:
            raise ValueError("MF band requires w_1 < w_2")

    def contains(self, omega) -> np.ndarray:
        """Strict-interior membership test on |omega| (positive-axis convention)."""
        w = np.abs(np.asarray(omega, dtype=float))
        if self.kind == "LF":
            return w < self.cutoffs[0]
        if self.kind == "HF":
            return w > self.cutoffs[0]
        return (self.cutoffs[0] < w) & (w < self.cutoffs[1])

    def __str__(self):
        cuts = ", ".join(f"{c:g}" for c in self.cutoffs)
        return f"{self.kind}({cuts})"


def make_band(kind: str, cutoffs) -> FrequencyBand:
    """Build a validated FrequencyBand from a kind and cutoff list."""
    return FrequencyBand(kind=kind, cutoffs=tuple(np.atleast_1d(cutoffs)))


def psi_matrix(band: FrequencyBand) -> np.ndarray:
    """Return the 2x2 Psi matrix of the band (complex Hermitian for MF)."""
    if band.kind == "LF":
        wl = band.cutoffs[0]
        return np.array([[-1.0, 0.0], [0.0, wl * wl]])
    if band.kind == "HF":
        wh = band.cutoffs[0]
        return np.array([[1.0, 0.0], [0.0, -wh * wh]])
    w1, w2 = band.cutoffs
    wc = 0.5 * (w1 + w2)
    return np.array([[-1.0, 1j * wc], [-1j * wc, -w1 * w2]], dtype=complex)


def band_indicator(band: FrequencyBand, omega) -> np.ndarray:
    """Real scalar q(w) = v(w)* Psi v(w), v(w) = [jw, 1]^T.

    Positive strictly inside the band, negative strictly outside; used as the
    sign oracle for the Psi conventions.
    """
    w = np.asarray(omega, dtype=float)
    Psi = psi_matrix(band)
    q = (Psi[0, 0] * w * w
         + Psi[1, 1]
         + 1j * w * (Psi[1, 0] - Psi[0, 1]))
    return np.real(q)


def close_loop(plant: StateSpacePlant, K) -> LtiSystem:
    """Close the loop with state feedback u = K x on the disturbance channel."""
    K = _as_matrix(K, "K")
    if K.shape != (plant.n_u, plant.n):
        raise ValueError(f"K has shape {K.shape}, expected {(plant.n_u, plant.n)}")
    return LtiSystem(
        A=plant.A + plant.B2 @ K,
        B=plant.B1,
        C=plant.C + plant.D2 @ K,
        D=plant.D1,
    )


def transfer_eval(sys: LtiSystem, omega: float) -> np.ndarray:
    """Evaluate G(jw) = C (jwI - A)^-1 B + D."""
    n = sys.n
    M = 1j * float(omega) * np.eye(n) - sys.A
    try:
        X = np.linalg.solve(M, sys.B)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular resolvent at omega={omega}") from exc
    if not np.all(np.isfinite(X)):
        raise ValueError(f"singular resolvent at omega={omega}")
    return sys.C @ X + sys.D

def sigma_max_sweep(sys: LtiSystem, grid) -> list:
    """Largest singular value of G(jw) at each grid frequency."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    out = []
    for w in grid:
        G = transfer_eval(sys, w)
        out.append((float(w), float(np.linalg.svd(G, compute_uv=False)[0])))
    return out


def band_grid(band: FrequencyBand, points_per_decade: int,
              omega_max: float = DEFAULT_OMEGA_MAX,
              omega_min: float = 1.0e-3) -> np.ndarray:
    """Log-spaced grid covering the positive part of the band (HF truncated)."""
    if points_per_decade < 10:
        raise ValueError("points_per_decade must be >= 10")
    if band.kind == "LF":
        lo, hi = omega_min, band.cutoffs[0]
    elif band.kind == "HF":
        lo, hi = band.cutoffs[0], omega_max
    else:
        lo, hi = band.cutoffs
    if hi <= lo:
        raise ValueError("degenerate band grid")
    npts = max(2, int(np.ceil(points_per_decade * np.log10(hi / lo))))
    return np.geomspace(lo, hi, npts)


def band_peak_gain(sys: LtiSystem, band: FrequencyBand, points_per_decade: int = 100,
                   omega_max: float = DEFAULT_OMEGA_MAX) -> float:
    """Maximum of sigma_max_sweep over a log grid covering the band."""
    grid = band_grid(band, points_per_decade, omega_max=omega_max)
    return max(s for _, s in sigma_max_sweep(sys, grid))


def write_sweep_csv(path, sweep) -> None:
    """Write a (omega, sigma_max) sweep as CSV."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("omega_rad_s,sigma_max\n")
        for w, s in sweep:
            fh.write(f"{w!r},{s!r}\n")
