"""Finite-frequency gain LMIs, switching-design LMIs, and related analysis.

Assembles the band-restricted bounded-realness LMI for a single closed loop,
the coupled stability/performance LMI family for a switching controller bank,
solves the in-band gain minimization that produces the switching weights Q_i,
and evaluates the singular-value gap between two closed loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_core import (PHI_CT, FrequencyBand, LtiSystem, StateSpacePlant,
                         band_peak_gain, close_loop, psi_matrix, sigma_max_sweep)
from .sdp import (LmiBlock, LmiProblem, MatrixVariable, check_solution,
                  embed_hermitian, epsilon_margin, extract_hermitian,
                  minimize_objective, solve_feasibility)

__all__ = [
    "GainBound",
    "SwitchingDesign",
    "UnboundedGainError",
    "assemble_gkyp_lmi",
    "finite_frequency_gain",
    "assemble_theorem1",
    "synthesize_Q",
    "gap_function",
]

HURWITZ_TOL = -1.0e-10
GAIN_CAP = 1.0e6


class UnboundedGainError(RuntimeError):
    """Raised when no finite in-band gain certificate exists below the cap."""


@dataclass(frozen=True)
class GainBound:
    """A certified finite-frequency gain: gamma with its (P, Q) certificate."""

    band: FrequencyBand
    gamma: float
    certificate: dict
    grid_peak: float


@dataclass(frozen=True)
class SwitchingDesign:
    """Q weights and per-band gains certified by the switching LMI family."""

    bank_Q: tuple        # per-entry Q_i (real symmetric, positive definite)
    gammas: tuple        # per-entry gamma_i (sqrt of the certified mu_i)
    gamma_tol: float
    certificates: dict   # P_i, P_i^s assignments plus solver metadata
    problem: LmiProblem  # the assembled (scaled) problem, for re-certification
    psi_scale: float     # Psi normalization used at assembly time


def _psi_scale(*bands: FrequencyBand) -> float:
    """Shared conditioning scale: max(1, largest |Psi| entry over the bands)."""
    s = 1.0
    for band in bands:
        s = max(s, float(np.abs(psi_matrix(band)).max()))
    return s


def _kron_rows(outer_top: np.ndarray, outer_bottom: np.ndarray):
    """Row blocks of the stacked outer factor [top; bottom]."""
    return (outer_top, outer_bottom)


def _weighted_terms(name: str, weight2: np.ndarray, rows, scale: float = 1.0):
    """Terms for rows' (weight2 kron V) rows with a 2x2 weight matrix."""
    terms = []
    for r in range(2):
        for c in range(2):
            w = weight2[r, c] * scale
            if w == 0:
                continue
            terms.append((name, w * rows[r].conj().T, rows[c], 1.0))
    return terms


def _mu_terms(name: str, rows_block: np.ndarray, sign: float):
    """Rank-1 terms summing to sign * mu * rows_block' rows_block."""
    return [(name, sign * rows_block[t:t + 1].conj().T, rows_block[t:t + 1], 1.0)
            for t in range(rows_block.shape[0])]


def assemble_gkyp_lmi(sys: LtiSystem, band: FrequencyBand,
                      psi_scale: float | None = None) -> LmiProblem:
    """Band-restricted gain LMI for one closed loop.

    Variables: P (symmetric, free), Q (symmetric or Hermitian, positive
    definite), mu = gamma^2 (1x1, positive definite). One block:
    [A B; I 0]^* (Phi kron P + Psi kron Q) [A B; I 0]
      + [C D; 0 I]^* diag(I, -mu I) [C D; 0 I]  < 0.
    Psi is divided by psi_scale for conditioning; the solved Q must be
    divided by the same factor to recover original units (finite_frequency_gain
    does this automatically). MF bands produce a complex problem that is
    passed through embed_hermitian.
    """
    n, nd = sys.n, sys.n_d
    Psi = psi_matrix(band)
    s = _psi_scale(band) if psi_scale is None else float(psi_scale)
    complex_band = np.iscomplexobj(Psi)
    structure = "hermitian" if complex_band else "symmetric"

    N0 = np.hstack([sys.A, sys.B])          # xdot rows of the outer factor
    N1 = np.hstack([np.eye(n), np.zeros((n, nd))])
    M0 = np.hstack([sys.C, sys.D])
    M1 = np.hstack([np.zeros((nd, n)), np.eye(nd)])

    terms = []
    terms += _weighted_terms("P", PHI_CT, (N0, N1))
    terms += _weighted_terms("Q", Psi, (N0, N1), scale=1.0 / s)
    terms += _mu_terms("mu", M1, -1.0)
    constant = M0.T @ M0

    variables = (
        MatrixVariable("P", n, structure, "free"),
        MatrixVariable("Q", n, structure, "positive_definite"),
        MatrixVariable("mu", 1, "symmetric", "positive_definite"),
    )
    block = LmiBlock(constant if not complex_band else constant.astype(complex),
                     tuple(terms), "negative_definite", label=f"gkyp[{band}]")
    problem = LmiProblem(variables, (block,))
    if complex_band:
        problem = embed_hermitian(problem)
    return problem


def finite_frequency_gain(sys: LtiSystem, band: FrequencyBand,
                          tolerance: float = 1.0e-6) -> GainBound:
    """Minimize the certified in-band gain gamma over the gKYP LMI."""
    s = _psi_scale(band)
    problem = assemble_gkyp_lmi(sys, band, psi_scale=s)
    problem = LmiProblem(problem.variables, problem.blocks, (("mu", np.array([[1.0]])),))
    report = minimize_objective(problem, tolerance)
    if report.status != "feasible" or report.objective_value > GAIN_CAP ** 2:
        raise UnboundedGainError(
            f"no gain certificate below cap {GAIN_CAP:g} for band {band} "
            f"(status {report.status})")
    mu = float(report.assignment["mu"][0, 0])
    cert = {}
    for name in ("P", "Q"):
        val = report.assignment[name]
        if band.kind == "MF":
            val = extract_hermitian(val)
        if name == "Q":
            val = val / s
        cert[name] = val
    grid_peak = band_peak_gain(sys, band)
    return GainBound(band=band, gamma=float(np.sqrt(mu)), certificate=cert,
                     grid_peak=grid_peak)


def _check_hurwitz(A: np.ndarray, label: str):
    eigs = np.linalg.eigvals(A)
    if np.max(eigs.real) >= HURWITZ_TOL:
        raise ValueError(f"{label} is not Hurwitz (max Re eig = {np.max(eigs.real):g})")


def assemble_theorem1(subsystems, bands, fixed_Q=None, gamma_fixed=None,
                      psi_scale: float | None = None) -> LmiProblem:
    """Coupled switching LMI family over all ordered band pairs.

    For each ordered pair (i, j), i != j, with E_i = [A_i; I] and
    F_i = [A_i B_i; I 0], G_i = [C_i D_i; 0 I]:
      stability:    E_i^* (Phi kron P_i^s + Psi_i kron Q_i - Psi_j kron Q_j) E_i < 0
      performance:  F_i^* (Phi kron P_i + Psi_i kron Q_i - Psi_j kron Q_j) F_i
                      + G_i^* diag(I, -mu_i I) G_i < 0
    Q_i are shared across all blocks. fixed_Q pins the Q_i to given matrices
    (only P's remain free); gamma_fixed maps entry index -> gamma whose
    mu_i = gamma^2 is folded into the constants.
    """
    subsystems = list(subsystems)
    bands = list(bands)
    if len(subsystems) != len(bands):
        raise ValueError("subsystem count must equal band count")
    I_count = len(subsystems)
    if I_count < 2:
        raise ValueError("switching design needs at least 2 subsystems")
    if any(b.kind == "MF" for b in bands):
        raise ValueError("MF bands are not supported in the switching family")
    gamma_fixed = dict(gamma_fixed or {})
    s = _psi_scale(*bands) if psi_scale is None else float(psi_scale)

    variables = []
    fixed = {}
    if fixed_Q is None:
        for i in range(I_count):
            variables.append(MatrixVariable(f"Q_{i}", subsystems[i].n,
                                            "symmetric", "positive_definite"))
    else:
        fixed_Q = [np.asarray(Q, dtype=float) for Q in fixed_Q]
        if len(fixed_Q) != I_count:
            raise ValueError("fixed_Q count must equal subsystem count")
        for i, Q in enumerate(fixed_Q):
            fixed[f"Q_{i}"] = Q
    for i in range(I_count):
        n = subsystems[i].n
        variables.append(MatrixVariable(f"P_{i}", n, "symmetric", "free"))
        variables.append(MatrixVariable(f"Ps_{i}", n, "symmetric", "positive_definite"))
        if i not in gamma_fixed:
            variables.append(MatrixVariable(f"mu_{i}", 1, "symmetric", "positive_definite"))

    blocks = []
    for i in range(I_count):
        sys_i = subsystems[i]
        n, nd = sys_i.n, sys_i.n_d
        Psi_i = np.real(psi_matrix(bands[i])) / s
        E0, E1 = sys_i.A, np.eye(n)
        F0 = np.hstack([sys_i.A, sys_i.B])
        F1 = np.hstack([np.eye(n), np.zeros((n, nd))])
        G0 = np.hstack([sys_i.C, sys_i.D])
        G1 = np.hstack([np.zeros((nd, n)), np.eye(nd)])
        for j in range(I_count):
            if j == i:
                continue
            Psi_j = np.real(psi_matrix(bands[j])) / s

            def q_terms(rows):
                terms = []
                const = np.zeros((rows[0].shape[1], rows[0].shape[1]))
                for name, Psi, sign in ((f"Q_{i}", Psi_i, 1.0), (f"Q_{j}", Psi_j, -1.0)):
                    if name in fixed:
                        W = np.kron(sign * Psi, fixed[name])
                        stacked = np.vstack(rows)
                        const = const + stacked.T @ W @ stacked
                    else:
                        terms += _weighted_terms(name, sign * Psi, rows)
                return terms, const

            # stability block
            terms, const = q_terms((E0, E1))
            terms += _weighted_terms(f"Ps_{i}", PHI_CT, (E0, E1))
            blocks.append(LmiBlock(const, tuple(terms), "negative_definite",
                                   label=f"stability[{i},{j}]"))
            # performance block
            terms, const = q_terms((F0, F1))
            terms += _weighted_terms(f"P_{i}", PHI_CT, (F0, F1))
            const = const + G0.T @ G0
            if i in gamma_fixed:
                const = const - float(gamma_fixed[i]) ** 2 * (G1.T @ G1)
            else:
                terms += _mu_terms(f"mu_{i}", G1, -1.0)
            blocks.append(LmiBlock(const, tuple(terms), "negative_definite",
                                   label=f"performance[{i},{j}]"))
    return LmiProblem(tuple(variables), tuple(blocks))


def synthesize_Q(plant: StateSpacePlant, gains, bands, in_band_index: int,
                 gamma_tol: float, tolerance: float = 1.0e-6,
                 mu_weights=None) -> SwitchingDesign:
    """Solve the in-band gain minimization that produces the switching weights.

    Minimizes gamma_{in_band_index} subject to the full switching LMI family
    with all out-of-band mu_j pinned at gamma_tol^2; the result is certified
    independently by check_solution before being returned. When mu_weights is
    given (one positive weight per entry) the objective is the weighted sum
    sum_i w_i mu_i with no out-of-band pinning instead.
    """
    gains = [np.asarray(K, dtype=float) for K in gains]
    bands = list(bands)
    if not (0 <= in_band_index < len(gains)):
        raise ValueError("in_band_index out of range")
    subsystems = []
    for idx, K in enumerate(gains):
        sys_i = close_loop(plant, K)
        _check_hurwitz(sys_i.A, f"closed loop {idx}")
        subsystems.append(sys_i)
    if mu_weights is None:
        gamma_fixed = {j: gamma_tol for j in range(len(gains)) if j != in_band_index}
    else:
        mu_weights = [float(w) for w in mu_weights]
        if len(mu_weights) != len(gains) or any(w <= 0 for w in mu_weights):
            raise ValueError("mu_weights needs one positive weight per entry")
        gamma_fixed = {}
    s = _psi_scale(*bands)
    problem = assemble_theorem1(subsystems, bands, gamma_fixed=gamma_fixed,
                                psi_scale=s)
    mu_name = f"mu_{in_band_index}"
    if mu_weights is None:
        objective = ((mu_name, np.array([[1.0]])),)
    else:
        objective = tuple((f"mu_{i}", np.array([[w]]))
                          for i, w in enumerate(mu_weights))
    problem = LmiProblem(problem.variables, problem.blocks, objective)
    report = minimize_objective(problem, tolerance)
    if report.status != "feasible":
        detail = _most_violated(problem, tolerance)
        raise RuntimeError(f"switching design infeasible ({report.status}); "
                           f"most violated block: {detail}")
    residual = check_solution(problem, report.assignment, tolerance=epsilon_margin(problem))
    if not residual.passed:
        raise RuntimeError("solver output failed independent certification "
                           f"(worst margin {residual.worst:g})")
    gammas = []
    for idx in range(len(gains)):
        if idx in gamma_fixed:
            gammas.append(float(gamma_tol))
        else:
            gammas.append(float(np.sqrt(report.assignment[f"mu_{idx}"][0, 0])))
    bank_Q = tuple(report.assignment[f"Q_{i}"] / s for i in range(len(gains)))
    certs = {name: val for name, val in report.assignment.items()
             if name.startswith(("P_", "Ps_"))}
    certs["solver_iterations"] = report.iterations
    return SwitchingDesign(bank_Q=bank_Q, gammas=tuple(gammas), gamma_tol=float(gamma_tol),
                           certificates=certs, problem=problem, psi_scale=s)


def _most_violated(problem: LmiProblem, tolerance: float) -> str:
    """Identify the worst block via the phase-1 slack solve."""
    rep = solve_feasibility(problem, tolerance)
    if not rep.assignment:
        return "unavailable (solver returned no iterate)"
    res = check_solution(problem, rep.assignment, tolerance)
    worst_idx = int(np.argmin(res.block_eigs))
    label = problem.blocks[worst_idx].label or f"block {worst_idx}"
    return f"{label} (margin {res.block_eigs[worst_idx]:g}, slack {rep.slack:g})"


def gap_function(plant: StateSpacePlant, K_in, K_out, grid) -> list:
    """Per-frequency gap sigma_max(in-band loop) - sigma_max(out-of-band loop)."""
    sys_in = close_loop(plant, K_in)
    sys_out = close_loop(plant, K_out)
    sw_in = sigma_max_sweep(sys_in, grid)
    sw_out = sigma_max_sweep(sys_out, grid)
    return [(w, si - so) for (w, si), (_, so) in zip(sw_in, sw_out)]
