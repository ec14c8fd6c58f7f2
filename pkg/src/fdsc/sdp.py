"""Small dense semidefinite-programming core.

Represents LMI feasibility/minimization problems over symmetric or Hermitian
matrix variables with affine blocks, solves them through a conic interior
point backend, certifies solutions with an independent eigenvalue check, and
embeds complex Hermitian problems into real symmetric ones.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MatrixVariable",
    "LmiBlock",
    "LmiProblem",
    "SolveReport",
    "ResidualReport",
    "epsilon_margin",
    "assemble_block",
    "solve_feasibility",
    "minimize_objective",
    "embed_hermitian",
    "embed_matrix",
    "extract_hermitian",
    "check_solution",
]

DEFAULT_TOLERANCE = 1.0e-6
EIG_TOLERANCE = 1.0e-8


@dataclass(frozen=True)
class MatrixVariable:
    """A named symmetric or Hermitian matrix decision variable."""

    name: str
    dim: int
    structure: str = "symmetric"  # 'symmetric' | 'hermitian'
    definiteness: str = "free"    # 'free' | 'positive_definite'

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("variable dimension must be >= 1")
        if self.structure not in ("symmetric", "hermitian"):
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.definiteness not in ("free", "positive_definite"):
            raise ValueError(f"unknown definiteness {self.definiteness!r}")


@dataclass(frozen=True)
class LmiBlock:
    """An affine matrix inequality constant + sum_k coeff_k L_k V_k R_k (sense) 0.

    terms is a list of (variable name, L, R, coeff); the assembled block must
    come out Hermitian, which the assemblers guarantee by pairing each term
    with its conjugate-transpose partner.
    """

    constant: np.ndarray
    terms: tuple
    sense: str = "negative_definite"  # 'negative_definite' | 'positive_definite'
    label: str = ""

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.constant))
        if C.shape[0] != C.shape[1]:
            raise ValueError("block constant must be square")
        if not np.allclose(C, C.conj().T, atol=1e-12 * (1 + np.abs(C).max())):
            raise ValueError("block constant must be Hermitian")
        if self.sense not in ("negative_definite", "positive_definite"):
            raise ValueError(f"unknown sense {self.sense!r}")
        norm_terms = []
        for name, L, R, coeff in self.terms:
            L = np.atleast_2d(np.asarray(L))
            R = np.atleast_2d(np.asarray(R))
            if L.shape[0] != C.shape[0] or R.shape[1] != C.shape[1]:
                raise ValueError(f"term for {name!r} has incompatible factor shapes")
            norm_terms.append((str(name), L, R, complex(coeff)))
        object.__setattr__(self, "constant", C)
        object.__setattr__(self, "terms", tuple(norm_terms))

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def is_real(self) -> bool:
        if np.iscomplexobj(self.constant) and np.abs(self.constant.imag).max() > 0:
            return False
        for _, L, R, coeff in self.terms:
            for M in (L, R):
                if np.iscomplexobj(M) and np.abs(M.imag).max() > 0:
                    return False
            if abs(coeff.imag) > 0:
                return False
        return True


@dataclass(frozen=True)
class LmiProblem:
    """Matrix variables, affine LMI blocks, and an optional linear objective.

    The objective is a list of (variable name, coefficient matrix W) meaning
    sum_k Re trace(W_k^H V_k).
    """

    variables: tuple
    blocks: tuple
    objective: tuple = ()

    def __post_init__(self):
        variables = tuple(self.variables)
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        known = set(names)
        blocks = tuple(self.blocks)
        for blk in blocks:
            for name, _, _, _ in blk.terms:
                if name not in known:
                    raise ValueError(f"block references unknown variable {name!r}")
        objective = tuple((str(n), np.atleast_2d(np.asarray(W))) for n, W in self.objective)
        for name, W in objective:
            if name not in known:
                raise ValueError(f"objective references unknown variable {name!r}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "objective", objective)

    def variable(self, name: str) -> MatrixVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def is_real(self) -> bool:
        return (all(v.structure == "symmetric" for v in self.variables)
                and all(b.is_real() for b in self.blocks)
                and all(np.abs(np.asarray(W).imag).max() == 0 if np.iscomplexobj(W) else True
                        for _, W in self.objective))


@dataclass(frozen=True)
class SolveReport:
    """Solver outcome: status, assignment, objective, and block margins."""

    status: str  # 'feasible' | 'infeasible_or_unbounded' | 'max_iterations'
    assignment: dict
    objective_value: float
    worst_block_eig: float
    iterations: int
    slack: float = float("nan")


@dataclass(frozen=True)
class ResidualReport:
    """Independent certification of an assignment against a problem."""

    passed: bool
    block_eigs: tuple      # per-block signed extreme eigenvalue (sense-relative)
    variable_eigs: tuple   # per-PD-variable minimum eigenvalue
    worst: float


def epsilon_margin(problem: LmiProblem) -> float:
    """Strictness margin: 1e-7 * (1 + largest constant-block spectral norm)."""
    worst = 0.0
    for blk in problem.blocks:
        worst = max(worst, float(np.linalg.norm(blk.constant, 2)))
    return 1.0e-7 * (1.0 + worst)


def assemble_block(block: LmiBlock, assignment: dict) -> np.ndarray:
    """Numerically evaluate a block at a concrete assignment."""
    total = np.array(block.constant, dtype=complex)
    for name, L, R, coeff in block.terms:
        V = np.atleast_2d(np.asarray(assignment[name]))
        total = total + coeff * (L @ V @ R)
    if np.abs(total.imag).max() <= 1e-9 * (1.0 + np.abs(total).max()):
        total = total.real
    return total


def _objective_value(problem: LmiProblem, assignment: dict) -> float:
    val = 0.0
    for name, W in problem.objective:
        V = np.atleast_2d(np.asarray(assignment[name]))
        val += float(np.real(np.trace(W.conj().T @ V)))
    return val


def check_solution(problem: LmiProblem, assignment: dict,
                   tolerance: float = EIG_TOLERANCE) -> ResidualReport:
    """Certify an assignment by direct eigenvalue computation per block.

    Sense-relative margins: for a negative_definite block the reported value
    is -lambda_max (positive when satisfied); for positive_definite blocks and
    positive_definite variables it is lambda_min. Pass iff all margins are
    >= -tolerance.
    """
    for v in problem.variables:
        if v.name not in assignment:
            raise KeyError(f"assignment missing variable {v.name!r}")
    block_eigs = []
    for blk in problem.blocks:
        M = assemble_block(blk, assignment)
        eig = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        if blk.sense == "negative_definite":
            block_eigs.append(float(-eig[-1]))
        else:
            block_eigs.append(float(eig[0]))
    variable_eigs = []
    for v in problem.variables:
        if v.definiteness == "positive_definite":
            V = np.atleast_2d(np.asarray(assignment[v.name]))
            eig = np.linalg.eigvalsh(0.5 * (V + V.conj().T))
            variable_eigs.append(float(eig[0]))
    worst = min(block_eigs + variable_eigs) if (block_eigs or variable_eigs) else 0.0
    return ResidualReport(
        passed=bool(worst >= -tolerance),
        block_eigs=tuple(block_eigs),
        variable_eigs=tuple(variable_eigs),
        worst=worst,
    )


def _cvxpy_problem(problem: LmiProblem, eps: float, slack: bool):
    """Build the cvxpy model; returns (cp problem pieces) lazily imported."""
    import cvxpy as cp

    if not problem.is_real():
        raise ValueError("complex problem: apply embed_hermitian first")
    cvars = {}
    for v in problem.variables:
        if v.dim == 1:
            cvars[v.name] = cp.Variable((1, 1), name=v.name)
        else:
            cvars[v.name] = cp.Variable((v.dim, v.dim), symmetric=True, name=v.name)
    s = cp.Variable(name="__slack__") if slack else 0.0
    cons = []
    if slack:
        # bound the slack below; without this the phase-1 objective is
        # unbounded for strictly feasible homogeneous problems
        cons.append(s >= -1.0)
    for v in problem.variables:
        if v.definiteness == "positive_definite":
            lhs = cvars[v.name] - (eps - s) * np.eye(v.dim)
            cons.append(lhs >> 0 if v.dim > 1 else lhs[0, 0] >= 0)
    for blk in problem.blocks:
        expr = cp.Constant(np.real(blk.constant))
        for name, L, R, coeff in blk.terms:
            expr = expr + float(np.real(coeff)) * (np.real(L) @ cvars[name] @ np.real(R))
        expr = 0.5 * (expr + expr.T)
        d = blk.dim
        if blk.sense == "negative_definite":
            lhs = -(expr) - (eps - s) * np.eye(d)
        else:
            lhs = expr - (eps - s) * np.eye(d)
        cons.append(lhs >> 0 if d > 1 else lhs[0, 0] >= 0)
    return cp, cvars, s, cons


def _extract(problem: LmiProblem, cvars) -> dict:
    out = {}
    for v in problem.variables:
        val = cvars[v.name].value
        if val is None:
            val = np.full((v.dim, v.dim), np.nan)
        val = np.atleast_2d(np.asarray(val, dtype=float))
        out[v.name] = 0.5 * (val + val.T)
    return out


def _solve(cp, objective, cons) -> tuple:
    prob = cp.Problem(objective, cons)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            prob.solve(solver=cp.CLARABEL)
        except cp.error.SolverError:
            return prob, "error"
    return prob, prob.status


def solve_feasibility(problem: LmiProblem, tolerance: float = DEFAULT_TOLERANCE) -> SolveReport:
    """Phase-1 feasibility: minimize a common slack shift across all blocks.

    Feasible iff the optimal slack is <= 0 (all strict inequalities hold with
    the epsilon margin); the slack value is reported either way.
    """
    if not problem.blocks:
        raise ValueError("ill-posed problem: no blocks")
    # enforce twice the certification margin so solver round-off cannot
    # push a feasible solution below epsilon_margin at check time
    eps = 2.0 * epsilon_margin(problem)
    cp, cvars, s, cons = _cvxpy_problem(problem, eps, slack=True)
    prob, status = _solve(cp, cp.Minimize(s), cons)
    iters = _iteration_count(prob)
    if status in ("optimal", "optimal_inaccurate") and s.value is not None:
        slack = float(s.value)
        assignment = _extract(problem, cvars)
        if slack <= 0.0:
            rep = check_solution(problem, assignment)
            return SolveReport("feasible", assignment, _objective_value(problem, assignment),
                               rep.worst, iters, slack=slack)
        return SolveReport("infeasible_or_unbounded", assignment, float("nan"),
                           float("nan"), iters, slack=slack)
    if status in ("infeasible", "unbounded", "infeasible_inaccurate", "unbounded_inaccurate"):
        return SolveReport("infeasible_or_unbounded", {}, float("nan"), float("nan"), iters)
    return SolveReport("max_iterations", {}, float("nan"), float("nan"), iters)


def minimize_objective(problem: LmiProblem, tolerance: float = DEFAULT_TOLERANCE,
                       method: str = "direct") -> SolveReport:
    """Minimize the linear objective subject to the LMI blocks.

    method 'direct' solves the SDP in one shot; 'bisection' brackets a single
    scalar objective variable with solve_feasibility calls (fallback path for
    problems whose objective is one 1x1 variable).
    """
    if not problem.objective:
        raise ValueError("problem has no objective")
    if method == "bisection":
        return _minimize_bisection(problem, tolerance)
    eps = 2.0 * epsilon_margin(problem)
    cp, cvars, _, cons = _cvxpy_problem(problem, eps, slack=False)
    obj = 0
    for name, W in problem.objective:
        obj = obj + cp.sum(cp.multiply(np.real(W), cvars[name]))
    prob, status = _solve(cp, cp.Minimize(obj), cons)
    iters = _iteration_count(prob)
    if status in ("optimal", "optimal_inaccurate"):
        assignment = _extract(problem, cvars)
        rep = check_solution(problem, assignment)
        return SolveReport("feasible", assignment, _objective_value(problem, assignment),
                           rep.worst, iters)
    if status in ("infeasible", "unbounded", "infeasible_inaccurate", "unbounded_inaccurate"):
        return SolveReport("infeasible_or_unbounded", {}, float("nan"), float("nan"), iters)
    return SolveReport("max_iterations", {}, float("nan"), float("nan"), iters)


def _minimize_bisection(problem: LmiProblem, tolerance: float,
                        cap: float = 1.0e6) -> SolveReport:
    """Bisection over a single 1x1 objective variable using solve_feasibility."""
    if len(problem.objective) != 1:
        raise ValueError("bisection fallback requires a single objective variable")
    name, W = problem.objective[0]
    var = problem.variable(name)
    if var.dim != 1 or W.shape != (1, 1):
        raise ValueError("bisection fallback requires a scalar objective variable")
    sign = float(np.real(W[0, 0]))
    if sign <= 0:
        raise ValueError("bisection fallback requires a positive objective coefficient")

    def pinned(value: float) -> LmiProblem:
        # Fold the pinned scalar into block constants and drop the variable.
        new_vars = tuple(v for v in problem.variables if v.name != name)
        new_blocks = []
        for blk in problem.blocks:
            const = np.array(blk.constant, dtype=complex)
            terms = []
            for vname, L, R, coeff in blk.terms:
                if vname == name:
                    const = const + coeff * value * (L @ R)
                else:
                    terms.append((vname, L, R, coeff))
            if np.abs(const.imag).max() == 0:
                const = const.real
            new_blocks.append(LmiBlock(const, tuple(terms), blk.sense, blk.label))
        return LmiProblem(new_vars, tuple(new_blocks))

    lo, hi = 0.0, 1.0
    last_good = None
    while hi <= cap:
        rep = solve_feasibility(pinned(hi), tolerance)
        if rep.status == "feasible":
            last_good = (hi, rep)
            break
        lo, hi = hi, hi * 4.0
    if last_good is None:
        return SolveReport("infeasible_or_unbounded", {}, float("nan"), float("nan"), 0)
    total_iters = last_good[1].iterations
    while hi - lo > tolerance * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        rep = solve_feasibility(pinned(mid), tolerance)
        total_iters += rep.iterations
        if rep.status == "feasible":
            hi, last_good = mid, (mid, rep)
        else:
            lo = mid
    value, rep = last_good
    assignment = dict(rep.assignment)
    assignment[name] = np.array([[value]])
    return SolveReport("feasible", assignment, sign * value, rep.worst_block_eig,
                       total_iters)


def _iteration_count(prob) -> int:
    try:
        return int(prob.solver_stats.num_iters or 0)
    except Exception:
        return 0


def embed_matrix(M) -> np.ndarray:
    """Real embedding H -> [[Re H, -Im H], [Im H, Re H]]."""
    M = np.atleast_2d(np.asarray(M))
    Re, Im = np.real(M), np.imag(M)
    return np.block([[Re, -Im], [Im, Re]])


def embed_hermitian(problem: LmiProblem) -> LmiProblem:
    """Embed a (possibly complex) problem into an equivalent real one.

    Purely real problems are returned unchanged. Hermitian variables become
    unstructured symmetric variables of doubled size; feasibility transfers in
    both directions because every embedded data matrix commutes with
    conjugation by J = [[0,-I],[I,0]], so solutions can be averaged back to
    embedded-Hermitian form (see extract_hermitian).
    """
    if problem.is_real():
        return problem
    new_vars = []
    doubled = set()
    for v in problem.variables:
        if v.structure == "hermitian":
            doubled.add(v.name)
            new_vars.append(MatrixVariable(v.name, 2 * v.dim, "symmetric", v.definiteness))
        else:
            new_vars.append(v)
    new_blocks = []
    for blk in problem.blocks:
        const = embed_matrix(blk.constant)
        terms = []
        for name, L, R, coeff in blk.terms:
            cL = coeff * L  # fold the (real) coefficient into the left factor
            if abs(np.imag(coeff)) > 0:
                raise ValueError("complex term coefficients are not supported")
            if name in doubled:
                terms.append((name, embed_matrix(cL), embed_matrix(R), 1.0))
            else:
                # real variable inside a complex block: lift V to diag(V, V)
                d = problem.variable(name).dim
                lift_L = embed_matrix(cL)
                lift_R = embed_matrix(R)
                Z = np.zeros((d, d))
                terms.append((name, lift_L[:, :d], lift_R[:d, :], 1.0))
                terms.append((name, lift_L[:, d:], lift_R[d:, :], 1.0))
        new_blocks.append(LmiBlock(const, tuple(terms), blk.sense, blk.label))
    new_obj = []
    for name, W in problem.objective:
        if name in doubled:
            new_obj.append((name, 0.5 * embed_matrix(W)))
        else:
            new_obj.append((name, np.real(W)))
    return LmiProblem(tuple(new_vars), tuple(new_blocks), tuple(new_obj))


def extract_hermitian(value: np.ndarray) -> np.ndarray:
    """Recover a Hermitian matrix from a solved embedded symmetric variable.

    Averages the value with J S J^T first, which projects onto the embedded
    (J-invariant) subspace without affecting feasibility.
    """
    S = np.atleast_2d(np.asarray(value, dtype=float))
    if S.shape[0] % 2:
        raise ValueError("embedded variable must have even dimension")
    d = S.shape[0] // 2
    J = np.block([[np.zeros((d, d)), -np.eye(d)], [np.eye(d), np.zeros((d, d))]])
    S = 0.5 * (S + J @ S @ J.T)
    return S[:d, :d] + 1j * S[d:, :d]
