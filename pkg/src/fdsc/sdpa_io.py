"""SDPA sparse format writer and round-trip reader.

Exports an LmiProblem in the classic .dat-s layout: the scalarized decision
vector y collects the upper triangles (row-major) of every matrix variable in
declaration order, and each LMI block plus each positive-definiteness
constraint becomes one SDPA block of F(y) = sum_k y_k F_k - F0 >= 0.
Strictness margins are dropped on export (SDPA has no strict inequalities).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sdp import LmiProblem

__all__ = ["SdpaData", "export_sdpa", "parse_sdpa", "render_sdpa"]


@dataclass(frozen=True)
class SdpaData:
    """Parsed SDPA sparse problem: sizes, objective vector, and entries.

    entries maps (matno, blkno, i, j) -> value with matno 0 denoting F0 and
    1-based block/row/column indices, i <= j.
    """

    m: int
    block_sizes: tuple
    c: tuple
    entries: dict = field(default_factory=dict)

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)


def _scalar_layout(problem: LmiProblem):
    """Upper-triangle row-major scalarization of all matrix variables."""
    layout = []  # (var name, i, j) per scalar index
    for v in problem.variables:
        for i in range(v.dim):
            for j in range(i, v.dim):
                layout.append((v.name, i, j))
    return layout


def _basis(dim: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((dim, dim))
    E[i, j] = 1.0
    if i != j:
        E[j, i] = 1.0
    return E


def export_sdpa(problem: LmiProblem) -> str:
    """Render an LmiProblem as SDPA sparse text (real problems only)."""
    if not problem.is_real():
        raise ValueError("complex problem: apply embed_hermitian before export")
    layout = _scalar_layout(problem)
    m = len(layout)
    dims = {v.name: v.dim for v in problem.variables}

    obj_w = {name: np.real(W) for name, W in problem.objective}
    c = []
    for name, i, j in layout:
        W = obj_w.get(name)
        if W is None:
            c.append(0.0)
        elif i == j:
            c.append(float(W[i, i]))
        else:
            c.append(float(W[i, j] + W[j, i]))

    block_sizes = []
    entries = {}

    def put(matno, blkno, i, j, value):
        if i > j:
            i, j = j, i
        if value != 0.0:
            key = (matno, blkno, i + 1, j + 1)
            entries[key] = entries.get(key, 0.0) + value

    blkno = 0
    for blk in problem.blocks:
        blkno += 1
        d = blk.dim
        block_sizes.append(d)
        sign = -1.0 if blk.sense == "negative_definite" else 1.0
        # F0 entries: constant + A(y) (sense) 0  <=>  sign*A(y) - (-sign*constant) >= 0
        F0 = -sign * np.real(blk.constant)
        for i in range(d):
            for j in range(i, d):
                put(0, blkno, i, j, float(F0[i, j]))
        for k, (name, vi, vj) in enumerate(layout):
            Fk = np.zeros((d, d))
            for tname, L, R, coeff in blk.terms:
                if tname != name:
                    continue
                E = _basis(dims[name], vi, vj)
                Fk = Fk + float(np.real(coeff)) * np.real(L) @ E @ np.real(R)
            Fk = sign * 0.5 * (Fk + Fk.T)
            for i in range(d):
                for j in range(i, d):
                    put(k + 1, blkno, i, j, float(Fk[i, j]))
    for v in problem.variables:
        if v.definiteness != "positive_definite":
            continue
        blkno += 1
        block_sizes.append(v.dim)
        for k, (name, vi, vj) in enumerate(layout):
            if name != v.name:
                continue
            E = _basis(v.dim, vi, vj)
            for i in range(v.dim):
                for j in range(i, v.dim):
                    put(k + 1, blkno, i, j, float(E[i, j]))

    return render_sdpa(SdpaData(m, tuple(block_sizes), tuple(c), entries))


def render_sdpa(data: SdpaData) -> str:
    """Deterministic text rendering of SdpaData (sorted entries, repr floats)."""
    lines = [str(data.m), str(data.n_blocks),
             " ".join(str(s) for s in data.block_sizes),
             " ".join(repr(float(x)) for x in data.c)]
    for (matno, blkno, i, j), val in sorted(data.entries.items()):
        lines.append(f"{matno} {blkno} {i} {j} {val!r}")
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> SdpaData:
    """Parse SDPA sparse text back into SdpaData."""
    rows = [ln.split("*")[0].split('"')[0].strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln]
    if len(rows) < 4:
        raise ValueError("truncated SDPA input")
    m = int(rows[0].split()[0])
    n_blocks = int(rows[1].split()[0])
    sizes = tuple(int(float(tok)) for tok in rows[2].replace(",", " ").split())
    if len(sizes) != n_blocks:
        raise ValueError("block size count disagrees with block count")
    c = tuple(float(tok) for tok in rows[3].replace(",", " ").split())
    if len(c) != m:
        raise ValueError("objective length disagrees with variable count")
    entries = {}
    for ln in rows[4:]:
        toks = ln.replace(",", " ").split()
        if len(toks) != 5:
            raise ValueError(f"malformed entry line: {ln!r}")
        matno, blkno, i, j = (int(t) for t in toks[:4])
        val = float(toks[4])
        if not (0 <= matno <= m):
            raise ValueError(f"matrix index out of range: {ln!r}")
        if not (1 <= blkno <= n_blocks):
            raise ValueError(f"block index out of range: {ln!r}")
        if i > j:
            i, j = j, i
        d = abs(sizes[blkno - 1])
        if not (1 <= i <= d and j <= d):
            raise ValueError(f"entry outside block: {ln!r}")
        entries[(matno, blkno, i, j)] = val
    return SdpaData(m, sizes, c, entries)
