"""SDPA sparse export, deterministic rendering, and round-trip parsing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdsc.gkyp import assemble_gkyp_lmi
from fdsc.model_core import close_loop, make_band
from fdsc.sdp import (LmiBlock, LmiProblem, MatrixVariable, embed_hermitian,
                      minimize_objective)
from fdsc.sdpa_io import SdpaData, export_sdpa, parse_sdpa, render_sdpa


def scalar_lyapunov_free() -> LmiProblem:
    """2 a p < 0 with a = -1 and p an unconstrained scalar."""
    p = MatrixVariable("p", 1)
    blk = LmiBlock(constant=[[0.0]], terms=(("p", [[1.0]], [[1.0]], -2.0),),
                   sense="negative_definite", label="lyapunov")
    return LmiProblem((p,), (blk,))


def densify(data: SdpaData):
    """Expand SdpaData into dense (F0, [F1..Fm]) per block."""
    out = []
    for b, d in enumerate(data.block_sizes, start=1):
        F = [np.zeros((d, d)) for _ in range(data.m + 1)]
        for (matno, blkno, i, j), val in data.entries.items():
            if blkno != b:
                continue
            F[matno][i - 1, j - 1] = val
            F[matno][j - 1, i - 1] = val
        out.append(F)
    return out


def test_scalar_lyapunov_is_five_lines():
    text = export_sdpa(scalar_lyapunov_free())
    lines = text.strip().splitlines()
    assert len(lines) == 5
    assert lines[0] == "1"
    assert lines[1] == "1"
    assert lines[2] == "1"
    assert float(lines[3]) == 0.0
    toks = lines[4].split()
    assert toks[:4] == ["1", "1", "1", "1"]
    assert float(toks[4]) == 2.0


def test_positive_definite_variable_gets_own_block():
    p = MatrixVariable("p", 1, definiteness="positive_definite")
    blk = LmiBlock(constant=[[0.0]], terms=(("p", [[1.0]], [[1.0]], -2.0),),
                   sense="negative_definite")
    data = parse_sdpa(export_sdpa(LmiProblem((p,), (blk,))))
    assert data.n_blocks == 2
    assert data.block_sizes == (1, 1)
    assert data.entries[(1, 2, 1, 1)] == 1.0


def test_scalarization_order_upper_triangle_row_major():
    # One 2x2 variable: y = (P11, P12, P22); objective trace picks diagonals.
    P = MatrixVariable("P", 2)
    blk = LmiBlock(constant=-np.eye(2), terms=(("P", np.eye(2), np.eye(2), 1.0),),
                   sense="positive_definite")
    data = parse_sdpa(export_sdpa(LmiProblem((P,), (blk,), (("P", np.eye(2)),))))
    assert data.m == 3
    assert data.c == (1.0, 0.0, 1.0)
    # F1 = E11, F2 = E12 + E21, F3 = E22 inside the single block
    F = densify(data)[0]
    np.testing.assert_array_equal(F[1], [[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_array_equal(F[2], [[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(F[3], [[0.0, 0.0], [0.0, 1.0]])
    # F0 enters as X = sum_i y_i F_i - F0 >= 0, so F0 = -constant
    np.testing.assert_array_equal(F[0], np.eye(2))


def test_export_solved_iterate_is_psd(cfg):
    # Round-trip a solved gKYP bound problem and evaluate F(y) at the solution.
    sys_cl = close_loop(cfg.plant, cfg.controllers["PassC-LF"])
    prob = assemble_gkyp_lmi(sys_cl, make_band("LF", [1.0]))
    prob = LmiProblem(prob.variables, prob.blocks, (("mu", [[1.0]]),))
    rep = minimize_objective(prob)
    assert rep.status == "feasible"
    data = parse_sdpa(export_sdpa(prob))
    y = []
    for v in prob.variables:
        V = rep.assignment[v.name]
        for i in range(v.dim):
            for j in range(i, v.dim):
                y.append(V[i, j])
    assert len(y) == data.m
    for F in densify(data):
        M = -F[0] + sum(yk * Fk for yk, Fk in zip(y, F[1:]))
        assert np.linalg.eigvalsh(M)[0] >= -1e-6


def test_complex_problem_requires_embedding(cfg):
    sys_cl = close_loop(cfg.plant, cfg.controllers["PassC-MF"])
    prob = assemble_gkyp_lmi(sys_cl, make_band("MF", [1.0, 10.0]))
    # assemble_gkyp_lmi already embeds MF problems; rebuild a complex block
    blk = LmiBlock(constant=np.array([[0.0, 1j], [-1j, 0.0]]), terms=(),
                   sense="negative_definite")
    complex_prob = LmiProblem((), (blk,))
    with pytest.raises(ValueError):
        export_sdpa(complex_prob)
    assert export_sdpa(prob)  # the embedded problem exports fine


def test_render_parse_byte_roundtrip(cfg):
    sys_cl = close_loop(cfg.plant, cfg.controllers["PassC-LF"])
    prob = assemble_gkyp_lmi(sys_cl, make_band("LF", [1.0]))
    text = export_sdpa(prob)
    assert render_sdpa(parse_sdpa(text)) == text


def test_parse_tolerates_comments_and_commas():
    text = ('"two variables\n*comment\n2\n1\n2\n1.0, 0.0\n'
            "1 1 1, 2 0.5\n0 1 1 1 -1.0\n")
    data = parse_sdpa(text)
    assert data.m == 2 and data.block_sizes == (2,)
    assert data.entries[(1, 1, 1, 2)] == 0.5
    assert data.entries[(0, 1, 1, 1)] == -1.0


def test_parse_rejects_malformed_input():
    with pytest.raises(ValueError):
        parse_sdpa("1\n1\n")
    with pytest.raises(ValueError):
        parse_sdpa("1\n1\n1\n0.0\n1 1 1 1\n")
    with pytest.raises(ValueError):
        parse_sdpa("1\n1\n1\n0.0\n2 1 1 1 1.0\n")
    with pytest.raises(ValueError):
        parse_sdpa("1\n1\n1\n0.0\n1 2 1 1 1.0\n")
    with pytest.raises(ValueError):
        parse_sdpa("1\n1\n1\n0.0\n1 1 1 2 1.0\n")
    with pytest.raises(ValueError):
        parse_sdpa("1\n2\n1\n0.0\n")


@st.composite
def sdpa_problems(draw):
    m = draw(st.integers(1, 4))
    sizes = tuple(draw(st.lists(st.integers(1, 3), min_size=1, max_size=3)))
    vals = st.floats(-10.0, 10.0, allow_nan=False).filter(lambda v: v != 0.0)
    c = tuple(draw(st.floats(-5.0, 5.0)) for _ in range(m))
    entries = {}
    for _ in range(draw(st.integers(0, 8))):
        blkno = draw(st.integers(1, len(sizes)))
        d = sizes[blkno - 1]
        i = draw(st.integers(1, d))
        j = draw(st.integers(i, d))
        entries[(draw(st.integers(0, m)), blkno, i, j)] = draw(vals)
    return SdpaData(m, sizes, c, entries)


@given(sdpa_problems())
@settings(max_examples=100, deadline=None)
def test_render_is_parse_inverse(data):
    text = render_sdpa(data)
    back = parse_sdpa(text)
    assert back == data
    assert render_sdpa(back) == text
