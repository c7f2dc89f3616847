import numpy as np
import pytest

from tvbound.conic import (
    ConicProgram,
    PsdBlock,
    SolveStatus,
    SolverSettings,
    dump_program,
    solve,
)
from tvbound.measures import Atomic, moments
from tvbound.relaxation import assemble

from oracles import barrier_solve, grid_min_sdp, random_sdp_instance


def scalar_program():
    return ConicProgram(
        c=np.array([1.0]),
        blocks=(PsdBlock(np.zeros((1, 1)), np.ones((1, 1, 1))),),
    )


def arithmetic_geometric_program():
    # min x1 + x2 with [[x1, 1], [1, x2]] psd; optimum 2 at (1, 1)
    f0 = np.array([[0.0, 1.0], [1.0, 0.0]])
    coeffs = np.zeros((2, 2, 2))
    coeffs[0, 0, 0] = 1.0
    coeffs[1, 1, 1] = 1.0
    return ConicProgram(c=np.array([1.0, 1.0]), blocks=(PsdBlock(f0, coeffs),))


def test_scalar_block():
    res = solve(scalar_program())
    assert res.status == SolveStatus.OPTIMAL
    assert res.objective == pytest.approx(0.0, abs=1e-7)


def test_arithmetic_geometric():
    prog = arithmetic_geometric_program()
    grid = grid_min_sdp(prog.c, prog.blocks[0].f0, prog.blocks[0].coeffs, 0.0, 3.0, 301)
    assert grid == pytest.approx(2.0, abs=2e-2)  # grid resolution limited
    res = solve(prog)
    assert res.status == SolveStatus.OPTIMAL
    assert res.objective == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-5)


def test_assembled_dirac_program():
    # the level-1 program for delta_0 vs delta_eps has optimal value 2; the
    # raw four-block form has no interior at all (the feasible set is one
    # point), so the solve is accepted at a degenerate-case tolerance
    eps = 0.1
    mu = moments(Atomic.univariate([0.0], [1.0]), 1, 2)
    nu = moments(Atomic.univariate([eps], [1.0]), 1, 2)
    problem = assemble(mu, nu, 1)
    res = solve(problem.program, SolverSettings(tol=1e-8, accept_tol=1e-3, max_iter=300))
    assert res.status == SolveStatus.OPTIMAL
    assert res.dual_objective == pytest.approx(2.0, abs=1e-5)
    # the kernel-face reduction restores exactness
    reduced = assemble(mu, nu, 1, kernel_reduce=True)
    res2 = solve(reduced.program)
    assert res2.status == SolveStatus.OPTIMAL
    assert res2.dual_objective == pytest.approx(2.0, abs=1e-9)


def test_random_instances_match_barrier_oracle():
    rng = np.random.default_rng(123)
    for _ in range(30):
        c, f0, coeffs, x0 = random_sdp_instance(rng)
        oracle_val, _ = barrier_solve(c, [(f0, coeffs)], x0)
        res = solve(
            ConicProgram(c=c, blocks=(PsdBlock(f0, coeffs),)),
            SolverSettings(tol=1e-8, accept_tol=1e-6),
        )
        assert res.status == SolveStatus.OPTIMAL
        assert res.objective == pytest.approx(oracle_val, abs=1e-4)
        # weak duality on the reported pair
        assert res.dual_objective <= res.objective + 1e-6


def test_determinism_bit_identical():
    prog = arithmetic_geometric_program()
    res1 = solve(prog)
    res2 = solve(prog)
    assert res1.x.tobytes() == res2.x.tobytes()
    assert res1.objective == res2.objective
    assert all(
        a.tobytes() == b.tobytes()
        for a, b in zip(res1.block_duals, res2.block_duals)
    )


def test_no_nan_on_optimal():
    res = solve(arithmetic_geometric_program())
    assert np.isfinite(res.x).all()
    assert all(np.isfinite(z).all() for z in res.block_duals)


def test_equality_constraints():
    # pin x1 = 2 in the arithmetic/geometric program: optimum 2.5 at (2, 1/2)
    base = arithmetic_geometric_program()
    prog = ConicProgram(
        c=base.c, blocks=base.blocks,
        eq_a=np.array([[1.0, 0.0]]), eq_b=np.array([2.0]),
    )
    res = solve(prog)
    assert res.status == SolveStatus.OPTIMAL
    assert res.objective == pytest.approx(2.5, abs=1e-6)
    assert res.x[0] == pytest.approx(2.0, abs=1e-9)
    assert res.eq_dual is not None
    # stationarity: c - adjoint(Z) = A^T y
    g = np.tensordot(base.blocks[0].coeffs, res.block_duals[0], axes=([1, 2], [0, 1]))
    assert np.allclose(base.c - g, prog.eq_a.T @ res.eq_dual, atol=1e-5)


def test_fully_pinned_equalities():
    base = arithmetic_geometric_program()
    prog = ConicProgram(
        c=base.c, blocks=base.blocks,
        eq_a=np.eye(2), eq_b=np.array([2.0, 1.0]),
    )
    res = solve(prog)
    assert res.status == SolveStatus.OPTIMAL
    assert res.objective == pytest.approx(3.0)


def test_infeasible_one_variable():
    # S(x) = diag(x, -1) can never be psd
    f0 = np.diag([0.0, -1.0])
    coeffs = np.zeros((1, 2, 2))
    coeffs[0, 0, 0] = 1.0
    res = solve(ConicProgram(c=np.array([1.0]), blocks=(PsdBlock(f0, coeffs),)))
    assert res.status == SolveStatus.INFEASIBLE


def test_infeasible_two_variables():
    f0 = np.diag([0.0, -1.0])
    coeffs = np.zeros((2, 2, 2))
    coeffs[0, 0, 0] = 1.0
    res = solve(
        ConicProgram(c=np.array([1.0, 0.0]), blocks=(PsdBlock(f0, coeffs),)),
        SolverSettings(max_iter=80),
    )
    assert res.status in (SolveStatus.INFEASIBLE, SolveStatus.NUMERICAL_FAILURE)
    assert res.status != SolveStatus.OPTIMAL


def test_inconsistent_equalities_flagged():
    base = arithmetic_geometric_program()
    prog = ConicProgram(
        c=base.c, blocks=base.blocks,
        eq_a=np.array([[1.0, 0.0], [1.0, 0.0]]), eq_b=np.array([1.0, 2.0]),
    )
    res = solve(prog)
    assert res.status == SolveStatus.INFEASIBLE


def test_dump_program_format():
    prog = arithmetic_geometric_program()
    text = dump_program(prog)
    lines = text.strip().splitlines()
    assert lines[0] == "nvars 2"
    assert lines[1] == "nblocks 1"
    assert "blocksize 0 2" in lines
    entries = [ln for ln in lines if ln.startswith("f ")]
    # F0 has one upper-triangle nonzero, each coefficient matrix one entry
    assert len(entries) == 3
    for ln in entries:
        parts = ln.split()
        assert len(parts) == 6
        float(parts[5])
    assert dump_program(prog) == text  # deterministic


def test_program_validation():
    with pytest.raises(ValueError):
        PsdBlock(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        ConicProgram(c=np.array([1.0]), blocks=())
    blk = PsdBlock(np.zeros((2, 2)), np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        ConicProgram(c=np.array([1.0]), blocks=(blk,))  # m mismatch
