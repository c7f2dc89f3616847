"""Dense primal-dual interior-point solver for small SDPs.

Problem form:

    minimize    c @ x  (+ offset)
    subject to  eq_a @ x = eq_b                      (optional)
                F_k0 + sum_i x_i F_ki  >= 0  (PSD)   for each block k

Equalities are removed up front by null-space elimination; the cone-only core
is a Nesterov-Todd scaled predictor-corrector method.  Everything is dense:
the target problems have a handful of blocks of size <= ~15 and tens of
variables, where dense factorizations are both fastest and most robust.

All computations are deterministic: identical inputs and settings produce
bit-identical outputs.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True, eq=False)
class PsdBlock:
    """Affine symmetric-matrix map x -> f0 + sum_i x_i coeffs[i]."""

    f0: np.ndarray       # (s, s)
    coeffs: np.ndarray   # (m, s, s)

    def __post_init__(self):
        f0 = np.asarray(self.f0, dtype=float)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if f0.ndim != 2 or f0.shape[0] != f0.shape[1]:
            raise ValueError("f0 must be square")
        if coeffs.ndim != 3 or coeffs.shape[1:] != f0.shape:
            raise ValueError("coeffs must be (m, s, s) matching f0")
        if not np.allclose(f0, f0.T, atol=1e-12):
            raise ValueError("f0 must be symmetric")
        if not np.allclose(coeffs, np.transpose(coeffs, (0, 2, 1)), atol=1e-12):
            raise ValueError("all coefficient matrices must be symmetric")
        f0 = 0.5 * (f0 + f0.T)
        coeffs = 0.5 * (coeffs + np.transpose(coeffs, (0, 2, 1)))
        f0.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def size(self) -> int:
        return self.f0.shape[0]


@dataclass(frozen=True, eq=False)
class ConicProgram:
    c: np.ndarray
    blocks: tuple
    eq_a: np.ndarray | None = None
    eq_b: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("program needs at least one PSD block")
        for blk in blocks:
            if blk.coeffs.shape[0] != c.shape[0]:
                raise ValueError("block coefficient count must match len(c)")
        object.__setattr__(self, "blocks", blocks)
        if (self.eq_a is None) != (self.eq_b is None):
            raise ValueError("eq_a and eq_b must be given together")
        if self.eq_a is not None:
            a = np.asarray(self.eq_a, dtype=float)
            b = np.asarray(self.eq_b, dtype=float).reshape(-1)
            if a.shape != (b.shape[0], c.shape[0]):
                raise ValueError("equalities must be (p, m) with b of length p")
            a.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "eq_a", a)
            object.__setattr__(self, "eq_b", b)

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class SolverSettings:
    """Solver knobs.

    ``tol`` is the target for primal residual, dual residual and normalized
    gap.  ``accept_tol`` (defaults to ``tol``) is the fallback: if the target
    is not reached within ``max_iter`` but the best iterate meets
    ``accept_tol``, the solve still counts as Optimal at that accuracy; the
    reported residuals are always the achieved ones.
    """

    tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    accept_tol: float | None = None

    @property
    def accept(self) -> float:
        return self.tol if self.accept_tol is None else max(self.tol, self.accept_tol)


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a conic solve.

    On OPTIMAL the reported primal residual, dual residual and gap are all at
    or below the requested tolerance, and the block duals are symmetric PSD
    multipliers usable for certificate recovery.
    """

    status: SolveStatus
    x: np.ndarray
    objective: float
    dual_objective: float
    block_duals: tuple
    eq_dual: np.ndarray | None
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        duals = tuple(np.ascontiguousarray(z, dtype=float) for z in self.block_duals)
        for z in duals:
            z.setflags(write=False)
        object.__setattr__(self, "block_duals", duals)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _chol(a: np.ndarray):
    """Cholesky factor with a deterministic jitter ladder; None on failure."""
    scale = max(np.trace(a) / a.shape[0], 1e-300)
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            return np.linalg.cholesky(a + (jitter * scale) * np.eye(a.shape[0]))
        except np.linalg.LinAlgError:
            continue
    return None


def _max_step(chol_l: np.ndarray, delta: np.ndarray) -> float:
    """Largest alpha with  S + alpha * delta  PSD, given S = L L^T."""
    w = sla.solve_triangular(chol_l, delta, lower=True)
    w = sla.solve_triangular(chol_l, w.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(w))[0]
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


class _Cone:
    """Iterate state for the cone-only problem min c@x, S_k(x) PSD."""

    def __init__(self, c, blocks):
        self.c = c
        self.blocks = blocks
        self.m = c.shape[0]
        self.sizes = [b.size for b in blocks]
        self.total_dim = sum(self.sizes)
        self.data_norm = max(1.0, max(np.linalg.norm(b.f0) for b in blocks))
        self.c_norm = 1.0 + np.linalg.norm(c)

    def affine(self, x):
        return [b.f0 + np.tensordot(x, b.coeffs, axes=1) for b in self.blocks]

    def adjoint(self, zs):
        g = np.zeros(self.m)
        for b, z in zip(self.blocks, zs):
            g += np.tensordot(b.coeffs, z, axes=([1, 2], [0, 1]))
        return g


def _strict_chol(a: np.ndarray):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _solve_interval(c, blocks, settings: SolverSettings):
    """Exact solver for one-variable cone problems.

    lambda(x) = min_k lambda_min(F_k0 + x F_k) is concave, so the feasible
    set {lambda >= 0} is an interval whose endpoints are located by
    bisection; the optimum sits at an endpoint (or any feasible point when
    the objective is flat).  Duals come from the active block's null vector.
    """
    c0 = float(c[0])
    sizes = [b.size for b in blocks]

    def lam(x):
        return min(
            float(np.linalg.eigvalsh(b.f0 + x * b.coeffs[0])[0]) for b in blocks
        )

    # bracket a maximizer of the concave lambda, then golden-section it;
    # structurally zero eigenvalues carry O(eps) noise, so feasibility is
    # judged against a small negative floor
    scale = max(1.0, max(np.linalg.norm(b.f0) for b in blocks))
    feas_floor = -1e-11 * scale
    lo, hi = -1.0, 1.0
    for _ in range(60):
        if lam(lo) > lam(lo + 1e-3 * (hi - lo)):
            lo *= 2.0
        elif lam(hi) > lam(hi - 1e-3 * (hi - lo)):
            hi *= 2.0
        else:
            break
        if hi - lo > 1e14:
            break
    a, b_ = lo, hi
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b_ - invphi * (b_ - a)
    x2 = a + invphi * (b_ - a)
    f1, f2 = lam(x1), lam(x2)
    for _ in range(200):
        if b_ - a < 1e-13 * (1.0 + abs(a) + abs(b_)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b_ - a)
            f2 = lam(x2)
        else:
            b_, x2, f2 = x2, x1, f1
            x1 = b_ - invphi * (b_ - a)
            f1 = lam(x1)
    x_top = 0.5 * (a + b_)
    if lam(x_top) < feas_floor:
        return (
            SolveStatus.INFEASIBLE, np.array([x_top]),
            [np.zeros((s, s)) for s in sizes],
            c0 * x_top, -np.inf, np.inf, np.inf, np.inf, 0,
        )

    def boundary(side):
        # lambda is monotone towards each side of its maximizer
        step = 1.0
        outer = x_top
        for _ in range(200):
            cand = x_top + side * step
            if lam(cand) < feas_floor:
                outer = cand
                break
            step *= 2.0
        else:
            return side * np.inf
        inner = x_top
        for _ in range(200):
            mid = 0.5 * (inner + outer)
            if lam(mid) >= feas_floor:
                inner = mid
            else:
                outer = mid
            if abs(outer - inner) <= 1e-15 * (1.0 + abs(inner)):
                break
        return inner

    if c0 > 0:
        x_star = boundary(-1.0)
    elif c0 < 0:
        x_star = boundary(+1.0)
    else:
        x_star = x_top
    if not np.isfinite(x_star):
        # unbounded objective direction: dual infeasible
        return (
            SolveStatus.NUMERICAL_FAILURE, np.array([x_top]),
            [np.zeros((s, s)) for s in sizes],
            -np.inf, -np.inf, np.inf, np.inf, np.inf, 0,
        )

    duals = [np.zeros((s, s)) for s in sizes]
    dobj = c0 * x_star
    if c0 != 0.0:
        # dual support on a null vector of the binding block; among the
        # near-null directions pick the one that actually blocks the step
        # (largest |u^T F u| with the PSD-compatible sign)
        best = None
        for k, blk in enumerate(blocks):
            w, v = np.linalg.eigh(blk.f0 + x_star * blk.coeffs[0])
            for i in range(len(w)):
                if w[i] > 1e-8 * scale:
                    break
                quad = float(v[:, i] @ blk.coeffs[0] @ v[:, i])
                if quad == 0.0 or c0 / quad < 0.0:
                    continue
                if best is None or abs(quad) > best[0]:
                    best = (abs(quad), k, c0 / quad, v[:, i])
        if best is not None:
            _, k, theta, u = best
            duals[k] = theta * np.outer(u, u)
            dobj = -sum(float(np.tensordot(b.f0, z)) for b, z in zip(blocks, duals))
    pres = max(0.0, -lam(x_star)) / scale
    dres = abs(c0 - sum(float(np.tensordot(b.coeffs[0], z)) for b, z in zip(blocks, duals))) / (1.0 + abs(c0))
    gap = abs(c0 * x_star - dobj) / max(1.0, abs(c0 * x_star), abs(dobj))
    status = SolveStatus.OPTIMAL if max(pres, dres, gap) <= settings.accept else SolveStatus.NUMERICAL_FAILURE
    return (status, np.array([x_star]), duals, c0 * x_star, dobj, pres, dres, gap, 0)


def _solve_cone(c, blocks, settings: SolverSettings):
    """NT-scaled predictor-corrector on the block-diagonal PSD cone.

    Stabilizers for the degenerate problems this package produces (loss of
    strict complementarity, nearly singular data):

    * every step is verified by a strict Cholesky at the candidate point and
      backtracked on failure, since max-step estimates from ill-conditioned
      factors can overshoot the cone boundary;
    * dual iterates are projected back onto the affine dual-feasibility
      manifold (its Gram matrix is constant) whenever the correction is small
      against the cone margin, which stops noise from re-entering the dual
      residual once it has converged;
    * a coupling guard recenters instead of letting complementarity run
      orders of magnitude ahead of feasibility.
    """
    cone = _Cone(c, blocks)
    m = cone.m
    if m == 0:
        raise ValueError("cone solve needs at least one variable")
    if m == 1:
        return _solve_interval(c, blocks, settings)
    tol = settings.tol
    nb = len(blocks)

    # constant Gram matrix of the dual-feasibility map, for the projection
    gram = np.zeros((m, m))
    for b in blocks:
        gram += np.tensordot(b.coeffs, b.coeffs, axes=([1, 2], [1, 2]))
    gram_chol = _chol(_sym(gram))

    def project_dual(zs):
        if gram_chol is None:
            return zs, np.inf
        r = c - cone.adjoint(zs)
        lam = sla.cho_solve((gram_chol, True), r)
        fixed = [_sym(zs[k] + np.tensordot(lam, blocks[k].coeffs, axes=1))
                 for k in range(nb)]
        return fixed, float(np.linalg.norm(lam))

    x = np.zeros(m)
    eta = max(1.0, cone.data_norm ** 0.5)
    S = [eta * np.eye(s) for s in cone.sizes]
    Z = [eta * np.eye(s) for s in cone.sizes]

    best = None
    status = SolveStatus.MAX_ITER
    iters_done = 0
    score_history = []

    def evaluate(x, S, Z, it):
        Sx = cone.affine(x)
        rp = [sx - s for sx, s in zip(Sx, S)]
        rd = c - cone.adjoint(Z)
        gap_abs = sum(float(np.tensordot(s, z)) for s, z in zip(S, Z))
        pobj = float(c @ x)
        dobj = -sum(float(np.tensordot(b.f0, z)) for b, z in zip(blocks, Z))
        pres = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rp)) / cone.data_norm
        dres = np.linalg.norm(rd) / cone.c_norm
        relgap = gap_abs / max(1.0, abs(pobj), abs(dobj))
        snap = {
            "score": max(pres, dres, relgap), "x": x.copy(),
            "Z": [z.copy() for z in Z], "pobj": pobj, "dobj": dobj,
            "pres": pres, "dres": dres, "relgap": relgap, "iter": it,
        }
        return Sx, rp, rd, gap_abs, pobj, dobj, snap

    for it in range(settings.max_iter):
        iters_done = it
        Sx, rp, rd, gap_abs, pobj, dobj, snap = evaluate(x, S, Z, it)
        score = snap["score"]

        if not np.isfinite(score):
            status = SolveStatus.NUMERICAL_FAILURE
            break
        if best is None or score < best["score"]:
            best = snap
        score_history.append(best["score"])
        if score <= tol:
            status = SolveStatus.OPTIMAL
            break
        # accept a stall once the best iterate is already good enough
        if (
            len(score_history) > 40
            and best["score"] <= settings.accept
            and score_history[-41] < 2.0 * best["score"]
        ):
            status = SolveStatus.OPTIMAL
            break
        # dual objective running off to +inf while nearly dual-feasible is a
        # certificate of primal infeasibility (the relaxations never hit this)
        if dobj > 1e9 * max(1.0, abs(pobj)) and snap["dres"] <= 1e-6:
            status = SolveStatus.INFEASIBLE
            break

        mu = gap_abs / cone.total_dim

        Ls, Rs, Winv, Zinv = [], [], [], []
        failed = False
        for s, z in zip(S, Z):
            lf = _chol(s)
            rf = _chol(z)
            if lf is None or rf is None:
                failed = True
                break
            u, sig, vt = np.linalg.svd(rf.T @ lf)
            ginv = (u / np.sqrt(sig)).T @ rf.T
            Winv.append(_sym(ginv.T @ ginv))
            Zinv.append(_sym(sla.cho_solve((rf, True), np.eye(z.shape[0]))))
            Ls.append(lf)
            Rs.append(rf)
        if failed:
            status = SolveStatus.NUMERICAL_FAILURE
            break

        # Schur complement  M_ij = sum_k <F_ki, Winv_k F_kj Winv_k>
        M = np.zeros((m, m))
        for b, wi in zip(blocks, Winv):
            t = np.einsum("ab,ibc,cd->iad", wi, b.coeffs, wi, optimize=True)
            M += np.tensordot(b.coeffs, t, axes=([1, 2], [1, 2]))
        M = _sym(M)
        mchol = _chol(M)
        if mchol is None:
            status = SolveStatus.NUMERICAL_FAILURE
            break

        def direction(sigma, corr):
            rhs = -rd.copy()
            es = []
            for k, b in enumerate(blocks):
                e = sigma * mu * Zinv[k] - Sx[k]
                if corr is not None:
                    e = e - corr[k]
                es.append(e)
                rhs += np.tensordot(b.coeffs, _sym(Winv[k] @ e @ Winv[k]),
                                    axes=([1, 2], [0, 1]))
            dx = sla.cho_solve((mchol, True), rhs)
            # one round of iterative refinement; the Schur system gets very
            # ill-conditioned near degenerate optima
            resid = rhs - M @ dx
            dx = dx + sla.cho_solve((mchol, True), resid)
            ds = [rp[k] + np.tensordot(dx, blocks[k].coeffs, axes=1)
                  for k in range(nb)]
            dz = [_sym(Winv[k] @ (es[k] + rp[k] - ds[k]) @ Winv[k])
                  for k in range(nb)]
            return dx, ds, dz

        def step_lengths(ds, dz):
            frac = settings.step_fraction
            ap = min((_max_step(Ls[k], ds[k]) for k in range(nb)), default=np.inf)
            ad = min((_max_step(Rs[k], dz[k]) for k in range(nb)), default=np.inf)
            return min(1.0, frac * ap), min(1.0, frac * ad)

        dx_a, ds_a, dz_a = direction(0.0, None)
        ap_a, ad_a = step_lengths(ds_a, dz_a)
        gap_aff = sum(
            float(np.tensordot(S[k] + ap_a * ds_a[k], Z[k] + ad_a * dz_a[k]))
            for k in range(nb)
        )
        sigma = min(0.99, max(1e-8, (max(gap_aff, 0.0) / gap_abs) ** 3))
        corr = [_sym(ds_a[k] @ dz_a[k] @ Zinv[k]) for k in range(nb)]
        dx, ds, dz = direction(sigma, corr)
        ap, ad = step_lengths(ds, dz)
        # fall back to the centered direction without the second-order
        # term if the corrector crippled the step
        if min(ap, ad) < 0.1 * min(ap_a, ad_a):
            dx2, ds2, dz2 = direction(sigma, None)
            ap2, ad2 = step_lengths(ds2, dz2)
            if min(ap2, ad2) > min(ap, ad):
                dx, ds, dz, ap, ad = dx2, ds2, dz2, ap2, ad2

        # when the dual optimum is not attained Z must be allowed to grow,
        # but geometrically, not explosively
        z_norm = max(np.linalg.norm(z) for z in Z)
        dz_norm = max(np.linalg.norm(d) for d in dz)
        if dz_norm > 0:
            ad = min(ad, 3.0 * (1.0 + z_norm) / dz_norm)

        # verify cone membership at the candidate points; the max-step
        # estimate is unreliable when the current factors are ill-conditioned
        for _ in range(40):
            if all(_strict_chol(S[k] + ap * ds[k]) is not None for k in range(nb)):
                break
            ap *= 0.8
        for _ in range(40):
            if all(_strict_chol(Z[k] + ad * dz[k]) is not None for k in range(nb)):
                break
            ad *= 0.8

        x = x + ap * dx
        S = [_sym(S[k] + ap * ds[k]) for k in range(nb)]
        Z_new = [_sym(Z[k] + ad * dz[k]) for k in range(nb)]
        # snap the dual onto its feasibility manifold when the correction is
        # a small polish and keeps the cone; this stops noise from
        # re-entering the residual without disturbing diverging duals
        fixed, shift = project_dual(Z_new)
        z_scale = 1.0 + max(np.linalg.norm(z) for z in Z_new)
        if (
            np.isfinite(shift)
            and shift <= 1e-3 * z_scale
            and all(_strict_chol(z) is not None for z in fixed)
        ):
            Z = fixed
        else:
            Z = Z_new

    else:
        # max_iter exhausted: account for the final step before reporting
        *_, snap = evaluate(x, S, Z, settings.max_iter)
        if np.isfinite(snap["score"]) and (best is None or snap["score"] < best["score"]):
            best = snap

    if best is not None and status in (SolveStatus.MAX_ITER, SolveStatus.NUMERICAL_FAILURE):
        if best["score"] <= settings.accept:
            status = SolveStatus.OPTIMAL

    if best is None:
        return (
            SolveStatus.NUMERICAL_FAILURE, np.zeros(m),
            [np.zeros((s, s)) for s in cone.sizes],
            0.0, 0.0, np.inf, np.inf, np.inf, iters_done,
        )
    return (
        status, best["x"], best["Z"], best["pobj"], best["dobj"],
        best["pres"], best["dres"], best["relgap"], iters_done,
    )


def solve(program: ConicProgram, settings: SolverSettings | None = None) -> SolveResult:
    """Solve a conic program to the requested tolerance.

    Returns a SolveResult whose status is OPTIMAL only when the primal
    residual, dual residual and normalized duality gap are all <= tol.
    Dual block multipliers are always returned for the best iterate seen.
    """
    settings = settings or SolverSettings()
    c = program.c
    blocks = program.blocks

    if program.eq_a is not None:
        a, b = program.eq_a, program.eq_b
        x_part, *_ = np.linalg.lstsq(a, b, rcond=None)
        if np.linalg.norm(a @ x_part - b) > 1e-8 * (1.0 + np.linalg.norm(b)):
            return SolveResult(
                SolveStatus.INFEASIBLE, x_part, float(c @ x_part + program.offset),
                -np.inf, tuple(np.zeros((blk.size, blk.size)) for blk in blocks),
                None, np.inf, np.inf, np.inf, 0,
            )
        nullsp = sla.null_space(a)
        red_blocks = tuple(
            PsdBlock(
                blk.f0 + np.tensordot(x_part, blk.coeffs, axes=1),
                np.tensordot(nullsp.T, blk.coeffs, axes=([1], [0]))
                if nullsp.shape[1] else np.zeros((0, blk.size, blk.size)),
            )
            for blk in blocks
        )
        if nullsp.shape[1] == 0:
            # equalities pin the point; check cone feasibility and report
            eigmins = [np.linalg.eigvalsh(rb.f0)[0] for rb in red_blocks]
            feas = min(eigmins) >= -1e-8 * max(1.0, max(np.linalg.norm(rb.f0) for rb in red_blocks))
            duals = tuple(np.zeros((blk.size, blk.size)) for blk in blocks)
            y, *_ = np.linalg.lstsq(a.T, c, rcond=None)
            obj = float(c @ x_part + program.offset)
            status = SolveStatus.OPTIMAL if feas else SolveStatus.INFEASIBLE
            res = max(0.0, -min(eigmins))
            return SolveResult(status, x_part, obj, obj, duals, y, res, 0.0, 0.0, 0)
        red_c = nullsp.T @ c
        (status, z_red, duals, pobj_r, dobj_r, pres, dres, gap, iters) = _solve_cone(
            red_c, red_blocks, settings
        )
        x = x_part + nullsp @ z_red
        shift = float(c @ x_part)
        g = np.zeros(c.shape[0])
        for blk, z in zip(blocks, duals):
            g += np.tensordot(blk.coeffs, z, axes=([1, 2], [0, 1]))
        y, *_ = np.linalg.lstsq(a.T, c - g, rcond=None)
        eq_res = np.linalg.norm(a @ x - b) / (1.0 + np.linalg.norm(b))
        return SolveResult(
            status, x, pobj_r + shift + program.offset,
            dobj_r + shift + program.offset,
            tuple(_sym(z) for z in duals), y,
            max(pres, eq_res), dres, gap, iters,
        )

    (status, x, duals, pobj, dobj, pres, dres, gap, iters) = _solve_cone(
        c, blocks, settings
    )
    return SolveResult(
        status, x, pobj + program.offset, dobj + program.offset,
        tuple(_sym(z) for z in duals), None, pres, dres, gap, iters,
    )


def dump_program(program: ConicProgram, stream=None) -> str:
    """Plain-text sparse dump for cross-checking against external solvers.

    Format (one entry per line, zero-based indices):

        nvars <m>
        nblocks <K>
        blocksize <k> <s_k>
        offset <value>
        c <i> <value>                  # nonzero objective entries
        f <matno> <block> <i> <j> <value>
                                       # matno 0 encodes F_k0, matno t >= 1
                                       # encodes the coefficient of x_{t-1};
                                       # upper triangle only
        eq <row> <col|rhs> ...         # 'a <row> <col> <value>' and
        b <row> <value>                #  right-hand sides, when present

    Returns the text; also writes it to ``stream`` when given.
    """
    out = io.StringIO()
    out.write(f"nvars {program.n_vars}\n")
    out.write(f"nblocks {len(program.blocks)}\n")
    for k, blk in enumerate(program.blocks):
        out.write(f"blocksize {k} {blk.size}\n")
    out.write(f"offset {float(program.offset)!r}\n")
    for i, v in enumerate(program.c):
        if v != 0.0:
            out.write(f"c {i} {float(v)!r}\n")
    for k, blk in enumerate(program.blocks):
        s = blk.size
        for i in range(s):
            for j in range(i, s):
                if blk.f0[i, j] != 0.0:
                    out.write(f"f 0 {k} {i} {j} {float(blk.f0[i, j])!r}\n")
        for t in range(program.n_vars):
            for i in range(s):
                for j in range(i, s):
                    if blk.coeffs[t, i, j] != 0.0:
                        out.write(f"f {t + 1} {k} {i} {j} {float(blk.coeffs[t, i, j])!r}\n")
    if program.eq_a is not None:
        rows, cols = np.nonzero(program.eq_a)
        for r, cidx in zip(rows, cols):
            out.write(f"a {r} {cidx} {float(program.eq_a[r, cidx])!r}\n")
        for r, v in enumerate(program.eq_b):
            if v != 0.0:
                out.write(f"b {r} {float(v)!r}\n")
    text = out.getvalue()
    if stream is not None:
        stream.write(text)
    return text
