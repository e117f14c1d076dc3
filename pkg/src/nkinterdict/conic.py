"""Primal-dual interior-point solver for standard-form conic programs.

Problems have the form::

    minimize    c'x
    subject to  A x = b
                x in K = (free blocks) x (nonnegative blocks) x (second-order cones)

with dual ``max b'y  s.t.  A'y + s = c,  s in K*`` (``s = 0`` on free blocks).

The algorithm is a homogeneous self-dual path-following method with a
Mehrotra predictor-corrector step and Nesterov-Todd scaling of the conic
blocks.  Each iteration factorizes the quasi-definite KKT matrix
``[[-H - dI, A'], [A, dI]]`` (``H`` is the squared NT scaling, ``d = 1e-8``
the static regularization) with a sparse LU under a symmetric fill-reducing
ordering; solves get up to two passes of iterative refinement against the
unregularized matrix.  The homogeneous embedding yields certificate rays
that distinguish genuinely infeasible subproblems from numerical failure.

Second-order cones in the power-flow relaxations are small (dimension 3-4),
so NT blocks are stored dense per cone and cones of equal dimension are
processed as batched arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import UsageError

FREE = "free"
NONNEG = "nonneg"
SOC = "soc"

STATIC_REG = 1e-8
REFINE_PASSES = 2
REFINE_TRIGGER = 1e-11   # refine a KKT solve only above this relative residual
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
STEP_DAMP = 0.99


@dataclass(frozen=True)
class ConeProblem:
    """A standard-form conic program.

    ``cones`` is an ordered tuple of ``(kind, dim)`` pairs partitioning the
    variable vector; kinds are ``"free"``, ``"nonneg"`` and ``"soc"``.  Every
    second-order cone has dimension >= 2 with the first coordinate as the
    cone head (||tail|| <= head).  ``var_names`` optionally maps names to
    column index arrays for solution extraction.
    """

    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: tuple
    var_names: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = sum(d for _, d in self.cones)
        if n != self.A.shape[1] or n != len(self.c):
            raise UsageError(
                f"cone dims sum to {n}, but A has {self.A.shape[1]} columns and c has {len(self.c)}")
        if len(self.b) != self.A.shape[0]:
            raise UsageError(f"A has {self.A.shape[0]} rows but b has {len(self.b)}")
        for kind, d in self.cones:
            if kind not in (FREE, NONNEG, SOC):
                raise UsageError(f"unknown cone kind {kind!r}")
            if d < 1 or (kind == SOC and d < 2):
                raise UsageError(f"bad dimension {d} for cone kind {kind!r}")

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def dump_text(self) -> str:
        """Plain-text dump (c, A triplets, b, cone layout) for debugging."""
        coo = self.A.tocoo()
        out = ["conic-problem", f"rows {self.num_rows} cols {self.num_vars} nnz {coo.nnz}"]
        out.append("cones " + " ".join(f"{k}:{d}" for k, d in self.cones))
        out.append("c " + " ".join(repr(float(v)) for v in self.c))
        out.append("b " + " ".join(repr(float(v)) for v in self.b))
        for i, j, v in zip(coo.row, coo.col, coo.data):
            out.append(f"A {i} {j} {float(v)!r}")
        return "\n".join(out) + "\n"


@dataclass
class ConeSolution:
    """Result of a conic solve.

    ``status`` is one of ``optimal``, ``primal-infeasible``,
    ``dual-infeasible``, ``iteration-limit``, ``numerical-failure``.  For the
    infeasible statuses ``y, s`` (primal) or ``x`` (dual) carry the
    certificate ray.  ``iterates`` records, per iteration, the scaled
    candidate's (primal objective, dual objective, primal residual, dual
    residual); the objective pair is a meaningful bound pair only where the
    residuals are small.
    """

    status: str
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    obj: float
    res_primal: float = math.nan
    res_dual: float = math.nan
    res_gap: float = math.nan
    iterations: int = 0
    iterates: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def residuals(prob: ConeProblem, sol: ConeSolution):
    """Recompute (r_primal, r_dual, r_gap) from (x, y, s), independent of the solver.

    r_primal = ||Ax - b|| / (1 + ||b||),
    r_dual   = ||A'y + s - c|| / (1 + ||c||),
    r_gap    = |c'x - b'y| / (1 + |c'x| + |b'y|).
    """
    x, y, s = sol.x, sol.y, sol.s
    if len(x) != prob.num_vars or len(y) != prob.num_rows or len(s) != prob.num_vars:
        raise UsageError("solution dimensions do not match problem")
    rp = np.linalg.norm(prob.A @ x - prob.b) / (1.0 + np.linalg.norm(prob.b))
    rd = np.linalg.norm(prob.A.T @ y + s - prob.c) / (1.0 + np.linalg.norm(prob.c))
    px, dy = float(prob.c @ x), float(prob.b @ y)
    rg = abs(px - dy) / (1.0 + abs(px) + abs(dy))
    return float(rp), float(rd), float(rg)


# ---------------------------------------------------------------------------
# cone layout bookkeeping
# ---------------------------------------------------------------------------

def _J(blocks):
    out = blocks.copy()
    out[:, 1:] = -out[:, 1:]
    return out


def _jdot(blocks):
    """x'Jx per row for SOC blocks stacked as (K, d)."""
    return blocks[:, 0] ** 2 - np.einsum("ij,ij->i", blocks[:, 1:], blocks[:, 1:])


class _Layout:
    """Index arrays for vectorized cone operations."""

    def __init__(self, cones):
        free, nn = [], []
        groups = {}
        pos = 0
        for kind, d in cones:
            if kind == FREE:
                free.extend(range(pos, pos + d))
            elif kind == NONNEG:
                nn.extend(range(pos, pos + d))
            else:
                groups.setdefault(d, []).append(pos)
            pos += d
        self.n = pos
        self.free = np.asarray(free, dtype=np.intp)
        self.nn = np.asarray(nn, dtype=np.intp)
        # soc_groups: dim -> (num_cones, dim) column-index matrix
        self.soc_groups = {
            d: np.asarray(starts, dtype=np.intp)[:, None] + np.arange(d)[None, :]
            for d, starts in groups.items()
        }
        self.num_soc = sum(g.shape[0] for g in self.soc_groups.values())
        # barrier degree: 1 per nonnegative coordinate, 1 per SOC cone
        self.degree = len(self.nn) + self.num_soc

    def identity(self):
        e = np.zeros(self.n)
        e[self.nn] = 1.0
        for g in self.soc_groups.values():
            e[g[:, 0]] = 1.0
        return e

    def conic_inner(self, x, s):
        """x's over the conic (non-free) part."""
        total = float(x[self.nn] @ s[self.nn])
        for g in self.soc_groups.values():
            total += float(np.einsum("ij,ij->", x[g], s[g]))
        return total


class _Scaling:
    """Nesterov-Todd scaling state for one interior iterate (x, s).

    Nonnegative block: ``W = diag(sqrt(s/x))``.  Second-order cones use the
    quadratic representation ``P(u) = 2uu' - (u'Ju)J``: with ``zx = sqrt(x'Jx)``,
    ``zs = sqrt(s'Js)``, ``w = (x/zx + J s/zs) / (2 gamma)`` and
    ``q = sqrt(zs/zx) Jw``, the squared scaling is ``W^2 = P(q)`` (which maps
    x to s), and ``W = P(q^{1/2})`` with the Jordan square root of q.  In all
    blocks ``lambda = W x = W^{-1} s``.
    """

    def __init__(self, layout: _Layout, x, s):
        self.layout = layout
        xs_nn = x[layout.nn] * s[layout.nn]
        if np.any(xs_nn <= 0):
            raise FloatingPointError("nonnegative block left the interior")
        self.w_nn = np.sqrt(s[layout.nn] / x[layout.nn])
        self.lam_nn = np.sqrt(xs_nn)
        self.soc = {}
        for d, g in layout.soc_groups.items():
            X, S = x[g], s[g]
            jx, js = _jdot(X), _jdot(S)
            if np.any(jx <= 0) or np.any(js <= 0):
                raise FloatingPointError("second-order block left the interior")
            zx, zs = np.sqrt(jx), np.sqrt(js)
            xb = X / zx[:, None]
            sb = S / zs[:, None]
            gam = np.sqrt((1.0 + np.einsum("ij,ij->i", xb, sb)) / 2.0)
            wb = (xb + _J(sb)) / (2.0 * gam[:, None])      # wb'J wb = 1
            q = np.sqrt(zs / zx)[:, None] * _J(wb)         # W^2 = P(q)
            qdet = np.sqrt(zs / zx)                        # sqrt(q'Jq)
            v = (q + qdet[:, None] * _E(d)) / np.sqrt(2.0 * (q[:, 0] + qdet))[:, None]
            mv = qdet                                      # v'Jv = sqrt(q'Jq)
            lam = self._apply_p(v, mv, X)
            self.soc[d] = (q, v, mv, lam, g)

    @staticmethod
    def _apply_p(v, mv, U):
        """P(v) U = 2 v (v'U) - (v'Jv) J U, batched over cones."""
        return 2.0 * v * np.einsum("ij,ij->i", v, U)[:, None] - mv[:, None] * _J(U)

    @staticmethod
    def _apply_p_inv(v, mv, U):
        """P(v)^{-1} U = P(v^{-1}) U with v^{-1} = Jv / (v'Jv)."""
        jv = _J(v)
        return (2.0 * jv * np.einsum("ij,ij->i", jv, U)[:, None] / mv[:, None] - _J(U)) / mv[:, None]

    def apply_w(self, u):
        out = u.copy()
        L = self.layout
        out[L.nn] = u[L.nn] * self.w_nn
        for q, v, mv, _, g in self.soc.values():
            out[g] = self._apply_p(v, mv, u[g])
        return out

    def apply_w_inv(self, u):
        out = u.copy()
        L = self.layout
        out[L.nn] = u[L.nn] / self.w_nn
        for q, v, mv, _, g in self.soc.values():
            out[g] = self._apply_p_inv(v, mv, u[g])
        return out

    def lam(self):
        out = np.zeros(self.layout.n)
        out[self.layout.nn] = self.lam_nn
        for _, _, _, lam, g in self.soc.values():
            out[g] = lam
        return out

    def psi_nn(self):
        return self.w_nn ** 2

    def psi_soc(self, d):
        """Dense H = W^2 = P(q) blocks, shape (K, d, d), for dimension-d cones."""
        q, _, _, _, _ = self.soc[d]
        J = np.diag(np.concatenate(([1.0], -np.ones(d - 1))))
        det = _jdot(q)
        return 2.0 * np.einsum("ki,kj->kij", q, q) - det[:, None, None] * J[None, :, :]


def _E(d):
    e = np.zeros(d)
    e[0] = 1.0
    return e


def _jordan_prod(layout, u, w):
    """u o w in the Jordan algebra of the cone (zero on free columns)."""
    out = np.zeros(layout.n)
    out[layout.nn] = u[layout.nn] * w[layout.nn]
    for g in layout.soc_groups.values():
        U, W = u[g], w[g]
        out[g[:, 0]] = np.einsum("ij,ij->i", U, W)
        out[g[:, 1:]] = U[:, :1] * W[:, 1:] + W[:, :1] * U[:, 1:]
    return out


def _jordan_div(layout, num, lam):
    """Solve lam o z = num for z (arrow-matrix inverse, block by block)."""
    out = np.zeros(layout.n)
    out[layout.nn] = num[layout.nn] / lam[layout.nn]
    for g in layout.soc_groups.values():
        L, U = lam[g], num[g]
        det = _jdot(L)
        l0 = L[:, 0]
        lt_u = np.einsum("ij,ij->i", L[:, 1:], U[:, 1:])
        z0 = (l0 * U[:, 0] - lt_u) / det
        zt = (U[:, 1:] - z0[:, None] * L[:, 1:]) / l0[:, None]
        out[g[:, 0]] = z0
        out[g[:, 1:]] = zt
    return out


def _step_max(layout, lam, d_lam):
    """Largest step keeping lam + alpha * d_lam in the cone (lam interior)."""
    alpha = math.inf
    if len(layout.nn):
        dn = d_lam[layout.nn]
        neg = dn < 0
        if np.any(neg):
            alpha = min(alpha, float(np.min(-lam[layout.nn][neg] / dn[neg])))
    for g in layout.soc_groups.values():
        L, D = lam[g], d_lam[g]
        a2 = _jdot(D)
        a1 = L[:, 0] * D[:, 0] - np.einsum("ij,ij->i", L[:, 1:], D[:, 1:])
        a0 = _jdot(L)
        best = np.full(len(a0), math.inf)
        head_neg = D[:, 0] < 0
        best[head_neg] = -L[head_neg, 0] / D[head_neg, 0]
        # roots of a2 t^2 + 2 a1 t + a0 = 0; a0 > 0 at interior points
        disc = a1 * a1 - a2 * a0
        with np.errstate(invalid="ignore", divide="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            r1 = np.where(a2 != 0, (-a1 - sq) / a2, np.where(a1 != 0, -a0 / (2 * a1), math.inf))
            r2 = np.where(a2 != 0, (-a1 + sq) / a2, math.inf)
        for r in (r1, r2):
            ok = (disc >= 0) & (r > 1e-14)
            best[ok] = np.minimum(best[ok], r[ok])
        if len(best):
            alpha = min(alpha, float(best.min()))
    return alpha


# ---------------------------------------------------------------------------
# KKT machinery
# ---------------------------------------------------------------------------

class _KKT:
    """Quasi-definite KKT system [[-H - dI, A'], [A, dI]] with in-place updates.

    The sparsity pattern is fixed; only the H entries change between
    iterations.  ``slot`` maps each logical entry (in build order) to its
    position in the CSC data array, recovered with an index-probe matrix.
    """

    def __init__(self, prob: ConeProblem, layout: _Layout):
        A = prob.A.tocsc()
        A.sum_duplicates()
        self.A = A
        self.AT = A.T.tocsc()
        self.layout = layout
        n, m = prob.num_vars, prob.num_rows
        self.n, self.m = n, m
        acoo = A.tocoo()
        rows = [np.arange(n)]
        cols = [np.arange(n)]
        self._soc_slots = {}
        pos = n
        for d, g in layout.soc_groups.items():
            K = g.shape[0]
            rr = np.repeat(g[:, :, None], d, axis=2)   # (K, d, d): block row indices
            cc = np.repeat(g[:, None, :], d, axis=1)   # (K, d, d): block col indices
            off = ~np.eye(d, dtype=bool)
            rows.append(rr[:, off].ravel())
            cols.append(cc[:, off].ravel())
            cnt = K * d * (d - 1)
            self._soc_slots[d] = (pos, pos + cnt, off)
            pos += cnt
        rows.append(acoo.row + n)
        cols.append(acoo.col)
        rows.append(acoo.col)
        cols.append(acoo.row + n)
        rows.append(np.arange(n, n + m))
        cols.append(np.arange(n, n + m))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        nslots = len(rows)
        self._a_slots = (pos, pos + acoo.nnz)
        self._nslots = nslots
        # recover, for each CSC data position, the slot it came from
        probe = sp.csc_matrix((np.arange(nslots, dtype=float), (rows, cols)), shape=(n + m, n + m))
        if probe.nnz != nslots:
            raise UsageError("duplicate coordinates in KKT pattern (non-canonical A?)")
        self._slot_of_pos = probe.data.astype(np.intp)
        self.K = sp.csc_matrix((np.zeros(nslots), (rows, cols)), shape=(n + m, n + m))
        self._vals = np.zeros(nslots)
        self._vals[self._a_slots[0]:self._a_slots[0] + acoo.nnz] = acoo.data
        self._vals[self._a_slots[0] + acoo.nnz:self._a_slots[0] + 2 * acoo.nnz] = acoo.data
        self._vals[-m:] = STATIC_REG
        self._psi_nn = None
        self._psi_soc = {}
        self._lu = None

    def refresh(self, scaling: _Scaling):
        n = self.n
        L = self.layout
        self._psi_nn = scaling.psi_nn()
        diag = np.full(n, STATIC_REG)
        diag[L.nn] += self._psi_nn
        for d, g in L.soc_groups.items():
            H = scaling.psi_soc(d)
            self._psi_soc[d] = H
            dd = np.arange(d)
            np.add.at(diag, g.ravel(), H[:, dd, dd].ravel())
            lo, hi, off = self._soc_slots[d]
            self._vals[lo:hi] = -H[:, off].ravel()
        self._vals[:n] = -diag
        self.K.data[:] = self._vals[self._slot_of_pos]
        self._lu = spla.splu(self.K, permc_spec="COLAMD")

    def _apply_unreg(self, z):
        """[[-H, A'], [A, 0]] z, H from the last refresh (no regularization)."""
        n = self.n
        zx, zy = z[:n], z[n:]
        L = self.layout
        hz = np.zeros(n)
        hz[L.nn] = self._psi_nn * zx[L.nn]
        for d, g in L.soc_groups.items():
            hz[g] = np.einsum("kij,kj->ki", self._psi_soc[d], zx[g])
        return np.concatenate([-hz + self.AT @ zy, self.A @ zx])

    def solve(self, rx, ry):
        rhs = np.concatenate([rx, ry])
        sol = self._lu.solve(rhs)
        scale = 1.0 + np.linalg.norm(rhs)
        for _ in range(REFINE_PASSES):
            resid = rhs - self._apply_unreg(sol)
            if np.linalg.norm(resid) / scale < REFINE_TRIGGER:
                break
            sol = sol + self._lu.solve(resid)
        return sol[:self.n], sol[self.n:]


# ---------------------------------------------------------------------------
# main solver
# ---------------------------------------------------------------------------

def solve_conic(prob: ConeProblem, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER) -> ConeSolution:
    """Solve a standard-form conic program to relative tolerance ``tol``.

    On ``optimal``: relative primal/dual residuals and relative duality gap
    are all at most ``tol``.  On primal/dual infeasibility a certificate ray
    is returned.  ``numerical-failure`` means the KKT system degraded beyond
    what static regularization and refinement recover.
    """
    if tol <= 0:
        raise UsageError(f"tolerance must be positive, got {tol}")
    n, m = prob.num_vars, prob.num_rows
    layout = _Layout(prob.cones)
    c = np.asarray(prob.c, dtype=float)
    b = np.asarray(prob.b, dtype=float)
    A = prob.A

    if layout.degree == 0:
        return _solve_equality_only(prob, tol)

    kkt = _KKT(prob, layout)
    e = layout.identity()
    x = e.copy()
    s = e.copy()
    y = np.zeros(m)
    tau, kappa = 1.0, 1.0
    nu = layout.degree + 1
    norm_b = np.linalg.norm(b)
    norm_c = np.linalg.norm(c)
    mu0 = (layout.conic_inner(x, s) + tau * kappa) / nu

    iterates = []
    status = "iteration-limit"
    best = None   # (score, x, y, s, tau) snapshot of the best near-solution
    it = 0
    AT = kkt.AT
    for it in range(1, max_iter + 1):
        # homogeneous-model residuals
        rp = A @ x - tau * b                      # A x - tau b          -> 0
        rd = AT @ y + s - tau * c                 # A'y + s - tau c      -> 0
        rg = kappa + float(c @ x) - float(b @ y)  # kappa + c'x - b'y    -> 0
        mu = (layout.conic_inner(x, s) + tau * kappa) / nu

        # scaled candidate and stopping measures
        pobj = float(c @ x) / tau
        dobj = float(b @ y) / tau
        pres = np.linalg.norm(rp / tau) / (1.0 + norm_b)
        dres = np.linalg.norm(rd / tau) / (1.0 + norm_c)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        compl = layout.conic_inner(x, s) / (tau * tau)
        compl_rel = compl / (1.0 + abs(pobj) + abs(dobj))
        iterates.append((pobj, dobj, pres, dres))
        score = max(pres, dres, gap, compl_rel)
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), s.copy(), tau)

        if pres <= tol and dres <= tol and gap <= tol and compl_rel <= tol:
            status = "optimal"
            break

        # infeasibility certificates (only meaningful once mu has shrunk)
        if mu <= 1e-2 * mu0:
            by = float(b @ y)
            cx = float(c @ x)
            if by > 0:
                cert = np.linalg.norm(A.T @ (y / by) + s / by)
                if cert <= tol * (1.0 + norm_c):
                    return ConeSolution("primal-infeasible", np.zeros(n), y / by, s / by,
                                        math.inf, iterations=it, iterates=iterates)
            if cx < 0:
                cert = np.linalg.norm(A @ (x / -cx))
                if cert <= tol * (1.0 + norm_b):
                    return ConeSolution("dual-infeasible", x / -cx, np.zeros(m), np.zeros(n),
                                        -math.inf, iterations=it, iterates=iterates)
        if tau <= 1e-12 * max(1.0, kappa):
            status = "numerical-failure"
            break

        try:
            scaling = _Scaling(layout, x, s)
            kkt.refresh(scaling)
        except (ValueError, RuntimeError, FloatingPointError):
            status = "numerical-failure"
            break
        lam = scaling.lam()
        lam_lam = _jordan_prod(layout, lam, lam)

        try:
            u1, v1 = kkt.solve(c, b)
        except (ValueError, RuntimeError):
            status = "numerical-failure"
            break
        denom = kappa / tau + (float(b @ v1) - float(c @ u1))  # = kappa/tau + u1'Psi u1 > 0

        def newton(sigma, eta_vec, eta_t):
            """Direction for residual factor (1 - sigma), complementarity
            target sigma*mu*e - lam o lam - eta."""
            fac = 1.0 - sigma
            dc = sigma * mu * e - lam_lam - eta_vec
            dt = sigma * mu - tau * kappa - eta_t
            beta_vec = scaling.apply_w(_jordan_div(layout, dc, lam))
            rx = -fac * rd - beta_vec
            ry = -fac * rp
            u2, v2 = kkt.solve(rx, ry)
            dtau = (fac * rg + float(c @ u2) - float(b @ v2) + dt / tau) / denom
            dx = u2 + dtau * u1
            dy = v2 + dtau * v1
            # recover ds from dual feasibility (exact), not from Psi dx
            # (which amplifies roundoff when the scaling degenerates)
            ds = -fac * rd - kkt.AT @ dy + dtau * c
            ds[layout.free] = 0.0
            dkappa = (dt - kappa * dtau) / tau
            return dx, dy, ds, dtau, dkappa

        try:
            dxa, dya, dsa, dta, dka = newton(0.0, 0.0, 0.0)
        except (ValueError, RuntimeError):
            status = "numerical-failure"
            break
        alpha_a = _alpha(layout, scaling, lam, tau, kappa, dxa, dsa, dta, dka)
        sigma = min(1.0, max(0.0, 1.0 - alpha_a)) ** 3

        eta_vec = _jordan_prod(layout, scaling.apply_w(dxa), scaling.apply_w_inv(dsa))
        dx, dy, ds, dtau, dkappa = newton(sigma, eta_vec, dta * dka)
        alpha = min(STEP_DAMP * _alpha(layout, scaling, lam, tau, kappa, dx, ds, dtau, dkappa), 1.0)
        if not np.isfinite(alpha) or alpha <= 1e-13:
            status = "numerical-failure"
            break

        x = x + alpha * dx
        y = y + alpha * dy
        s = s + alpha * ds
        s[layout.free] = 0.0
        tau += alpha * dtau
        kappa += alpha * dkappa

    if status != "optimal" and best is not None:
        # fall back to the best iterate seen; it may already meet tolerance
        _, x, y, s, tau = best
    xc, yc, sc = x / tau, y / tau, s / tau
    sol = ConeSolution(status, xc, yc, sc, float(c @ xc), iterations=it, iterates=iterates)
    sol.res_primal, sol.res_dual, sol.res_gap = residuals(prob, sol)
    if status != "optimal" and max(sol.res_primal, sol.res_dual, sol.res_gap) <= tol:
        sol.status = "optimal"
    return sol


def _alpha(layout, scaling, lam, tau, kappa, dx, ds, dtau, dkappa):
    """Max step keeping (x, s, tau, kappa) in their cones, via scaled directions."""
    a = math.inf
    if dtau < 0:
        a = min(a, -tau / dtau)
    if dkappa < 0:
        a = min(a, -kappa / dkappa)
    a = min(a, _step_max(layout, lam, scaling.apply_w(dx)))
    a = min(a, _step_max(layout, lam, scaling.apply_w_inv(ds)))
    return a


def _solve_equality_only(prob, tol):
    """All-free corner case: solve the equality system in least-squares sense."""
    x = spla.lsqr(prob.A, prob.b, atol=1e-14, btol=1e-14)[0]
    y = spla.lsqr(prob.A.T, prob.c, atol=1e-14, btol=1e-14)[0]
    sol = ConeSolution("optimal", x, y, np.zeros(prob.num_vars), float(prob.c @ x), iterations=1)
    sol.res_primal, sol.res_dual, sol.res_gap = residuals(prob, sol)
    if max(sol.res_primal, sol.res_dual) > tol:
        sol.status = "numerical-failure"
    return sol
