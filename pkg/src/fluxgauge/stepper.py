"""Method-of-lines discretization of ``u_t = u_xx - c u_x`` on ``[0, L]``.

Interior nodes use three-point nonuniform centered differences.  The boundary
node is algebraic: the one-sided three-point derivative at ``x = 0`` equals the
flux, and after eliminating the linear rows this leaves a scalar equation for
``u(0)`` solved by Newton at every implicit stage.  The far node is either an
outflow row (``u_t = -c u_x``, exact for affine far fields), a Neumann row, or
a Dirichlet row.

The stage linear algebra is a constant sparse factorization per implicit
coefficient, so one step costs one sparse solve plus a scalar Newton loop.
Tangent-linear propagation reuses the same factorizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import splu

from .core import FluxModel, Grid1D, scalar_flux

GAMMA_TRBDF2 = 2.0 - math.sqrt(2.0)

FAR_BCS = ("outflow", "neumann-strain", "weighted-dirichlet-zero", "dirichlet")


class StepFailure(RuntimeError):
    """Boundary Newton iteration failed to converge."""


def one_sided_weights(h1: float, h2: float) -> tuple[float, float, float]:
    """Weights for ``f'(0)`` from samples at ``0, h1, h2`` (exact for quadratics)."""
    w0 = -(1.0 / h1 + 1.0 / h2)
    w1 = h2 / (h1 * (h2 - h1))
    w2 = -h1 / (h2 * (h2 - h1))
    return w0, w1, w2


def interior_operator(x: np.ndarray, c: float) -> sps.csr_matrix:
    """Rows 1..n-2 of ``d_xx - c d_x``; rows 0 and n-1 are left empty."""
    n = len(x)
    hl = x[1:-1] - x[:-2]
    hr = x[2:] - x[1:-1]
    d2l = 2.0 / (hl * (hl + hr))
    d2c = -2.0 / (hl * hr)
    d2r = 2.0 / (hr * (hl + hr))
    d1l = -hr / (hl * (hl + hr))
    d1c = (hr - hl) / (hl * hr)
    d1r = hl / (hr * (hl + hr))
    rows = np.repeat(np.arange(1, n - 1), 3)
    cols = (np.arange(1, n - 1)[:, None] + np.array([-1, 0, 1])[None, :]).ravel()
    vals = np.column_stack([d2l - c * d1l, d2c - c * d1c, d2r - c * d1r]).ravel()
    return sps.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass
class StageRecord:
    """Boundary data of one implicit stage, enough to replay its tangent."""

    beta: float
    t: float
    u0: float
    dg: float


class Stepper:
    """Implicit one-step schemes for the semi-discrete system.

    Parameters
    ----------
    grid : Grid1D
    c : float
        Advection speed.
    flux : FluxModel, optional
        Boundary flux; the boundary row reads ``u_x(0) = g(u(0))``.
    boundary : callable, optional
        ``boundary(t, u0) -> (value, d value / d u0)``, overrides ``flux``.
    far_bc : str
        One of ``outflow``, ``neumann-strain``, ``weighted-dirichlet-zero``, ``dirichlet``.
    far_value : float
        Strain for ``neumann-strain`` or value for ``dirichlet``.
    """

    def __init__(
        self,
        grid: Grid1D,
        c: float,
        flux: FluxModel | None = None,
        boundary=None,
        far_bc: str = "outflow",
        far_value: float = 0.0,
        newton_tol: float = 1e-13,
        newton_maxit: int = 50,
    ):
        if far_bc not in FAR_BCS:
            raise ValueError(f"unknown far-field condition {far_bc!r}")
        self.grid = grid
        self.x = grid.nodes
        self.n = grid.n
        self.c = float(c)
        self.far_bc = far_bc
        self.far_value = 0.0 if far_bc == "weighted-dirichlet-zero" else float(far_value)
        if boundary is None:
            if flux is None:
                raise ValueError("need a flux or a boundary function")
            gg = scalar_flux(flux)
            boundary = lambda t, u: gg(u)  # noqa: E731
        self.boundary = boundary
        self.newton_tol = newton_tol
        self.newton_maxit = newton_maxit

        x = self.x
        n = self.n
        self.a = one_sided_weights(x[1] - x[0], x[2] - x[0])
        hb1 = x[-1] - x[-2]
        hb2 = x[-1] - x[-3]
        w0, w1, w2 = one_sided_weights(hb1, hb2)
        self.b = (-w2, -w1, -w0)  # backward derivative at x_{n-1} from x_{n-3}, x_{n-2}, x_{n-1}

        A = interior_operator(x, self.c).tolil()
        diff = np.ones(n, dtype=bool)
        diff[0] = False
        if far_bc == "outflow":
            for j, w in zip((n - 3, n - 2, n - 1), self.b):
                A[n - 1, j] = -self.c * w
        else:
            diff[-1] = False
        self.A = A.tocsr()
        self.diff = diff
        self.alg_rhs = np.zeros(n - 1)
        if not diff[-1]:
            self.alg_rhs[-1] = self.far_value
        self._factors: dict[float, tuple] = {}

    # ------------------------------------------------------------------
    def _factor(self, beta: float):
        key = float(beta)
        f = self._factors.get(key)
        if f is not None:
            return f
        n = self.n
        M = sps.diags(self.diff.astype(float))
        K = (M - beta * self.A).tolil()
        if not self.diff[-1]:
            K[n - 1, :] = 0.0
            if self.far_bc == "neumann-strain":
                for j, w in zip((n - 3, n - 2, n - 1), self.b):
                    K[n - 1, j] = w
            else:
                K[n - 1, n - 1] = 1.0
        K = K.tocsc()[1:, :]
        L0 = K[:, 0].toarray().ravel()
        Lw = splu(K[:, 1:].tocsc())
        wq = Lw.solve(L0)
        a0, a1, a2 = self.a
        a_eff = a0 - a1 * wq[0] - a2 * wq[1]
        f = (Lw, wq, a_eff)
        if len(self._factors) > 64:
            self._factors.clear()
        self._factors[key] = f
        return f

    def _stage(self, rhs: np.ndarray, beta: float, t: float, guess: float):
        """Solve one implicit stage; ``rhs`` covers rows 1..n-1."""
        Lw, wq, a_eff = self._factor(beta)
        wp = Lw.solve(rhs)
        a1, a2 = self.a[1], self.a[2]
        bc = a1 * wp[0] + a2 * wp[1]
        u0 = guess
        bnd = self.boundary
        tol = self.newton_tol
        for _ in range(self.newton_maxit):
            gv, dg = bnd(t, u0)
            phi = a_eff * u0 + bc - gv
            dphi = a_eff - dg
            if dphi == 0.0:
                raise StepFailure("singular boundary Newton derivative")
            du = phi / dphi
            u0 -= du
            if abs(du) <= tol * (1.0 + abs(u0)):
                break
        else:
            raise StepFailure("boundary Newton did not converge")
        gv, dg = bnd(t, u0)
        out = np.empty(self.n)
        out[0] = u0
        out[1:] = wp - u0 * wq
        return out, StageRecord(beta, t, u0, dg)

    def _rhs(self, u: np.ndarray, beta_explicit: float) -> np.ndarray:
        r = u.copy()
        if beta_explicit:
            r += beta_explicit * (self.A @ u)
        r = r[1:]
        if not self.diff[-1]:
            r[-1] = self.alg_rhs[-1]
        return r

    # ------------------------------------------------------------------
    def step(self, u: np.ndarray, t: float, dt: float, scheme: str = "trbdf2"):
        """Advance one step; returns ``(u_new, records)``."""
        if scheme == "trbdf2":
            g = GAMMA_TRBDF2
            beta = 0.5 * g * dt
            u1, r1 = self._stage(self._rhs(u, beta), beta, t + g * dt, u[0])
            c1 = 1.0 / (g * (2.0 - g))
            c0 = (1.0 - g) ** 2 / (g * (2.0 - g))
            rhs = (c1 * u1 - c0 * u)[1:]
            if not self.diff[-1]:
                rhs[-1] = self.alg_rhs[-1]
            u2, r2 = self._stage(rhs, beta, t + dt, u1[0])
            return u2, (r1, r2)
        if scheme == "cn":
            beta = 0.5 * dt
            u1, r1 = self._stage(self._rhs(u, beta), beta, t + dt, u[0])
            return u1, (r1,)
        if scheme == "be":
            u1, r1 = self._stage(self._rhs(u, 0.0), dt, t + dt, u[0])
            return u1, (r1,)
        raise ValueError(f"unknown scheme {scheme!r}")

    def step_tangent(self, du: np.ndarray, records, scheme: str = "trbdf2") -> np.ndarray:
        """Propagate perturbations ``du`` (shape ``(n,)`` or ``(n, m)``) through a recorded step."""
        if scheme == "trbdf2":
            g = GAMMA_TRBDF2
            r1, r2 = records
            d1 = self._stage_tangent(self._rhs_tangent(du, r1.beta), r1)
            c1 = 1.0 / (g * (2.0 - g))
            c0 = (1.0 - g) ** 2 / (g * (2.0 - g))
            rhs = (c1 * d1 - c0 * du)[1:]
            if not self.diff[-1]:
                rhs[-1] = 0.0
            return self._stage_tangent(rhs, r2)
        if scheme == "cn":
            (r1,) = records
            return self._stage_tangent(self._rhs_tangent(du, r1.beta), r1)
        if scheme == "be":
            (r1,) = records
            return self._stage_tangent(self._rhs_tangent(du, 0.0), r1)
        raise ValueError(f"unknown scheme {scheme!r}")

    def _rhs_tangent(self, du, beta_explicit):
        r = du.copy()
        if beta_explicit:
            r = r + beta_explicit * (self.A @ du)
        r = r[1:]
        if not self.diff[-1]:
            r[-1] = 0.0
        return r

    def _stage_tangent(self, rhs, rec: StageRecord):
        Lw, wq, a_eff = self._factor(rec.beta)
        wp = Lw.solve(rhs)
        a1, a2 = self.a[1], self.a[2]
        d0 = -(a1 * wp[0] + a2 * wp[1]) / (a_eff - rec.dg)
        out = np.empty((self.n,) + np.shape(rhs)[1:])
        out[0] = d0
        if np.ndim(rhs) == 1:
            out[1:] = wp - d0 * wq
        else:
            out[1:] = wp - wq[:, None] * d0[None, :]
        return out

    # ------------------------------------------------------------------
    def boundary_derivative(self, u: np.ndarray) -> float:
        a0, a1, a2 = self.a
        return a0 * u[0] + a1 * u[1] + a2 * u[2]

    def rhs_field(self, u: np.ndarray) -> np.ndarray:
        """Semi-discrete time derivative on differential rows (boundary row excluded)."""
        return self.A @ u
