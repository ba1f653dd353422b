"""Boundary integral reference solver.

With ``w(t) = u(0, t)`` and ``F(w) = g(w) - (c/2) w``, the weighted problem on
the half-line gives the Volterra equation

    w(t) = I0(t) - int_0^t K(t - s) F(w(s)) ds,   K(tau) = exp(-c^2 tau / 4) / sqrt(pi tau),

where ``I0`` is the free evolution of the initial data.  ``I0`` is integrated
exactly for piecewise-linear data with an affine tail.  The memory integral is
approximated by product integration: ``exp(-c^2 tau/4) F`` is taken piecewise
linear and the ``tau^{-1/2}`` weight is integrated exactly.  The unknowns are
found block by block with a fixed-point iteration whose block length keeps the
map contractive.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf, erfc

from .core import Field, Params, scalar_flux
from .evolve import Trajectory


class ContractionFailure(RuntimeError):
    """Fixed-point iteration failed even on the smallest allowed block."""


def _gauss_lin(a, b, y0, y1, mu, t):
    """``int_{y0}^{y1} (a + b y) N(y; mu, 2t) dy`` for the normal density N, vectorized."""
    s = math.sqrt(4.0 * t)
    z0 = (y0 - mu) / s
    z1 = (y1 - mu) / s
    # probability mass via erf or erfc depending on the side, to limit cancellation
    both_pos = z0 > 0
    p = np.where(both_pos, 0.5 * (erfc(z0) - erfc(z1)), 0.5 * (erf(z1) - erf(z0)))
    e0 = np.exp(-np.minimum(z0 * z0, 745.0))
    e1 = np.where(np.isinf(z1), 0.0, np.exp(-np.minimum(np.where(np.isinf(z1), 0.0, z1) ** 2, 745.0)))
    m1 = (e0 - e1) / (2.0 * math.sqrt(math.pi))
    return (a + b * mu) * p + b * s * m1


def free_boundary_term(u0: Field, c: float, t: float, x: float = 0.0) -> float:
    """``u(x, t)`` of the free evolution: the initial-data part of the kernel representation.

    ``e^{cx/2} int_0^inf [Gamma(x-y,t) + Gamma(x+y,t)] e^{-cy/2} u0(y) dy``; the
    exponential weights are absorbed into shifted Gaussians.
    """
    y = u0.grid.nodes
    v = u0.values
    b = np.diff(v) / np.diff(y)
    a = v[:-1] - b * y[:-1]
    y0 = np.append(y[:-1], y[-1])
    y1 = np.append(y[1:], np.inf)
    a = np.append(a, u0.intercept)
    b = np.append(b, u0.strain)
    direct = np.sum(_gauss_lin(a, b, y0, y1, x - c * t, t))
    mirror = np.sum(_gauss_lin(a, b, y0, y1, -x - c * t, t))
    return float(direct + math.exp(c * x) * mirror) if x else float(direct + mirror)


def _product_weights(m: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Weights for ``int_{(m-1)h}^{mh} tau^{-1/2} phi(tau) dtau`` with phi linear.

    Returns arrays ``(wa, wb)`` indexed by ``m = 1..M`` (index 0 unused): weight on
    ``phi((m-1)h)`` and on ``phi(mh)``.
    """
    mm = np.arange(m + 1, dtype=float)
    ta = np.maximum(mm - 1, 0) * h
    tb = mm * h
    m0 = 2.0 * (np.sqrt(tb) - np.sqrt(ta))
    m1 = (2.0 / 3.0) * (tb**1.5 - ta**1.5)
    wb = (m1 - ta * m0) / h
    wa = m0 - wb
    wa[0] = wb[0] = 0.0
    return wa, wb


def evolve_volterra(
    params: Params,
    u0: Field,
    t_end: float,
    dt: float = 1e-3,
    block: float | None = None,
    tol: float = 1e-13,
    max_iter: int = 200,
    snapshot_times=(),
    boundary=None,
) -> Trajectory:
    """Boundary trace ``u(0, t)`` from the Volterra equation on a uniform time grid.

    Parameters
    ----------
    params : Params
    u0 : Field
        Initial data; the far-field affine tail is used beyond the grid.
    t_end, dt : float
        Horizon and time step.
    block : float, optional
        Block length for the fixed-point iteration.  Defaults to half of the
        contraction bound ``pi / (4 Lip^2)`` with ``Lip = sup|g'| + c/2``.
    snapshot_times : sequence of float
        Times at which the full field is reconstructed by kernel quadrature.

    Returns
    -------
    Trajectory
        ``trace`` rows carry ``(t, u(0,t), g(u(0,t)))``; ``values`` hold the
        reconstructed snapshots (the initial field first).
    """
    c = params.c
    if boundary is None:
        gg = scalar_flux(params.flux)
        boundary = lambda t, u: gg(u)  # noqa: E731
    lip = params.flux.lipschitz() + 0.5 * c
    bound = math.pi / (4.0 * max(lip, 1e-12) ** 2)
    bound = min(bound, math.pi / (4.0 * max(lip, 1e-12)))
    blk = 0.5 * bound if block is None else min(block, bound)
    N = int(math.ceil(t_end / dt - 1e-9))
    h = t_end / N
    t = h * np.arange(N + 1)
    i0 = np.array([u0.values[0]] + [free_boundary_term(u0, c, tk) for tk in t[1:]])
    wa, wb = _product_weights(N, h)
    decay = np.exp(-0.25 * c * c * t)  # e^{-c^2 tau/4} on lags
    inv_sqrt_pi = 1.0 / math.sqrt(math.pi)

    def F(tk, wk):
        return np.array([boundary(a, b)[0] for a, b in zip(tk, wk)]) - 0.5 * c * wk

    w = np.empty(N + 1)
    w[0] = u0.values[0]
    Fv = np.empty(N + 1)
    Fv[0] = F(t[:1], w[:1])[0]
    steps = max(1, min(N, int(blk / h)))
    n = 1
    shrinks = 0
    while n <= N:
        m = min(steps, N - n + 1)
        idx = np.arange(n, n + m)
        # node j enters target k with weight wb[k-j] (left end of its interval)
        # plus wa[k-j+1] (right end of the previous interval, j >= 1)
        k = idx[:, None]
        j = np.arange(n)[None, :]
        lag = k - j
        Wh = wb[lag] + np.where(j >= 1, wa[np.minimum(lag + 1, N)], 0.0)
        hist = (Wh * decay[lag]) @ Fv[:n]
        r = np.arange(m)
        lagb = r[:, None] - r[None, :]
        low = lagb >= 0
        lb = np.where(low, lagb, 0)
        Wb = np.where(low, np.where(lb >= 1, wb[lb], 0.0) + wa[lb + 1], 0.0) * decay[lb]
        wk = np.full(m, w[n - 1])
        converged = False
        prev = np.inf
        for it in range(max_iter):
            new = i0[idx] - inv_sqrt_pi * (hist + Wb @ F(t[idx], wk))
            diff = np.max(np.abs(new - wk))
            wk = new
            if diff <= tol * (1.0 + np.max(np.abs(wk))):
                converged = True
                break
            if it > 3 and diff > prev:
                break
            prev = diff
        if not converged:
            if steps == 1:
                raise ContractionFailure(f"fixed point failed at t={t[n]:.6g}")
            steps = max(1, steps // 2)
            shrinks += 1
            continue
        w[idx] = wk
        Fv[idx] = F(t[idx], wk)
        n += m

    gvals = np.array([boundary(a, b)[0] for a, b in zip(t, w)])
    trace = np.column_stack([t, w, gvals])
    times = [0.0]
    vals = [u0.values.copy()]
    for ts in snapshot_times:
        if ts <= 0:
            continue
        k = int(round(ts / h))
        vals.append(reconstruct_field(u0, c, t[: k + 1], Fv[: k + 1]))
        times.append(t[k])
    return Trajectory(
        params=params,
        grid=u0.grid,
        times=np.array(times),
        values=np.array(vals),
        trace=trace,
        bc_residual=0.0,
        meta={"method": "volterra", "dt": h, "block_steps": steps, "block_shrinks": shrinks},
    )


def reconstruct_field(u0: Field, c: float, t: np.ndarray, Fv: np.ndarray) -> np.ndarray:
    """``u(x, t[-1])`` at the grid nodes from the boundary history ``F`` on ``t``.

    For ``x > 0`` the kernel ``exp(-c^2 tau/4 - x^2/(4 tau)) / sqrt(pi tau)`` is
    smooth, so composite trapezoid quadrature on the stored time grid is used.
    """
    T = t[-1]
    x = u0.grid.nodes
    out = np.empty_like(x)
    tau = T - t
    for i, xi in enumerate(x):
        free = free_boundary_term(u0, c, T, xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            ker = np.where(tau > 0, np.exp(-0.25 * c * c * tau - xi * xi / (4.0 * np.where(tau > 0, tau, 1.0))) / np.sqrt(np.pi * np.where(tau > 0, tau, 1.0)), 0.0)
        if xi == 0.0:
            wa, wb = _product_weights(len(t) - 1, t[1] - t[0])
            lag = np.arange(len(t))[::-1]
            wts = np.where(lag >= 1, wb[np.maximum(lag, 0)], 0.0) + np.where(lag + 1 < len(t), wa[np.minimum(lag + 1, len(t) - 1)], 0.0)
            mem = np.dot(wts, np.exp(-0.25 * c * c * tau) * Fv) / math.sqrt(math.pi)
        else:
            mem = np.trapz(ker * Fv, t)
        out[i] = free - math.exp(0.5 * c * xi) * mem
    return out
