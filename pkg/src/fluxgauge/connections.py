"""Entire solutions between consecutive zeros of the flux.

Heteroclinic connections are computed from ramp initial data started next to
one zero (a sub- or super-solution, so the evolution is monotone in time) and
recentred at the time the boundary value crosses the midpoint.  The module also
holds the explicit super-solution ladder with its erfc boundary trace, the
saddle-node (SNIC) scan of the cosine family as ``theta -> 1``, and the
spectrum of the linearization at a constant state.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq, minimize_scalar

from .core import GAUGE, DomainError, Field, FluxModel, Grid1D, InputError, Params
from .diagnostics import ComparisonReport, check_comparison
from .evolve import EvolveConfig, Trajectory, evolve
from .fourier_orbit import FourierOrbit, continue_to_theta
from .special import erf, erfc

ROOT_TOL = 1e-12
REACH_FRAC = 1e-3
LOCAL_WINDOW = 5.0


# ---------------------------------------------------------------------------
# zeros of the flux
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroPair:
    """Consecutive zeros ``y1 < y2`` of ``g`` with the sign of ``g`` between them.

    ``degenerate`` marks a pair built from a single double zero (``y2 = y1 + 2 pi``)
    or from non-isolated zeros.
    """

    y1: float
    y2: float
    sign_between: str
    gprime_y1: float
    gprime_y2: float
    degenerate: bool = False

    @property
    def span(self) -> float:
        return self.y2 - self.y1

    @property
    def start(self) -> float:
        """Backward-in-time limit of the connection."""
        return self.y1 if self.sign_between == "negative" else self.y2

    @property
    def end(self) -> float:
        return self.y2 if self.sign_between == "negative" else self.y1

    def to_dict(self) -> dict:
        return {
            "y1": self.y1,
            "y2": self.y2,
            "sign_between": self.sign_between,
            "gprime_y1": self.gprime_y1,
            "gprime_y2": self.gprime_y2,
            "degenerate": self.degenerate,
        }


def _zeros(f: FluxModel, n: int, root_tol: float) -> tuple[list[float], list[bool]]:
    u = np.linspace(0.0, GAUGE, n + 1)
    g = f(u)
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.count_nonzero(np.abs(g[:-1]) < 1e-12 * scale) > 2:
        raise DomainError("flux vanishes on a segment; zeros are not isolated")
    roots, double = [], []
    for a, b, ga, gb in zip(u[:-1], u[1:], g[:-1], g[1:]):
        if ga == 0.0:
            roots.append(float(a))
            double.append(abs(float(f.deriv(a))) < 1e-8)
        elif ga * gb < 0:
            roots.append(brentq(lambda v: float(f(v)), a, b, xtol=root_tol, rtol=1e-15))
            double.append(False)
    # touching zeros: sign-preserving local extrema of g with |g| tiny
    d = f.deriv(u)
    for a, b, da, db in zip(u[:-1], u[1:], d[:-1], d[1:]):
        if da * db < 0:
            m = brentq(lambda v: float(f.deriv(v)), a, b, xtol=root_tol, rtol=1e-15)
            if abs(float(f(m))) < 1e-10 and all(abs(m - r) > 1e-6 for r in roots):
                roots.append(float(m))
                double.append(True)
    order = np.argsort(roots)
    return [float(roots[i]) % GAUGE for i in order], [double[i] for i in order]


def find_zero_pairs(f: FluxModel, n: int = 4096, root_tol: float = ROOT_TOL) -> list[ZeroPair]:
    """All zeros of ``g`` in ``[0, 2 pi)`` grouped into consecutive pairs.

    The last pair wraps around the gauge as ``(z_last - 2 pi, z_0)``.  A single
    double zero ``z`` gives the degenerate pair ``(z - 2 pi, z)``.

    Raises
    ------
    DomainError
        ``g`` vanishes on a segment.
    """
    zs, double = _zeros(f, n, root_tol)
    if not zs:
        return []
    pts = [(zs[-1] - GAUGE, double[-1])] + list(zip(zs, double))
    pairs = []
    for (a, da), (b, db) in zip(pts[:-1], pts[1:]):
        mid = float(f(0.5 * (a + b)))
        pairs.append(
            ZeroPair(
                y1=a,
                y2=b,
                sign_between="positive" if mid > 0 else "negative",
                gprime_y1=float(f.deriv(a)),
                gprime_y2=float(f.deriv(b)),
                degenerate=bool(len(zs) == 1 or da or db),
            )
        )
    return pairs


# ---------------------------------------------------------------------------
# linearization at a constant state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class A0Spectrum:
    """Spectrum of ``-A0`` at a constant state with ``g'(y) = gprime0``.

    ``point_eigenvalue`` is ``gprime0^2 - gprime0 c`` when its eigenfunction
    ``exp(-lambda_c x)``, ``lambda_c = c/2 - gprime0``, decays; otherwise it is
    ``None`` and ``formal_value`` still carries the formula.
    """

    c: float
    gprime0: float
    essential_edge: float
    point_eigenvalue: float | None
    eigenfunction_rate: float
    formal_value: float
    discrete_top: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "gprime0": self.gprime0,
            "essential_edge": self.essential_edge,
            "point_eigenvalue": self.point_eigenvalue,
            "eigenfunction_rate": self.eigenfunction_rate,
            "formal_value": self.formal_value,
            "discrete_top": list(self.discrete_top),
        }


def a0_discrete(c: float, gprime0: float, L: float = 40.0, n: int = 4000, k: int = 3) -> np.ndarray:
    """Top ``k`` eigenvalues of ``-A0`` on ``[0, L]`` by finite differences.

    ``A0 = -d^2/dx^2 + c^2/4`` with ``phi'(0) = (gprime0 - c/2) phi(0)`` and
    ``phi(L) = 0``.  The ghost-node Robin row is symmetrized by the half-cell
    mass weight at ``x = 0``.
    """
    h = L / n
    a = gprime0 - 0.5 * c
    m = n  # unknowns at x_0 .. x_{n-1}
    diag = np.full(m, 2.0 / h**2 + 0.25 * c * c)
    off = np.full(m - 1, -1.0 / h**2)
    # row 0 from the ghost value phi_{-1} = phi_1 - 2 h a phi_0, halved
    diag[0] = 1.0 / h**2 + a / h + 0.125 * c * c
    off[0] = -1.0 / h**2
    w = np.ones(m)
    w[0] = 0.5
    s = 1.0 / np.sqrt(w)
    d = diag * s * s
    e = off * s[:-1] * s[1:]
    ev = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))
    return np.sort(-ev)[::-1]


def a0_spectrum(c: float, gprime0: float, discretize: bool = True) -> A0Spectrum:
    """Closed-form spectrum, cross-checked by ``a0_discrete`` when ``discretize``."""
    if c < 0:
        raise InputError("c must be non-negative")
    edge = -0.25 * c * c
    formal = gprime0 * gprime0 - gprime0 * c
    rate = 0.5 * c - gprime0
    point = formal if rate > 0 else None
    top = tuple(float(v) for v in a0_discrete(c, gprime0)) if discretize else ()
    return A0Spectrum(c, gprime0, edge, point, rate, formal, top)


# ---------------------------------------------------------------------------
# heteroclinic connections
# ---------------------------------------------------------------------------


@dataclass
class ConnectionRecord:
    """Connection from ``pair.start`` (as ``t -> -inf``) to ``pair.end``.

    ``trajectory`` is recentred so that ``u(0, 0)`` is the midpoint of the pair.
    """

    pair: ZeroPair
    params: Params
    trajectory: Trajectory
    t_half: float
    rates: dict
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pair": self.pair.to_dict(),
            "backward_limit": self.pair.start,
            "forward_limit": self.pair.end,
            "params": self.params.to_dict(),
            "t_half": self.t_half,
            "rates": self.rates,
            "flags": self.flags,
            "meta": self.meta,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def ramp_profile(pair: ZeroPair, flux: FluxModel, x: np.ndarray, n_ramp: int) -> np.ndarray:
    """``max(y1 + 1/n + g(y1 + 1/n) x, y1)`` or its mirror ``min(y2 - 1/n + ..., y2)``."""
    d = 1.0 / n_ramp
    if d >= 0.5 * pair.span:
        raise InputError("ramp offset 1/n must be below half the gap between the zeros")
    if pair.sign_between == "negative":
        y = pair.y1 + d
        return np.maximum(y + float(flux(y)) * x, pair.y1)
    y = pair.y2 - d
    return np.minimum(y + float(flux(y)) * x, pair.y2)


def _fit_backward_rate(t, w, start, span, n_ramp):
    dist = np.abs(w - start)
    sel = (dist > 1.5 / n_ramp) & (dist < 0.25 * span)
    if np.count_nonzero(sel) < 5:
        return {"exp_rate": math.nan, "points": int(np.count_nonzero(sel))}
    p = np.polyfit(t[sel], np.log(dist[sel]), 1)
    return {"exp_rate": float(p[0]), "points": int(np.count_nonzero(sel))}


def _fit_forward_power(t, w, end, span):
    dist = np.abs(w - end)
    sel = (t > 1.0) & (dist < 0.25 * span) & (dist > 0)
    if np.count_nonzero(sel) < 5:
        return math.nan
    return float(np.polyfit(np.log(t[sel]), np.log(dist[sel]), 1)[0])


def compute_heteroclinic(
    pair: ZeroPair,
    params: Params,
    n_ramp: int = 100,
    grid: Grid1D | None = None,
    dt: float = 1e-2,
    t_max: float = 2000.0,
    t_after: float = 10.0,
    reach_frac: float | None = None,
) -> ConnectionRecord:
    """Evolve the ramp next to ``pair.start`` until ``u(0, t)`` reaches ``pair.end``.

    Arrival means ``|u(0, t) - end| <= reach_frac * (y2 - y1)``; the default is
    ``1e-3`` for ``c > 0`` and ``5e-2`` for ``c = 0``, where the approach is
    algebraic (about ``t^{-1/2}``).

    The direction follows ``sign_between``: for ``g < 0`` between the zeros
    the solution increases from ``y1``, for ``g > 0`` it decreases from ``y2``.
    Integration continues ``t_after`` beyond the arrival so the forward
    convergence can be inspected.  Every step is stored.

    Raises
    ------
    RuntimeError
        No traversal before ``t_max``.
    """
    if params.c < 0:
        raise InputError("c must be non-negative")
    flux = params.flux
    if grid is None:
        grid = Grid1D(max(60.0, 60.0 + 2.0 * params.c * t_after), 600, "tanh", 2.0)
    u0 = ramp_profile(pair, flux, grid.nodes, n_ramp)
    start, end = pair.start, pair.end
    if reach_frac is None:
        reach_frac = REACH_FRAC if params.c > 0 else 5e-2
    tol = reach_frac * pair.span
    sgn = 1.0 if end > start else -1.0
    arrival = [None]

    def stop(t, u):
        if arrival[0] is None and sgn * (u[0] - end) >= -tol:
            arrival[0] = t
        return arrival[0] is not None and t >= arrival[0] + t_after

    cfg = EvolveConfig(dt=dt, t_end=t_max, scheme="imex-trapezoid", far_bc="auto", far_value=0.0, snapshot_every=1)
    traj = evolve(params, Field(grid, u0, 0.0, start), cfg, stop=stop)
    if arrival[0] is None:
        raise RuntimeError(f"no traversal from {start:.6g} to {end:.6g} before t = {t_max:g}")
    w = traj.trace[:, 1]
    mid = 0.5 * (pair.y1 + pair.y2)
    k = int(np.argmax(sgn * (w - mid) >= 0))
    t0, t1, w0, w1 = traj.trace[k - 1, 0], traj.trace[k, 0], w[k - 1], w[k]
    t_half = float(t0 + (mid - w0) * (t1 - t0) / (w1 - w0))
    traj = traj.shifted_time(t_half)

    vals = traj.values
    eps = 1e-10 * max(1.0, abs(pair.y1), abs(pair.y2))
    x = grid.nodes
    loc = x <= LOCAL_WINDOW
    incr = np.diff(vals, axis=0) * sgn
    rates = {
        "backward": _fit_backward_rate(traj.trace[:, 0], w, start, pair.span, n_ramp),
        "forward_power": _fit_forward_power(traj.trace[:, 0], w, end, pair.span),
        "backward_predicted": (a0_spectrum(params.c, pair.gprime_y1 if start == pair.y1 else pair.gprime_y2, False).point_eigenvalue),
        "forward": {
            "window": LOCAL_WINDOW,
            "sup_window": float(np.max(np.abs(vals[-1][loc] - end))),
            "sup_domain": float(np.max(np.abs(vals[-1] - end))),
            "boundary": float(abs(w[-1] - end)),
        },
    }
    flags = {
        "confined": bool(np.all(vals >= pair.y1 - eps) and np.all(vals <= pair.y2 + eps)),
        "trace_strictly_inside": bool(np.all((w > pair.y1) & (w < pair.y2))),
        "monotone_in_t": bool(np.all(incr >= -1e-9)),
        "reached": True,
        "degenerate_pair": pair.degenerate,
    }
    meta = {"n_ramp": n_ramp, "dt": dt, "reach_frac": reach_frac, "t_arrival": float(arrival[0] - t_half), "steps": traj.meta["steps"]}
    return ConnectionRecord(pair, params, traj, t_half, rates, flags, meta)


def _at_time(traj: Trajectory, t: float, mask: np.ndarray) -> np.ndarray:
    ts = traj.times
    k = int(np.clip(np.searchsorted(ts, t), 1, len(ts) - 1))
    w = (t - ts[k - 1]) / (ts[k] - ts[k - 1])
    return (1.0 - w) * traj.values[k - 1][mask] + w * traj.values[k][mask]


def translate_distance(
    a: ConnectionRecord,
    b: ConnectionRecord,
    x_window: tuple[float, float] = (0.0, LOCAL_WINDOW),
    t_window: tuple[float, float] = (-5.0, 5.0),
    max_shift: float = 1.0,
) -> dict:
    """``min_s sup |a(x, t) - b(x, t + s)|`` over a space-time window.

    The window is intersected with the stored times of ``a`` and, for every
    trial shift, of ``b``.  Snapshots of ``b`` are interpolated linearly in time.

    Returns
    -------
    dict
        ``distance``, ``shift`` and the time window actually used.
    """
    if a.params != b.params or a.pair != b.pair:
        raise ValueError("connections must share params and zero pair")
    xa, xb = a.trajectory.grid.nodes, b.trajectory.grid.nodes
    if len(xa) != len(xb) or not np.allclose(xa, xb):
        raise ValueError("connections must share a grid")
    mask = (xa >= x_window[0]) & (xa <= x_window[1])
    ta = a.trajectory.times
    tb = b.trajectory.times
    lo = max(t_window[0], ta[0], tb[0] + max_shift)
    hi = min(t_window[1], ta[-1], tb[-1] - max_shift)
    if hi <= lo:
        raise ValueError("time ranges do not overlap on the window")
    idx = np.flatnonzero((ta >= lo) & (ta <= hi))
    A = a.trajectory.values[idx][:, mask]

    def dist(s):
        return max(float(np.max(np.abs(A[i] - _at_time(b.trajectory, ta[j] + s, mask)))) for i, j in enumerate(idx))

    if a is b:
        return {"distance": 0.0, "shift": 0.0, "t_window": (float(lo), float(hi))}
    r = minimize_scalar(dist, bounds=(-max_shift, max_shift), method="bounded", options={"xatol": 1e-6})
    best = min((float(r.fun), float(r.x)), (dist(0.0), 0.0))
    return {"distance": best[0], "shift": best[1], "t_window": (float(lo), float(hi))}


def connection_csv(rec: ConnectionRecord, path=None) -> str:
    return rec.trajectory.to_csv(path)


# ---------------------------------------------------------------------------
# explicit super-solution ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupersolConstants:
    c: float
    gprime0: float
    eps: float
    delta: float
    lam: float
    gamma: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def supersol_constants(params: Params, gprime0: float, eps: float | None = None) -> SupersolConstants:
    """``lambda = -c^2/4 + 4 (c/2 - g'(0) + eps)^2``, ``gamma = sqrt(c^2/4 + lambda)``.

    ``delta`` is the largest ``y`` with ``g >= (g'(0) - eps) y`` on ``[0, y]``;
    the flux must vanish at ``0``.
    """
    c = params.c
    if c < 0:
        raise InputError("c must be non-negative")
    if eps is None:
        eps = 0.05 * max(1.0, abs(gprime0))
    g = params.flux
    if abs(float(g(0.0))) > 1e-10:
        raise InputError("the super-solution ladder needs g(0) = 0")
    y = np.linspace(0.0, math.pi, 200001)[1:]
    bad = np.flatnonzero(g(y) < (gprime0 - eps) * y)
    delta = float(y[bad[0] - 1]) if len(bad) and bad[0] > 0 else (float(y[-1]) if not len(bad) else 0.0)
    lam = -0.25 * c * c + 4.0 * (0.5 * c - gprime0 + eps) ** 2
    if lam <= 0:
        raise InputError("lambda must be positive")
    return SupersolConstants(c, gprime0, eps, delta, lam, math.sqrt(0.25 * c * c + lam))


def supersol_trace_quadrature(t: float, k: float, sc: SupersolConstants) -> float:
    """Boundary trace from quadrature of the defining heat-kernel integrals.

    The memory integral is taken in ``r = sqrt(t - s)`` to remove the
    ``(t - s)^{-1/2}`` singularity.
    """
    if t <= 0:
        return 1.0 / k**2
    c, lam, gam = sc.c, sc.lam, sc.gamma
    free = float(erfc(0.5 * c * math.sqrt(t)))
    mem, _ = quad(lambda r: math.exp(-(gam * gam) * r * r), 0.0, math.sqrt(t), epsabs=0.0, epsrel=1e-13)
    return (free + 2.0 * gam * math.exp(lam * t) * mem / math.sqrt(math.pi)) / k**2


def supersol_trace_closed(t, k: float, sc: SupersolConstants, variant: str = "gamma"):
    """Closed form ``(erfc(c sqrt(t)/2) + e^{lambda t} erf(a sqrt(t))) / k^2``.

    ``variant='gamma'`` uses ``a = gamma``; ``'gamma2'`` uses ``a = gamma^2``.
    """
    a = sc.gamma if variant == "gamma" else sc.gamma**2
    st = np.sqrt(np.asarray(t, dtype=float))
    return (erfc(0.5 * sc.c * st) + np.exp(sc.lam * np.asarray(t, dtype=float)) * erf(a * st)) / k**2


def _first_hit(fn, level: float, lam: float, k: float) -> float:
    hi = max(1.0, 2.0 * math.log(k) / lam)
    while fn(hi) < level:
        hi *= 2.0
    return brentq(lambda t: fn(t) - level, 0.0, hi, xtol=1e-13, rtol=1e-15)


@dataclass(frozen=True)
class LadderRung:
    k: int
    T_k: float
    bound: float
    holds: bool
    T_k_closed_gamma: float
    T_k_closed_gamma2: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def supersol_ladder(params: Params, gprime0: float, k_list, eps: float | None = None) -> tuple[SupersolConstants, list[LadderRung]]:
    """``T_k``: first time the boundary trace reaches ``1/k``, against ``log(k - 1)/lambda``.

    ``T_k`` uses the quadrature trace; both closed-form variants are reported.

    Raises
    ------
    InputError
        ``k <= 1/delta`` for some ``k``.
    """
    sc = supersol_constants(params, gprime0, eps)
    rungs = []
    for k in k_list:
        k = int(k)
        if k * sc.delta <= 1.0:
            raise InputError(f"k = {k} does not exceed 1/delta = {1.0 / sc.delta:.6g}")
        Tq = _first_hit(lambda t: supersol_trace_quadrature(t, k, sc), 1.0 / k, sc.lam, k)
        Ta = _first_hit(lambda t: float(supersol_trace_closed(t, k, sc, "gamma")), 1.0 / k, sc.lam, k)
        Tb = _first_hit(lambda t: float(supersol_trace_closed(t, k, sc, "gamma2")), 1.0 / k, sc.lam, k)
        bound = math.log(k - 1) / sc.lam
        rungs.append(LadderRung(k, Tq, bound, Tq > bound, Ta, Tb))
    return sc, rungs


def ladder_slope(rungs: list[LadderRung]) -> float:
    """Least-squares slope of ``T_k`` against ``log k``."""
    lk = np.log([r.k for r in rungs])
    return float(np.polyfit(lk, [r.T_k for r in rungs], 1)[0])


@dataclass
class SupersolComparison:
    k: int
    n_ramp: int
    T_pde: float
    report: ComparisonReport
    boundary_inequality: bool
    upper: Trajectory
    lower: Trajectory

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n_ramp": self.n_ramp,
            "T_pde": self.T_pde,
            "comparison": self.report.to_dict(),
            "boundary_inequality": self.boundary_inequality,
        }


def supersol_comparison(
    params: Params,
    gprime0: float,
    k: int,
    n_ramp: int | None = None,
    eps: float | None = None,
    grid: Grid1D | None = None,
    dt: float = 1e-2,
) -> SupersolComparison:
    """Evolve the super-solution and the ramp ``max(1/n + g(1/n) x, 0)`` with ``n > k^2``.

    The super-solution solves the full equation with ``u_x(0, t) = -gamma
    e^{lambda t} / k^2`` and ``u(., 0) = 1/k^2``, up to the time ``T_pde`` its
    boundary value reaches ``1/k``.  Both runs share the step sequence, so the
    comparison uses every stored time.
    """
    sc = supersol_constants(params, gprime0, eps)
    n = k * k + 1 if n_ramp is None else int(n_ramp)
    if n <= k * k:
        raise InputError("the ramp needs n > k^2")
    if grid is None:
        grid = Grid1D(max(40.0, 12.0 / max(params.c, 0.1)), 600, "tanh", 2.0)
    x = grid.nodes
    hit = [None]

    def bnd(t, u):
        return (-sc.gamma * math.exp(sc.lam * t) / k**2, 0.0)

    def stop(t, u):
        if u[0] >= 1.0 / k:
            hit[0] = t
            return True
        return False

    t_guess = 4.0 * math.log(k) / sc.lam + 10.0
    cfg = EvolveConfig(dt=dt, t_end=t_guess, scheme="imex-trapezoid", far_bc="auto", snapshot_every=1, dt_start=1e-8)
    upper = evolve(params, Field(grid, np.full(grid.n, 1.0 / k**2), 0.0, 1.0 / k**2), cfg, boundary=bnd, stop=stop)
    T_pde = upper.times[-1] if hit[0] is None else hit[0]
    lo0 = np.maximum(1.0 / n + float(params.flux(1.0 / n)) * x, 0.0)
    cfg_lo = EvolveConfig(dt=dt, t_end=float(T_pde), scheme="imex-trapezoid", far_bc="auto", snapshot_every=1, dt_start=1e-8)
    lower = evolve(params, Field(grid, lo0, 0.0, 0.0), cfg_lo)
    rep = check_comparison(lower, upper)
    # the initial row is excluded: constant data does not satisfy the boundary condition
    ux = upper.trace[1:, 2]
    gu = params.flux(upper.trace[1:, 1])
    ineq = bool(np.all(ux <= gu + 1e-12))
    return SupersolComparison(k, n, float(T_pde), rep, ineq, upper, lower)


# ---------------------------------------------------------------------------
# saddle-node on the invariant circle
# ---------------------------------------------------------------------------


def homoclinic(c: float, n_ramp: int = 100, dt: float = 1e-2, t_after: float = 10.0, grid: Grid1D | None = None) -> ConnectionRecord:
    """Connection of ``g = 1 + cos u`` from ``pi`` down to ``-pi`` (a homoclinic up to the gauge)."""
    flux = FluxModel.cosine(1.0)
    pairs = find_zero_pairs(flux)
    if grid is None:
        grid = Grid1D(80.0, 800, "tanh", 2.0)
    return compute_heteroclinic(pairs[0], Params(c, flux), n_ramp=n_ramp, grid=grid, dt=dt, t_after=t_after)


def _orbit_window_distance(orb: FourierOrbit, ref, x: np.ndarray, ts: np.ndarray, max_shift: float) -> tuple[float, float]:
    """``min_s sup |u_orbit(x, t) - ref(x, t + s)|`` over the window; ``ref`` may be a constant."""
    U = np.array([orb.field(x, t) for t in ts])
    if not isinstance(ref, Trajectory):
        return float(np.max(np.abs(U - ref))), 0.0
    mask = np.isin(ref.grid.nodes, x)

    def dist(s):
        return max(float(np.max(np.abs(U[i] - _at_time(ref, t + s, mask)))) for i, t in enumerate(ts))

    r = minimize_scalar(dist, bounds=(-max_shift, max_shift), method="bounded", options={"xatol": 1e-6})
    best = min((float(r.fun), float(r.x)), (dist(0.0), 0.0))
    return best


@dataclass
class SnicReport:
    c: float
    rows: list[dict]
    monotone: bool
    ratio: float
    distances_decreasing: bool
    pi_distances_decreasing: bool
    homoclinic_meta: dict

    def to_dict(self) -> dict:
        return self.__dict__.copy()

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "T"])
        for r in self.rows:
            w.writerow([repr(float(r["theta"])), repr(float(r["T"]))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def snic_scan(
    c: float,
    theta_grid,
    hom: ConnectionRecord | None = None,
    x_window: float = LOCAL_WINDOW,
    t_window: tuple[float, float] = (-5.0, 5.0),
    n_t: int = 51,
    N_max: int = 8192,
) -> SnicReport:
    """Periods of the cosine family as ``theta -> 1`` and window comparisons.

    Orbits come from the boundary Fourier solver continued in ``1 - theta``.
    Orbits with phase ``u(0, 0) = 0`` are compared with the homoclinic (time
    aligned at its midpoint crossing, then optimally shifted) on
    ``[0, x_window] x t_window``; orbits with ``u(0, 0) = pi`` are compared with
    the constant ``pi`` on the same window.
    """
    thetas = sorted(float(t) for t in theta_grid)
    if hom is None:
        hom = homoclinic(c)
    x = hom.trajectory.grid.nodes
    xw = x[x <= x_window]
    ts = np.linspace(t_window[0], t_window[1], n_t)
    rows = []
    try:
        orbs0 = continue_to_theta(thetas, c, N_max=N_max)
        orbs_pi = continue_to_theta(thetas, c, N_max=N_max, y_phase=math.pi)
    except Exception as exc:  # record the last good point
        return SnicReport(c, [{"theta": thetas[0], "T": math.nan, "error": str(exc)}], False, math.nan, False, False, hom.meta)
    for th, o, op in zip(thetas, orbs0, orbs_pi):
        d, s = _orbit_window_distance(o, hom.trajectory, xw, ts, 2.0)
        dpi, _ = _orbit_window_distance(op, math.pi, xw, ts, 0.0)
        rows.append({"theta": th, "T": float(o.T), "modes": o.N, "dist_homoclinic": d, "shift": s, "dist_pi": dpi})
    T = [r["T"] for r in rows]
    dh = [r["dist_homoclinic"] for r in rows]
    dp = [r["dist_pi"] for r in rows]
    return SnicReport(
        c=c,
        rows=rows,
        monotone=bool(all(b > a for a, b in zip(T, T[1:]))),
        ratio=float(T[-1] / T[0]),
        distances_decreasing=bool(all(b < a for a, b in zip(dh, dh[1:]))),
        pi_distances_decreasing=bool(all(b < a for a, b in zip(dp, dp[1:]))),
        homoclinic_meta={**hom.meta, "t_half": hom.t_half},
    )
