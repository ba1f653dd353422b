"""Purely diffusive case ``c = 0``.

Drift of the boundary value for positive flux against the explicit comparison
envelope, the similarity variables ``tau = -log(-t)``, ``xi = x / sqrt(-t)``,
``U = V / sqrt(-t)`` for a flux with a quadratic zero ``g(y) = -y^2 + ...``,
the stationary profile ``V*``, the spectrum of its linearization, and the
exponential departure from a linear zero ``g(y) = -gamma y + ...``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal, lu_factor, lu_solve

from .core import Field, FluxModel, Grid1D, InputError, Params, default_length
from .evolve import EvolveConfig, Trajectory, evolve

SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# diffusive drift
# ---------------------------------------------------------------------------


@dataclass
class DriftReport:
    """Boundary drift ``u(0, t) ~ -a sqrt(t) + b`` against the comparison envelope.

    ``envelope_holds`` checks
    ``-2 g2 sqrt(t/pi) - |u0| <= u(0,t) <= -2 g1 sqrt(t/pi) + |u0|`` at every
    accepted step, with ``|u0|`` the sup norm of the initial data.
    """

    gamma1: float
    gamma2: float
    trace: np.ndarray
    fitted_coefficient: float
    fitted_offset: float
    envelope_holds: bool
    max_violation: float
    u0_sup: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "fitted_coefficient": self.fitted_coefficient,
            "fitted_offset": self.fitted_offset,
            "envelope_holds": self.envelope_holds,
            "max_violation": self.max_violation,
            "u0_sup": self.u0_sup,
            "meta": self.meta,
        }


def drift_envelope(t, gamma1: float, gamma2: float, u0_sup: float) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper comparison traces at ``x = 0``."""
    s = 2.0 * np.sqrt(np.asarray(t, dtype=float) / math.pi)
    return -gamma2 * s - u0_sup, -gamma1 * s + u0_sup


def drift_grid(t_end: float, n: int = 800, beta: float = 3.0) -> Grid1D:
    return Grid1D(default_length(0.0, t_end), n, "tanh", beta)


def drift_experiment(
    f: FluxModel,
    u0: Field,
    t_end: float,
    dt: float = 1e-2,
    mesh_tol: float | None = None,
    scheme: str = "imex-trapezoid",
    fit_from: float = 0.1,
) -> DriftReport:
    """Evolve with ``c = 0`` and fit ``u(0, t) = -a sqrt(t) + b`` on ``[fit_from t_end, t_end]``.

    ``mesh_tol`` defaults to ``sup g`` times the first mesh width: the
    boundary value cannot resolve the ``sqrt(t)`` layer while it is thinner
    than the first cell.

    Raises
    ------
    InputError
        ``inf g <= 0``.
    """
    g1, g2 = f.min_max()
    if g1 <= 0:
        raise InputError("drift experiment needs inf g > 0")
    sup0 = float(np.max(np.abs(u0.values)))
    if mesh_tol is None:
        mesh_tol = g2 * float(u0.grid.nodes[1])
    cfg = EvolveConfig(dt=dt, t_end=t_end, scheme=scheme, far_bc="neumann-strain", far_value=0.0, snapshot_every=0, dt_start=1e-8)
    traj = evolve(Params(0.0, f), u0, cfg)
    t, w = traj.trace[:, 0], traj.trace[:, 1]
    lo, hi = drift_envelope(t, g1, g2, sup0)
    viol = float(max(np.max(lo - w), np.max(w - hi), 0.0))
    sel = t >= fit_from * t_end
    A = np.column_stack([-np.sqrt(t[sel]), np.ones(np.count_nonzero(sel))])
    (a, b), *_ = np.linalg.lstsq(A, w[sel], rcond=None)
    return DriftReport(
        gamma1=g1,
        gamma2=g2,
        trace=traj.trace[:, :2].copy(),
        fitted_coefficient=float(a),
        fitted_offset=float(b),
        envelope_holds=viol <= mesh_tol,
        max_violation=viol,
        u0_sup=sup0,
        meta={"mesh_tol": mesh_tol, "steps": traj.meta["steps"], "bc_residual": traj.bc_residual, "L": u0.grid.L, "n": u0.grid.n},
    )


# ---------------------------------------------------------------------------
# stationary similarity profile
# ---------------------------------------------------------------------------


def _ode(xi, y):
    return [y[1], 0.5 * xi * y[1] + 0.5 * y[0]]


def tail_log_derivative(xi: float) -> float:
    """``V'/V`` of the decaying solution of ``V'' - xi V'/2 - V/2 = 0`` at large ``xi``.

    Uses the asymptotic series ``V ~ sum_k a_k xi^{-2k-1}`` with
    ``a_{k+1} = -2 (2k+1) a_k``, truncated at its smallest term.
    """
    a = [1.0]
    while True:
        k = len(a) - 1
        nxt = -2.0 * (2 * k + 1) * a[k]
        if abs(nxt) / xi ** (2 * k + 2) >= abs(a[k]) / xi ** (2 * k) or len(a) > 60:
            break
        a.append(nxt)
    k = np.arange(len(a))
    v = np.sum(np.array(a) * xi ** (-(2 * k + 1.0)))
    dv = np.sum(-(2 * k + 1.0) * np.array(a) * xi ** (-(2 * k + 2.0)))
    return float(dv / v)


def _shoot(a: float, xi_max: float) -> float:
    sol = solve_ivp(_ode, (0.0, xi_max), [a, -a * a], method="DOP853", rtol=1e-13, atol=1e-16)
    return float(sol.y[0, -1])


@dataclass
class StationaryProfile:
    """``V*`` from shooting; ``V0_shoot`` is the bisection value of ``V(0)``."""

    xi: np.ndarray
    V: np.ndarray
    dV: np.ndarray
    V0_shoot: float
    boundary_residual: float
    interior_residual: float
    xi_max: float
    dense: object = field(default=None, repr=False)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["xi", "V"])
        for a, b in zip(self.xi, self.V):
            w.writerow([repr(float(a)), repr(float(b))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def __call__(self, xi) -> np.ndarray:
        """``V*`` from the dense backward solution."""
        return self.dense(np.asarray(xi, dtype=float))[0]

    def derivative(self, xi) -> np.ndarray:
        return self.dense(np.asarray(xi, dtype=float))[1]


def similarity_stationary_profile(xi_max: float = 12.0, n: int = 1201, bracket=(0.1, 2.0)) -> StationaryProfile:
    """Solve ``V'' - (xi/2) V' - V/2 = 0``, ``V'(0) = -V(0)^2``, ``V -> 0``.

    ``V(0)`` is found by bisection on the sign of ``V(xi_max)`` for the forward
    shot with ``V'(0) = -V(0)^2``: too small a value escapes to ``+inf``, too
    large to ``-inf``.  The profile itself is integrated backward from
    ``xi_max``, where the growing mode is damped, starting from the asymptotic
    tail and scaled to ``V(0)``.

    Returns
    -------
    StationaryProfile
        Samples on ``n`` equispaced points, the boundary-condition residual
        ``|V'(0) + V(0)^2|`` of the backward profile and the sup of the ODE
        residual (fourth-order differences of the dense ``V'``).
    """
    if xi_max < 8:
        raise InputError("xi_max must be at least 8")
    lo, hi = bracket
    for _ in range(20):
        if _shoot(lo, xi_max) > 0 and _shoot(hi, xi_max) < 0:
            break
        lo, hi = 0.5 * lo, 2.0 * hi
    else:
        raise RuntimeError("shooting failed to bracket V(0)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _shoot(mid, xi_max) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    v0 = 0.5 * (lo + hi)
    back = solve_ivp(_ode, (xi_max, 0.0), [1.0, tail_log_derivative(xi_max)], method="DOP853", rtol=1e-13, atol=1e-20, dense_output=True)
    scale = v0 / back.y[0, -1]
    xi = np.linspace(0.0, xi_max, n)
    Y = back.sol(xi) * scale
    bres = abs(Y[1, 0] + Y[0, 0] ** 2)
    h = 1e-3
    inner = xi[(xi >= 2 * h) & (xi <= xi_max - 2 * h)]
    d = lambda s: back.sol(s)[1] * scale  # noqa: E731
    vpp = (-d(inner + 2 * h) + 8 * d(inner + h) - 8 * d(inner - h) + d(inner - 2 * h)) / (12 * h)
    Yi = back.sol(inner) * scale
    ires = float(np.max(np.abs(vpp - 0.5 * inner * Yi[1] - 0.5 * Yi[0])))
    return StationaryProfile(xi, Y[0], Y[1], v0, float(bres), ires, xi_max, lambda s: back.sol(s) * scale)


def vstar_printed(xi) -> np.ndarray:
    """The printed variant ``e^{xi^2/4} erfc(xi) / sqrt(pi)``, kept for comparison."""
    from .special import erfc

    xi = np.asarray(xi, dtype=float)
    return np.exp(0.25 * xi * xi) * erfc(xi) / SQRT_PI


# ---------------------------------------------------------------------------
# similarity spectrum
# ---------------------------------------------------------------------------


@dataclass
class SpectrumReport:
    operator: str
    grid_ladder: list[int]
    eigenvalues: list[list[float]]
    extrapolated: list[float]
    weight: str
    observed_order: list[float]
    cauchy: bool
    boundary_coeff: float
    xi_max: float

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "ladder": [{"n": n, "eigs": e} for n, e in zip(self.grid_ladder, self.eigenvalues)],
            "extrapolated": self.extrapolated,
            "weight": self.weight,
            "observed_order": self.observed_order,
            "cauchy": self.cauchy,
            "boundary_coeff": self.boundary_coeff,
            "xi_max": self.xi_max,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text


def l0_discrete(n: int, xi_max: float, kappa: float, k: int = 3) -> np.ndarray:
    """Top ``k`` eigenvalues of ``-L0`` after the Gaussian conjugation.

    With ``phi = e^{xi^2/8} psi`` the operator ``-L0 = d^2 - (xi/2) d - 1/2``
    becomes ``psi'' - (xi^2/16 + 1/4) psi`` and the boundary condition reads
    ``psi'(0) = -kappa psi(0)``; ``psi(xi_max) = 0``.  Second-order differences,
    ghost-node Robin row symmetrized by the half-cell weight.
    """
    h = xi_max / n
    xi = h * np.arange(n)
    q = xi * xi / 16.0 + 0.25
    d = 2.0 / h**2 + q
    e = np.full(n - 1, -1.0 / h**2)
    d[0] = 1.0 / h**2 - kappa / h + 0.5 * q[0]
    s = np.ones(n)
    s[0] = math.sqrt(2.0)
    ev = eigh_tridiagonal(d * s * s, e * s[:-1] * s[1:], eigvals_only=True, select="i", select_range=(0, k - 1))
    return -ev


def similarity_spectrum(n_ladder=(400, 800, 1600), xi_max: float = 16.0, k: int = 3, boundary_coeff: float | None = None) -> SpectrumReport:
    """Leading eigenvalues of ``-L0`` on a refinement ladder with Richardson extrapolation.

    ``boundary_coeff`` is ``kappa`` in ``phi'(0) = -kappa phi(0)``; the default
    ``2 V*(0)`` comes from the shooting profile.  Extrapolation assumes second
    order from the two finest levels; the observed order uses all three.
    """
    n_ladder = sorted(int(n) for n in n_ladder)
    if len(n_ladder) < 3:
        raise InputError("ladder needs three levels")
    if boundary_coeff is None:
        boundary_coeff = 2.0 * similarity_stationary_profile().V0_shoot
    eig = [l0_discrete(n, xi_max, boundary_coeff, k) for n in n_ladder]
    e1, e2, e3 = eig[-3], eig[-2], eig[-1]
    r = (n_ladder[-1] / n_ladder[-2]) ** 2
    ext = e3 + (e3 - e2) / (r - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        order = np.log(np.abs((e2 - e1) / (e3 - e2))) / math.log(n_ladder[-1] / n_ladder[-2])
    diffs = [np.abs(b - a) for a, b in zip(eig, eig[1:])]
    cauchy = bool(all(np.all(y <= x + 1e-15) for x, y in zip(diffs, diffs[1:])))
    return SpectrumReport(
        operator="L0-similarity",
        grid_ladder=n_ladder,
        eigenvalues=[[float(v) for v in e] for e in eig],
        extrapolated=[float(v) for v in ext],
        weight="Gaussian exp(-xi^2/4); conjugation phi = exp(xi^2/8) psi, Dirichlet psi(xi_max) = 0",
        observed_order=[float(v) for v in order],
        cauchy=cauchy,
        boundary_coeff=float(boundary_coeff),
        xi_max=float(xi_max),
    )


# ---------------------------------------------------------------------------
# similarity evolution
# ---------------------------------------------------------------------------


def cheb(N: int, length: float) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev points on ``[0, length]`` (increasing) and the differentiation matrix."""
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    c = np.where((j == 0) | (j == N), 2.0, 1.0) * (-1.0) ** j
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    # map [1, -1] -> [0, length]
    xi = 0.5 * length * (1.0 - x)
    return xi, -D * (2.0 / length)


def clenshaw_curtis(N: int, length: float) -> np.ndarray:
    """Quadrature weights on the points of :func:`cheb`."""
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    inner = slice(1, N)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
        v -= np.cos(N * theta[inner]) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k * k - 1)
    w[inner] = 2.0 * v / N
    return w * 0.5 * length


@dataclass
class SimilarityState:
    """``V(xi, tau)`` on Chebyshev points of ``[0, xi_max]`` and ``eta = e^{tau/2}``-type scale."""

    xi_grid: Grid1D
    V: np.ndarray
    tau: float
    eta: float

    def __post_init__(self):
        if not self.eta >= 0:
            raise InputError("eta must be non-negative")


def similarity_state(fn, xi_max: float = 12.0, N: int = 64, tau: float = 0.0, eta: float = 0.0) -> SimilarityState:
    xi, _ = cheb(N, xi_max)
    return SimilarityState(Grid1D.from_nodes(xi), np.asarray(fn(xi), dtype=float), tau, eta)


def vstar_state(xi_max: float = 12.0, N: int = 64, tau: float = 0.0, eta: float = 0.0, scale: float = 1.0) -> SimilarityState:
    prof = similarity_stationary_profile(max(xi_max, 8.0))
    return similarity_state(lambda x: scale * prof(x), xi_max, N, tau, eta)


def quadratic_flux() -> FluxModel:
    """``g(y) = 2 (cos y - 1) = -y^2 + O(y^4)``."""
    return FluxModel.cosine(1.0).shifted(offset=math.pi, scale=-2.0)


@dataclass
class SimilarityRun:
    state: SimilarityState
    taus: np.ndarray
    V: np.ndarray
    eta: np.ndarray
    blew_up: bool


def similarity_evolve(
    state: SimilarityState,
    flux_correction: bool,
    tau_end: float,
    dtau: float = 1e-3,
    flux: FluxModel | None = None,
    blowup: float = 1e3,
) -> SimilarityRun:
    """BDF2 (backward-Euler start) in ``tau`` with Chebyshev collocation in ``xi``.

    Interior: ``V_tau = V_xixi - (xi/2) V_xi - V/2``.  At ``xi = 0``:
    ``V_xi = -V^2`` when ``flux_correction`` is off, and the exact transformed
    condition ``V_xi = g(eta V) / eta^2`` when on (``g`` defaults to
    :func:`quadratic_flux`).  At ``xi_max``: ``V_xi / V`` equals the tail log
    derivative of the stationary equation.  ``eta`` follows ``eta_tau = eta/2``
    in closed form.
    """
    xi = state.xi_grid.nodes
    N = len(xi) - 1
    xi_max = xi[-1]
    xi_c, D = cheb(N, xi_max)
    if not np.allclose(xi_c, xi):
        raise InputError("state must live on the Chebyshev points of cheb(N, xi_max)")
    g = quadratic_flux() if flux is None else flux
    A = D @ D - 0.5 * xi[:, None] * D - 0.5 * np.eye(N + 1)
    rho = tail_log_derivative(xi_max)

    def bc(v0, eta):
        if not flux_correction or eta == 0.0:
            return -v0 * v0, -2.0 * v0
        y = eta * v0
        return float(g(y)) / eta**2, float(g.deriv(y)) / eta

    steps = max(1, int(round(tau_end / dtau)))
    h = tau_end / steps
    V = state.V.copy()
    Vold = None
    taus = [state.tau]
    hist = [V.copy()]
    etas = [state.eta]
    blew = False
    factor_cache: dict = {}
    for i in range(steps):
        tau_new = state.tau + (i + 1) * h
        eta_new = state.eta * math.exp(0.5 * (tau_new - state.tau))
        if Vold is None:
            a0, rhs = 1.0 / h, V / h
        else:
            a0, rhs = 1.5 / h, (2.0 * V - 0.5 * Vold) / h
        M = a0 * np.eye(N + 1) - A
        M[0] = D[0]
        M[N] = D[N] - rho * np.eye(N + 1)[N]
        key = a0
        if key not in factor_cache:
            factor_cache[key] = lu_factor(M)
        lu = factor_cache[key]
        b = rhs.copy()
        b[N] = 0.0
        # Newton on the boundary value: the only nonlinearity
        W = V.copy()
        e0 = np.zeros(N + 1)
        e0[0] = 1.0
        p = lu_solve(lu, e0)
        for _ in range(30):
            val, der = bc(W[0], eta_new)
            b[0] = val - der * W[0]
            # solve (M - der e0 e0^T) W = b via Sherman-Morrison
            q = lu_solve(lu, b)
            Wn = q + p * (der * q[0] / (1.0 - der * p[0]))
            if np.max(np.abs(Wn - W)) <= 1e-14 * (1.0 + np.max(np.abs(Wn))):
                W = Wn
                break
            W = Wn
        Vold, V = V, W
        taus.append(tau_new)
        hist.append(V.copy())
        etas.append(eta_new)
        if not np.all(np.isfinite(V)) or np.max(np.abs(V)) > blowup:
            blew = True
            break
    new = SimilarityState(state.xi_grid, V, taus[-1], etas[-1])
    return SimilarityRun(new, np.array(taus), np.array(hist), np.array(etas), blew)


def unstable_mode(prof: StationaryProfile, xi) -> np.ndarray:
    """Eigenfunction of ``-L0`` for eigenvalue 1: ``(V* + xi V*')/2`` (time translation)."""
    xi = np.asarray(xi, dtype=float)
    return 0.5 * (prof(xi) + xi * prof.derivative(xi))


def unstable_projection(V: np.ndarray, vstar: np.ndarray, phi1: np.ndarray, xi: np.ndarray) -> float:
    """Coefficient of ``V - V*`` along ``phi1`` in the ``exp(-xi^2/4)`` inner product."""
    N = len(xi) - 1
    w = clenshaw_curtis(N, xi[-1]) * np.exp(-0.25 * xi * xi)
    return float(np.dot(w, (V - vstar) * phi1) / np.dot(w, phi1 * phi1))


def similarity_two_route(
    tau_end: float = 1.0,
    check_taus=(0.25, 0.5, 1.0),
    xi_window: float = 6.0,
    flux: FluxModel | None = None,
    dtau: float = 1e-3,
    dt: float = 1e-4,
    grid: Grid1D | None = None,
) -> dict:
    """Compare :func:`similarity_evolve` with a direct ``(x, t)`` run from ``V*`` at ``t = -1``.

    At ``t = -1`` both variables coincide (``eta = 1``).  The ``(x, t)``
    solution is mapped back through ``V = sqrt(-t) u(xi sqrt(-t), t)`` with
    linear interpolation in ``t`` between stored steps.

    Returns
    -------
    dict
        ``max_diff`` per checked ``tau`` on ``xi <= xi_window`` and the
        corresponding ``change`` of ``V`` from its initial value.
    """
    g = quadratic_flux() if flux is None else flux
    st = vstar_state(tau=0.0, eta=1.0)
    run = similarity_evolve(st, True, tau_end, dtau=dtau, flux=g)
    if grid is None:
        grid = Grid1D(60.0, 1600, "tanh", 3.0)
    from scipy.special import erfcx

    u0 = Field(grid, erfcx(grid.nodes / 2.0) / SQRT_PI)
    cfg = EvolveConfig(dt=dt, t_end=1.0 - math.exp(-tau_end), far_bc="neumann-strain", snapshot_every=1)
    traj = evolve(Params(0.0, g), u0, cfg)
    xi = st.xi_grid.nodes
    m = xi <= xi_window
    out = {"taus": [], "max_diff": [], "change": []}
    for tau in check_taus:
        s = math.exp(-tau)
        t = 1.0 - s
        i = int(np.clip(np.searchsorted(traj.times, t), 1, len(traj.times) - 1))
        w = (t - traj.times[i - 1]) / (traj.times[i] - traj.times[i - 1])
        u = (1.0 - w) * traj.values[i - 1] + w * traj.values[i]
        Vx = np.interp(xi * math.sqrt(s), grid.nodes, u) * math.sqrt(s)
        j = int(np.argmin(np.abs(run.taus - tau)))
        out["taus"].append(float(tau))
        out["max_diff"].append(float(np.max(np.abs(Vx - run.V[j])[m])))
        out["change"].append(float(np.max(np.abs(run.V[j] - run.V[0])[m])))
    return out


# ---------------------------------------------------------------------------
# linear zero: exponential departure
# ---------------------------------------------------------------------------


@dataclass
class RateFit:
    gamma: float
    rate: float
    predicted: float
    profile_slope: float
    window: tuple[float, float]
    points: int

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def departing_trajectory(params: Params, delta: float = 1e-8, t_end: float | None = None, grid: Grid1D | None = None, dt: float = 1e-2) -> Trajectory:
    """Ramp ``max(delta + g(delta) x, 0)`` evolved forward from the zero ``y = 0``."""
    if params.c != 0:
        raise InputError("the linear-zero rate fit is for c = 0")
    gp = float(params.flux.deriv(0.0))
    if gp >= 0:
        raise InputError("need g'(0) < 0")
    gam = -gp
    if t_end is None:
        t_end = math.log(1e-2 / delta) / gam**2
    if grid is None:
        grid = Grid1D(default_length(0.0, t_end), 800, "tanh", 3.0)
    x = grid.nodes
    u0 = np.maximum(delta + float(params.flux(delta)) * x, 0.0)
    cfg = EvolveConfig(dt=dt, t_end=t_end, scheme="imex-trapezoid", far_bc="neumann-strain", snapshot_every=1, dt_start=1e-8)
    return evolve(params, Field(grid, u0, 0.0, 0.0), cfg)


def rate_fit_linear_zero(params: Params, traj: Trajectory, window: tuple[float, float] = (1e-5, 1e-3)) -> RateFit:
    """Fit ``u(0, t) = A e^{r t}`` where ``u(0, t)`` lies in ``window``; compare ``r`` with ``gamma^2``.

    The profile log-slope is fitted on ``x in [0, 2/gamma]`` at the last stored
    time inside the window and compared with ``-gamma``.

    Raises
    ------
    RuntimeError
        Fewer than five trace points in the window.
    """
    gam = -float(params.flux.deriv(0.0))
    t, w = traj.trace[:, 0], traj.trace[:, 1]
    sel = (w >= window[0]) & (w <= window[1])
    if np.count_nonzero(sel) < 5:
        raise RuntimeError("insufficient dynamic range in the fit window; widen it or run longer")
    rate = float(np.polyfit(t[sel], np.log(w[sel]), 1)[0])
    t_last = t[sel][-1]
    i = int(np.argmin(np.abs(traj.times - t_last)))
    x = traj.grid.nodes
    m = (x <= 2.0 / gam) & (traj.values[i] > 0)
    slope = float(np.polyfit(x[m], np.log(traj.values[i][m]), 1)[0])
    return RateFit(gam, rate, gam * gam, slope, window, int(np.count_nonzero(sel)))
