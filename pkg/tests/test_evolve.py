"""Method-of-lines stepper, Volterra reference solver and diagnostics."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fluxgauge import Field, FluxModel, Grid1D, InputError, Params, to_weighted
from fluxgauge.core import default_length
from fluxgauge.diagnostics import check_comparison, is_nonincreasing, zero_count, zero_history
from fluxgauge.evolve import EvolveConfig, evolve
from fluxgauge.volterra import evolve_volterra

from .conftest import affine_field

SLOW = settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def compatible_field(p: Params, grid: Grid1D, k: float, b: float) -> Field:
    """``b + k x + (g(b) - k) x e^{-x}``: smooth, with ``u_x(0) = g(u(0))``."""
    x = grid.nodes
    return Field(grid, b + k * x + (float(p.flux(b)) - k) * x * np.exp(-x), k, b)


# ---------------------------------------------------------------------------
# evolve: exact solutions
# ---------------------------------------------------------------------------


def test_trivial_solution_x_minus_t():
    g = Grid1D(12.0, 512)
    cfg = EvolveConfig(dt=1e-3, t_end=2.0, far_bc="neumann-strain", far_value=1.0)
    tr = evolve(Params(1.0, FluxModel.cosine(0.0)), affine_field(g), cfg)
    assert abs(tr.boundary_at(2.0) + 2.0) <= 5e-4


@pytest.mark.parametrize("c", [0.0, 1.0, 3.0])
def test_zero_flux_keeps_constant(c):
    g = Grid1D(default_length(c, 5.0), 128, "tanh", 2.0)
    cfg = EvolveConfig(dt=1e-2, t_end=5.0, snapshot_every=50)
    tr = evolve(Params(c, FluxModel.table([0.0] * 8)), Field(g, np.full(g.n, 3.0), 0.0, 3.0), cfg)
    assert np.max(np.abs(tr.values - 3.0)) <= 1e-10  # rounding only


@pytest.mark.parametrize("scheme", ["imex-trapezoid", "implicit-newton", "backward-euler"])
def test_pi_is_stationary_at_theta_one(scheme):
    g = Grid1D(12.0, 128, "tanh", 2.0)
    cfg = EvolveConfig(dt=1e-2, t_end=5.0, scheme=scheme, snapshot_every=50)
    tr = evolve(Params(1.0, FluxModel.cosine(1.0)), Field(g, np.full(g.n, math.pi), 0.0, math.pi), cfg)
    assert np.max(np.abs(tr.values - math.pi)) <= 1e-10  # rounding only


def test_boundary_condition_satisfied():
    g = Grid1D(12.0, 256, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    tr = evolve(p, compatible_field(p, g, 1.0, 0.0), EvolveConfig(dt=1e-2, t_end=2.0, scheme="implicit-newton"))
    assert tr.bc_residual <= 1e-10


def test_trajectory_layout_and_csv():
    g = Grid1D(12.0, 32, "tanh", 2.0)
    tr = evolve(Params(1.0, FluxModel.cosine(0.3)), affine_field(g), EvolveConfig(dt=0.1, t_end=0.5, snapshot_every=1))
    assert np.all(np.diff(tr.times) > 0)
    assert tr.to_csv().splitlines()[0] == "t,x,u"
    assert tr.trace_csv().splitlines()[0] == "t,u0,ux0"
    assert len(tr.to_csv().splitlines()) == 1 + len(tr.times) * g.n


@pytest.mark.parametrize("kw", [{"dt": -1.0}, {"dt": 0.0}, {"t_end": math.inf}, {"scheme": "rk4"}, {"far_bc": "periodic"}])
def test_config_validation(kw):
    with pytest.raises(InputError):
        EvolveConfig(**kw)


def test_second_order_in_time():
    g = Grid1D(12.0, 200, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    u0 = compatible_field(p, g, 1.0, 0.0)
    ref = evolve(p, u0, EvolveConfig(dt=1e-3, t_end=1.0)).boundary_at(1.0)
    e1 = abs(evolve(p, u0, EvolveConfig(dt=4e-2, t_end=1.0)).boundary_at(1.0) - ref)
    e2 = abs(evolve(p, u0, EvolveConfig(dt=2e-2, t_end=1.0)).boundary_at(1.0) - ref)
    assert e2 < e1 / 3.0


def test_weighted_equation_residual():
    """``u~ = e^{-cx/2} u`` satisfies ``u~_t = u~_xx - (c^2/4) u~`` in the interior."""
    c = 1.0
    g = Grid1D(10.0, 1001)
    p = Params(c, FluxModel.cosine(0.5))
    tr = evolve(p, compatible_field(p, g, 1.0, 0.0), EvolveConfig(dt=1e-3, t_end=0.5, snapshot_every=1))
    i = len(tr.times) // 2
    w = [to_weighted(tr.field(j), c).values for j in (i - 1, i, i + 1)]
    h = g.nodes[1]
    dt = tr.times[i + 1] - tr.times[i]
    ut = (w[2] - w[0]) / (2 * dt)
    uxx = (w[1][2:] - 2 * w[1][1:-1] + w[1][:-2]) / h**2
    res = ut[1:-1] - uxx + 0.25 * c * c * w[1][1:-1]
    inner = slice(10, 500)
    assert np.max(np.abs(res[inner])) < 1e-3 * np.max(np.abs(ut[1:-1][inner]))


# ---------------------------------------------------------------------------
# Volterra reference solver
# ---------------------------------------------------------------------------


def test_volterra_constant_flux_closed_form():
    g = Grid1D(40.0, 64)
    tr = evolve_volterra(Params(0.0, FluxModel.constant(1.0)), Field(g, np.zeros(g.n)), math.pi, dt=1e-3)
    assert abs(tr.boundary_at(math.pi) + 2.0) <= 1e-6


def test_volterra_trivial_orbit():
    g = Grid1D(12.0, 64)
    tr = evolve_volterra(Params(1.0, FluxModel.cosine(0.0)), affine_field(g), 1.0, dt=1e-3)
    assert np.max(np.abs(tr.trace[:, 1] + tr.trace[:, 0])) <= 1e-6


def test_volterra_cross_check_incompatible_data():
    p = Params(1.0, FluxModel.cosine(0.5))
    g = Grid1D(12.0, 800, "tanh", 3.0)
    u0 = affine_field(g)
    a = evolve(p, u0, EvolveConfig(dt=1e-3, t_end=1.0, dt_start=1e-8))
    b = evolve_volterra(p, u0, 1.0, dt=5e-4)
    assert np.max(np.abs(a.boundary_at(b.trace[:, 0]) - b.trace[:, 1])) <= 1e-4


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def test_zero_count_simple():
    x = np.linspace(0, 2, 101)
    z = zero_count(x - 1.0)
    assert z.count == 1 and z.simple and not z.degenerate


def test_zero_count_degenerate():
    z = zero_count(np.zeros(50))
    assert z.degenerate and z.count is None


def test_zero_count_touching_flagged():
    x = np.linspace(-1, 1, 201)
    z = zero_count(x**2)
    assert z.count == 0 and not z.simple


def _run(p, g, values, k, b, t_end=5.0, dt=1e-2):
    return evolve(p, Field(g, values, k, b), EvolveConfig(dt=dt, t_end=t_end, snapshot_every=5))


def test_comparison_identical_data():
    g = Grid1D(12.0, 128, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    a = _run(p, g, g.nodes.copy(), 1.0, 0.0, 2.0)
    rep = check_comparison(a, a)
    assert rep.holds and rep.min_gap == 0.0


def test_gauge_copy_gap_is_two_pi():
    g = Grid1D(12.0, 200, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    a = _run(p, g, g.nodes.copy(), 1.0, 0.0)
    b = _run(p, g, g.nodes + 2 * math.pi, 1.0, 2 * math.pi)
    assert check_comparison(a, b).holds
    assert np.max(np.abs(b.values - a.values - 2 * math.pi)) <= 1e-8


def test_ramp_below_zero_state_stays_below(hetero_pair):
    y1, y2 = hetero_pair.y1, hetero_pair.y2
    p = Params(1.0, FluxModel.cosine(1.5))
    g = Grid1D(60.0, 400, "tanh", 2.0)
    y0 = y1 + 0.5
    ramp = np.maximum(y0 + float(p.flux(y0)) * g.nodes, y1)
    lo = _run(p, g, ramp, 0.0, y1, 50.0)
    hi = _run(p, g, np.full(g.n, y2), 0.0, y2, 50.0)
    assert check_comparison(lo, hi).holds


def test_zero_number_perturbed_pair():
    g = Grid1D(12.0, 200, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    x = g.nodes
    a = _run(p, g, x.copy(), 1.0, 0.0, 10.0)
    b = _run(p, g, x + 0.3 * np.sin(3 * x) * np.exp(-x / 2), 1.0, 0.0, 10.0)
    hist = zero_history(b, a)
    assert hist[0].count >= 2
    assert is_nonincreasing(hist)


def test_monotone_data_preserved():
    g = Grid1D(12.0, 200, "tanh", 2.0)
    p = Params(1.0, FluxModel.cosine(0.5))
    x = g.nodes
    u0 = 1.5 * x + 0.5 * (1 - np.exp(-x))  # u0' >= 0 and u0'(0) = 2 >= g(0) = 1.5
    tr = _run(p, g, u0, 1.5, 0.5, 10.0)
    assert np.all(np.diff(tr.values, axis=1) >= -1e-12)


# ---------------------------------------------------------------------------
# properties (small hypothesis versions; the acceptance suite runs the full counts)
# ---------------------------------------------------------------------------


@SLOW
@given(theta=st.floats(-0.9, 0.9), c=st.sampled_from([0.0, 0.5, 1.0, 2.0]), b=st.floats(-3, 3))
def test_gauge_equivariance(theta, c, b):
    g = Grid1D(default_length(c, 2.0), 128, "tanh", 2.0)
    p = Params(c, FluxModel.cosine(theta))
    k = 1.0 if c > 0 else 0.0
    x = g.nodes
    base = b + k * x + 0.3 * np.sin(x) * np.exp(-x / 3)
    a = _run(p, g, base, k, b, 2.0)
    s = _run(p, g, base + 2 * math.pi, k, b + 2 * math.pi, 2.0)
    assert np.max(np.abs(s.values - a.values - 2 * math.pi)) <= 1e-8


@SLOW
@given(theta=st.floats(-0.9, 0.9), c=st.sampled_from([0.0, 1.0]), amp=st.floats(0.0, 1.0), lift=st.floats(0.0, 0.5))
def test_comparison_property(theta, c, amp, lift):
    g = Grid1D(default_length(c, 3.0), 128, "tanh", 2.0)
    p = Params(c, FluxModel.cosine(theta))
    k = 1.0 if c > 0 else 0.0
    x = g.nodes
    lo = k * x + 0.5 * np.sin(2 * x) * np.exp(-x / 3)
    hi = lo + amp * np.exp(-((x - 2) ** 2)) + lift
    assert check_comparison(_run(p, g, lo, k, 0.0, 3.0), _run(p, g, hi, k, lift, 3.0)).holds


@SLOW
@given(theta=st.floats(-0.9, 0.9), c=st.sampled_from([0.5, 1.0, 2.0]), b=st.floats(-1, 1))
def test_volterra_agreement_property(theta, c, b):
    p = Params(c, FluxModel.cosine(theta))
    g = Grid1D(default_length(c, 1.0), 400, "tanh", 2.0)
    u0 = compatible_field(p, g, 1.0, b)
    a = evolve(p, u0, EvolveConfig(dt=1e-3, t_end=1.0))
    v = evolve_volterra(p, u0, 1.0, dt=1e-3)
    assert np.max(np.abs(a.boundary_at(v.trace[:, 0]) - v.trace[:, 1])) <= 1e-4
