"""Zero pairs, constant-state spectra, heteroclinic connections, super-solutions and SNIC."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from fluxgauge import FluxModel, Grid1D, InputError, Params
from fluxgauge.connections import (
    a0_spectrum,
    compute_heteroclinic,
    find_zero_pairs,
    ladder_slope,
    supersol_comparison,
    supersol_constants,
    supersol_ladder,
    supersol_trace_closed,
    supersol_trace_quadrature,
    translate_distance,
)

from .conftest import LADDER_FLUX

# ---------------------------------------------------------------------------
# zero pairs
# ---------------------------------------------------------------------------


def test_zero_pairs_theta_one_degenerate():
    (p,) = find_zero_pairs(FluxModel.cosine(1.0))
    assert p.degenerate
    assert abs(p.y1 + math.pi) < 1e-9 and abs(p.y2 - math.pi) < 1e-9


def test_zero_pairs_theta_three_halves():
    pairs = find_zero_pairs(FluxModel.cosine(1.5))
    z = math.acos(-1 / 1.5)  # independent oracle
    inner = next(p for p in pairs if p.y1 > 0)
    assert inner.y1 == pytest.approx(z, abs=1e-12)
    assert inner.y2 == pytest.approx(2 * math.pi - z, abs=1e-12)
    assert (inner.y1, inner.y2) == pytest.approx((2.30052, 3.98266), abs=1e-5)
    assert inner.sign_between == "negative"
    assert inner.start == inner.y1 and inner.end == inner.y2


@pytest.mark.parametrize("theta", [1.5, -1.5, 2.0, 1.1])
def test_zero_pairs_are_roots_without_interior_zero(theta):
    f = FluxModel.cosine(theta)
    for p in find_zero_pairs(f):
        assert abs(f(p.y1)) <= 1e-12 and abs(f(p.y2)) <= 1e-12
        u = np.linspace(p.y1, p.y2, 2001)[1:-1]
        v = f(u)
        assert np.all(v > 0) if p.sign_between == "positive" else np.all(v < 0)


@pytest.mark.parametrize("theta", [0.0, 0.5, -0.9])
def test_zero_pairs_empty_when_g_positive(theta):
    assert find_zero_pairs(FluxModel.cosine(theta)) == []


def test_positive_pair_runs_downward():
    p = next(q for q in find_zero_pairs(FluxModel.cosine(1.5)) if q.sign_between == "positive")
    assert p.start == p.y2 and p.end == p.y1


# ---------------------------------------------------------------------------
# spectrum of the linearization at a constant state
# ---------------------------------------------------------------------------


def test_a0_point_eigenvalue():
    s = a0_spectrum(2.0, -1.0)
    assert s.point_eigenvalue == 3.0 and s.essential_edge == -1.0
    assert s.discrete_top[0] == pytest.approx(3.0, abs=1e-3)


def test_a0_marginal_case():
    s = a0_spectrum(2.0, 2.0)
    assert s.formal_value == 0.0 and s.formal_value >= s.essential_edge
    assert abs(s.eigenfunction_rate) == pytest.approx(math.sqrt(1.0 + s.formal_value))
    # exp(-lambda x) with lambda = c/2 - g'(0) = -1 grows: no L2 eigenfunction
    assert s.point_eigenvalue is None
    assert s.discrete_top[0] <= s.essential_edge + 1e-2


def test_a0_no_gap_at_c0():
    s = a0_spectrum(0.0, -1.5)
    assert s.essential_edge == 0.0
    assert s.point_eigenvalue == pytest.approx(2.25)
    assert s.discrete_top[0] == pytest.approx(2.25, abs=1e-3)


@pytest.mark.parametrize("c, gp", [(1.0, -1.0), (0.5, -0.3), (3.0, 0.5)])
def test_a0_discrete_agrees(c, gp):
    s = a0_spectrum(c, gp)
    assert s.discrete_top[0] == pytest.approx(gp * gp - gp * c, abs=1e-3)


def test_a0_rejects_negative_c():
    with pytest.raises(InputError):
        a0_spectrum(-1.0, 0.0)


# ---------------------------------------------------------------------------
# heteroclinic connections
# ---------------------------------------------------------------------------


def test_heteroclinic_confined_and_monotone(hetero_c1, hetero_pair):
    for rec in hetero_c1.values():
        v = rec.trajectory.values
        assert rec.flags["confined"] and rec.flags["trace_strictly_inside"]
        assert np.all(v > hetero_pair.y1 - 1e-10) and np.all(v < hetero_pair.y2 + 1e-10)
        assert rec.flags["monotone_in_t"]


def test_heteroclinic_recentred(hetero_c1, hetero_pair):
    rec = hetero_c1[100]
    mid = 0.5 * (hetero_pair.y1 + hetero_pair.y2)
    t, w = rec.trajectory.trace[:, 0], rec.trajectory.trace[:, 1]
    assert np.interp(0.0, t, w) == pytest.approx(mid, abs=1e-3)


def test_heteroclinic_backward_rate_approaches_linear_rate(hetero_c1):
    pred = hetero_c1[100].rates["backward_predicted"]
    assert pred == pytest.approx(1.118033988749895**2 + 1.118033988749895, rel=1e-9)
    r10 = hetero_c1[10].rates["backward"]["exp_rate"]
    r100 = hetero_c1[100].rates["backward"]["exp_rate"]
    assert abs(r100 - pred) < abs(r10 - pred)
    assert r100 == pytest.approx(pred, rel=0.15)


def test_backward_uniform_forward_local(hetero_c1, hetero_pair):
    rec = hetero_c1[100]
    v = rec.trajectory.values
    # backward: the whole-domain distance to the start state shrinks to the ramp height
    sup_back = np.max(np.abs(v - hetero_pair.start), axis=1)
    assert sup_back[0] <= 1.0 / 100 + 1e-12
    assert np.all(np.diff(sup_back) >= -1e-9)
    # forward: converged on [0, 5], not on the whole domain
    fw = rec.rates["forward"]
    assert fw["sup_window"] < 1e-2
    assert fw["sup_domain"] > 0.5 * hetero_pair.span


def test_heteroclinic_json(hetero_c1):
    d = json.loads(hetero_c1[10].to_json())
    assert d["backward_limit"] == d["pair"]["y1"]
    assert set(d) >= {"pair", "params", "t_half", "rates"}


def test_translate_distance_to_self_is_zero(hetero_c1):
    assert translate_distance(hetero_c1[10], hetero_c1[10])["distance"] == 0.0


def test_translate_distance_shrinks_with_ramp_height(hetero_c1, hetero_pair):
    rec1000 = compute_heteroclinic(hetero_pair, hetero_c1[10].params, n_ramp=1000)
    d1 = translate_distance(hetero_c1[10], hetero_c1[100])["distance"]
    d2 = translate_distance(hetero_c1[100], rec1000)["distance"]
    assert d2 < 0.2 * d1


def test_translate_distance_ramps_10_100(hetero_c1):
    assert translate_distance(hetero_c1[10], hetero_c1[100])["distance"] <= 1e-3


def test_translate_distance_requires_same_pair(hetero_c1):
    other = next(p for p in find_zero_pairs(FluxModel.cosine(1.5)) if p.y1 < 0)
    rec = compute_heteroclinic(other, hetero_c1[10].params, n_ramp=10)
    with pytest.raises(ValueError):
        translate_distance(hetero_c1[10], rec)


def test_heteroclinic_c0(hetero_pair):
    rec = compute_heteroclinic(hetero_pair, Params(0.0, FluxModel.cosine(1.5)), n_ramp=10)
    assert rec.flags["reached"] and rec.flags["confined"] and rec.flags["monotone_in_t"]
    fw = rec.rates["forward"]
    assert fw["sup_window"] < fw["sup_domain"]


def test_heteroclinic_reports_no_traversal(hetero_pair):
    with pytest.raises(RuntimeError, match="no traversal"):
        compute_heteroclinic(hetero_pair, Params(1.0, FluxModel.cosine(1.5)), n_ramp=10, t_max=1.0)


def test_homoclinic(homoclinic_c1):
    rec = homoclinic_c1
    w = rec.trajectory.trace[:, 1]
    assert rec.flags["degenerate_pair"] and rec.flags["confined"] and rec.flags["monotone_in_t"]
    assert w[0] > math.pi - 0.02 and w[-1] < -math.pi + 2e-2
    v = rec.trajectory.values
    assert np.max(np.abs(v[0] - math.pi)) <= 1.0 / 100 + 1e-12
    assert rec.rates["forward"]["sup_window"] < 1e-2


# ---------------------------------------------------------------------------
# super-solution ladder
# ---------------------------------------------------------------------------

LADDER_PARAMS = Params(1.0, LADDER_FLUX)


def test_supersol_constants():
    sc = supersol_constants(LADDER_PARAMS, 0.0)
    assert sc.eps == 0.05
    assert sc.lam == pytest.approx(-0.25 + 4 * 0.55**2)
    assert sc.gamma == pytest.approx(math.sqrt(0.25 + sc.lam))
    # 1 - cos y <= 0.05 y up to y ~ 0.1
    assert 0.1 < sc.delta < 0.1002


@pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 4.0])
def test_trace_quadrature_matches_gamma_variant(t):
    sc = supersol_constants(LADDER_PARAMS, 0.0)
    assert supersol_trace_quadrature(t, 10, sc) == pytest.approx(float(supersol_trace_closed(t, 10, sc, "gamma")), rel=1e-10)


def test_trace_gamma2_variant_differs():
    sc = supersol_constants(LADDER_PARAMS, 0.0)
    q = supersol_trace_quadrature(0.3, 10, sc)
    assert abs(float(supersol_trace_closed(0.3, 10, sc, "gamma2")) - q) > 1e-4 * q


def test_ladder_bound_and_monotone():
    _, rungs = supersol_ladder(LADDER_PARAMS, 0.0, [10, 100, 1000])
    assert all(r.holds and r.T_k > math.log(r.k - 1) / 0.96 for r in rungs)
    T = [r.T_k for r in rungs]
    assert T[0] < T[1] < T[2]


def test_ladder_example_k100():
    _, (r,) = supersol_ladder(LADDER_PARAMS, 0.0, [100])
    assert r.T_k > math.log(99) / 0.96


def test_ladder_slope_trace_asymptotics():
    # e^{lambda T} / k^2 ~ 1 / k gives T_k ~ log(k) / lambda
    sc, rungs = supersol_ladder(LADDER_PARAMS, 0.0, [10, 100, 1000, 10000])
    assert ladder_slope(rungs) == pytest.approx(1.0 / sc.lam, rel=0.05)


def test_ladder_slope_printed_scaling():
    sc, rungs = supersol_ladder(LADDER_PARAMS, 0.0, [10, 100, 1000])
    assert ladder_slope(rungs) == pytest.approx(2.0 / sc.lam, rel=0.3)


def test_ladder_rejects_small_k():
    with pytest.raises(InputError, match="delta"):
        supersol_ladder(LADDER_PARAMS, 0.0, [5])


@pytest.mark.parametrize("k", [10, 30])
def test_ramp_stays_below_supersolution(k):
    cmp = supersol_comparison(LADDER_PARAMS, 0.0, k)
    assert cmp.report.holds
    assert cmp.boundary_inequality
    assert cmp.upper.trace[-1, 1] >= 1.0 / k - 1e-12


def test_pde_supersolution_exact_at_c0():
    """At ``c = 0`` the closed-form trace is the exact boundary value of the super-solution."""
    p = Params(0.0, LADDER_FLUX)
    _, (r,) = supersol_ladder(p, -1.0, [10])
    cmp = supersol_comparison(p, -1.0, 10, grid=Grid1D(60.0, 1200, "tanh", 2.0), dt=2e-3)
    assert cmp.T_pde == pytest.approx(r.T_k, rel=1e-2)


# ---------------------------------------------------------------------------
# SNIC
# ---------------------------------------------------------------------------


def test_snic_periods(snic_c1):
    T = [r["T"] for r in snic_c1.rows]
    assert snic_c1.monotone and T[0] < T[1] < T[2]
    assert snic_c1.ratio > 5
    assert T[0] == pytest.approx(16.016, abs=5e-3)  # agrees with the MOL branch


def test_snic_window_distances(snic_c1):
    d = [r["dist_homoclinic"] for r in snic_c1.rows]
    assert snic_c1.distances_decreasing and d[-1] < 1e-2


def test_snic_pi_phase_converges(snic_c1):
    d = [r["dist_pi"] for r in snic_c1.rows]
    assert snic_c1.pi_distances_decreasing and d[-1] < 2e-2


def test_snic_csv(snic_c1):
    lines = snic_c1.to_csv().splitlines()
    assert lines[0] == "theta,T" and len(lines) == 4
