"""Shared fixtures: expensive runs are computed once per session."""

from __future__ import annotations

import time

import numpy as np
import pytest

from fluxgauge import Field, FluxModel, Grid1D, Params

# acceptance outcomes collected by tests/test_acceptance.py, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
# wall time of the expensive session fixtures, for runtime limits
FIXTURE_SECONDS: dict[str, float] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def branch_c1():
    """Cosine branch at ``c = 1`` for ``theta = 0, 0.1, ..., 0.9``."""
    from fluxgauge.orbits import continue_branch

    t0 = time.perf_counter()
    pts = continue_branch(1.0, np.round(np.arange(10) / 10, 10))
    FIXTURE_SECONDS["branch_c1"] = time.perf_counter() - t0
    return pts


@pytest.fixture(scope="session")
def orbit_half(branch_c1):
    """The refined orbit at ``theta = 0.5``, ``c = 1``."""
    return next(p.orbit for p in branch_c1 if abs(p.theta - 0.5) < 1e-12)


@pytest.fixture(scope="session")
def hetero_pair():
    from fluxgauge.connections import find_zero_pairs

    # the pair (2.30052, 3.98266), g < 0 between
    return next(p for p in find_zero_pairs(FluxModel.cosine(1.5)) if p.y1 > 0)


@pytest.fixture(scope="session")
def hetero_c1(hetero_pair):
    """Connections at ``theta = 1.5``, ``c = 1`` from ramps ``n = 10`` and ``n = 100``."""
    from fluxgauge.connections import compute_heteroclinic

    p = Params(1.0, FluxModel.cosine(1.5))
    return {n: compute_heteroclinic(hetero_pair, p, n_ramp=n) for n in (10, 100)}


@pytest.fixture(scope="session")
def homoclinic_c1():
    from fluxgauge.connections import homoclinic

    return homoclinic(1.0)


@pytest.fixture(scope="session")
def snic_c1(homoclinic_c1):
    """SNIC scan at ``c = 1`` on ``theta = 0.9, 0.99, 0.999``."""
    from fluxgauge.connections import snic_scan

    t0 = time.perf_counter()
    rep = snic_scan(1.0, [0.9, 0.99, 0.999], hom=homoclinic_c1)
    FIXTURE_SECONDS["snic_c1"] = time.perf_counter() - t0
    return rep


LADDER_FLUX = FluxModel.cosine(1.0).shifted(offset=np.pi, scale=-1.0)  # cos u - 1: g(0) = g'(0) = 0, g <= 0


@pytest.fixture(scope="session")
def stationary_profile():
    from fluxgauge.selfsim import similarity_stationary_profile

    return similarity_stationary_profile()


@pytest.fixture(scope="session")
def similarity_spectrum_report():
    from fluxgauge.selfsim import similarity_spectrum

    return similarity_spectrum()


def affine_field(grid: Grid1D, k: float = 1.0, b: float = 0.0) -> Field:
    return Field(grid, b + k * grid.nodes, k, b)
