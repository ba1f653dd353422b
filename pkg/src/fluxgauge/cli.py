"""Batch command-line front end.

A run reads a versioned JSON configuration, validates it completely before any
computation, dispatches one subcommand, writes CSV/JSON artifacts and a
``manifest.json`` listing every hard and soft invariant with its status.

Exit codes: ``0`` success, ``1`` an invariant failed (or the computation
reported a structural failure such as "no periodic orbit"), ``2`` the
configuration is invalid (nothing is written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import Field, FluxModel, Grid1D, InputError, Params, default_length

SCHEMA_VERSION = 1
COMMANDS = ("evolve", "orbit", "branch", "snic", "heteroclinic", "drift", "similarity", "spectrum", "sweep")
TOP_KEYS = {"schema_version", "command", "params", "numerics", "grid", "initial", "options", "output_dir"}
NUMERICS_KEYS = {"dt", "t_end", "scheme", "far_bc", "far_value", "snapshot_every", "dt_start", "growth"}
GRID_KEYS = {"L", "n", "stretching", "beta"}
INITIAL_KEYS = {"kind", "strain", "intercept", "value"}

# per-command options and their defaults; any other key is rejected
OPTIONS: dict[str, dict] = {
    "evolve": {},
    "orbit": {"refine": True, "floquet": False, "y_phase": 0.0, "steps": 1000},
    "branch": {"thetas": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5], "floquet": False, "steps": 1000},
    "snic": {"thetas": [0.9, 0.99, 0.999]},
    "heteroclinic": {"pair": 0, "n_ramp": [10, 100], "t_after": 10.0, "dt": 1e-2, "distance_tol": 1e-3},
    "drift": {"u0": 0.0, "t_end": 100.0, "dt": 1e-2},
    "similarity": {"xi_max": 12.0, "n": 1201, "tau_end": 0.0, "scale": 1.0, "eta": 0.0, "flux_correction": False, "dtau": 1e-3},
    "spectrum": {"n_ladder": [400, 800, 1600], "xi_max": 16.0, "k": 3, "boundary_coeff": None},
    "sweep": {"kind": "orbit-fourier", "theta": [0.0, 0.3, 0.6], "c": [1.0, 2.0, 4.0]},
}
SWEEP_KINDS = ("orbit-fourier", "orbit-mol")
DEFAULT_PARAMS = {"c": 1.0, "flux": {"kind": "cosine", "theta": 0.5}}
SWEEP_HEADER = ["theta", "c", "ok", "T", "omega", "strain", "residual", "method", "error"]


class ConfigError(InputError):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class Invariant:
    name: str
    hard: bool
    passed: bool
    value: object = None

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": "hard" if self.hard else "soft", "status": "pass" if self.passed else "fail", "value": self.value}


@dataclass
class Outcome:
    invariants: list[Invariant] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    numerics: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""

    def check(self, name: str, passed: bool, value=None, hard: bool = True):
        self.invariants.append(Invariant(name, hard, bool(passed), _plain(value)))


@dataclass
class ExperimentConfig:
    """Validated configuration."""

    command: str
    params: Params
    numerics: dict
    grid: dict | None
    initial: dict
    options: dict
    output_dir: Path
    raw: dict

    def evolve_config(self, **defaults):
        from .evolve import EvolveConfig

        return EvolveConfig(**{**defaults, **self.numerics})


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number_list(v, where: str) -> list[float]:
    if not isinstance(v, list) or not v or not all(isinstance(a, (int, float)) and math.isfinite(a) for a in v):
        raise ConfigError(f"{where} must be a non-empty list of finite numbers")
    return [float(a) for a in v]


def validate_config(raw: dict, command: str | None = None, out: str | None = None) -> ExperimentConfig:
    """Schema check and construction of all typed objects.

    Raises
    ------
    ConfigError
        Any unknown key, wrong version, unknown command or invalid value.
    """
    _reject_unknown(raw, TOP_KEYS, "config")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    cmd = raw.get("command", command)
    if cmd is None:
        raise ConfigError("no command given")
    if command is not None and cmd != command:
        raise ConfigError(f"config command {cmd!r} does not match subcommand {command!r}")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    try:
        praw = raw.get("params", DEFAULT_PARAMS)
        _reject_unknown(praw, {"c", "flux"}, "params")
        params = Params.from_dict(praw)
        numerics = dict(raw.get("numerics", {}))
        _reject_unknown(numerics, NUMERICS_KEYS, "numerics")
        from .evolve import EvolveConfig

        EvolveConfig(**numerics)  # value validation
        grid = raw.get("grid")
        if grid is not None:
            _reject_unknown(grid, GRID_KEYS, "grid")
            Grid1D(**grid)
        initial = dict(raw.get("initial", {"kind": "affine", "strain": 1.0, "intercept": 0.0}))
        _reject_unknown(initial, INITIAL_KEYS, "initial")
        if initial.get("kind") not in ("affine", "constant"):
            raise ConfigError("initial.kind must be 'affine' or 'constant'")
        opts_raw = raw.get("options", {})
        _reject_unknown(opts_raw, set(OPTIONS[cmd]), f"options for {cmd}")
        options = {**OPTIONS[cmd], **opts_raw}
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    _validate_options(cmd, params, options)
    out_dir = Path(out if out is not None else raw.get("output_dir", "fluxgauge-out"))
    return ExperimentConfig(cmd, params, numerics, grid, initial, options, out_dir, raw)


def _validate_options(cmd: str, params: Params, o: dict):
    if cmd in ("orbit", "branch", "snic") and not params.c > 0:
        raise ConfigError(f"{cmd} needs c > 0")
    if cmd == "drift" and params.c != 0:
        raise ConfigError("drift needs c = 0")
    if cmd == "branch":
        th = _number_list(o["thetas"], "options.thetas")
        if th[0] != 0.0 or any(b <= a for a, b in zip(th, th[1:])) or th[-1] >= 1:
            raise ConfigError("options.thetas must start at 0 and increase below 1")
    if cmd == "snic":
        th = _number_list(o["thetas"], "options.thetas")
        if any(b <= a for a, b in zip(th, th[1:])) or not (0 <= th[0] and th[-1] < 1):
            raise ConfigError("options.thetas must increase inside [0, 1)")
    if cmd == "heteroclinic":
        n = _number_list(o["n_ramp"], "options.n_ramp")
        if any(v < 1 for v in n):
            raise ConfigError("options.n_ramp entries must be >= 1")
    if cmd == "drift":
        if not (o["t_end"] > 0 and o["dt"] > 0):
            raise ConfigError("drift needs positive t_end and dt")
    if cmd == "similarity" and not (o["xi_max"] > 0 and o["n"] >= 8 and o["tau_end"] >= 0 and o["dtau"] > 0):
        raise ConfigError("similarity needs xi_max > 0, n >= 8, tau_end >= 0, dtau > 0")
    if cmd == "spectrum":
        n = _number_list(o["n_ladder"], "options.n_ladder")
        if len(n) < 3 or any(b <= a for a, b in zip(n, n[1:])):
            raise ConfigError("options.n_ladder needs at least three increasing sizes")
    if cmd == "sweep":
        if o["kind"] not in SWEEP_KINDS:
            raise ConfigError(f"options.kind must be one of {SWEEP_KINDS}")
        th = _number_list(o["theta"], "options.theta")
        cs = _number_list(o["c"], "options.c")
        if any(c <= 0 for c in cs):
            raise ConfigError("sweep needs c > 0")


def load_config(path: str | None, command: str | None, out: str | None) -> ExperimentConfig:
    if path is None:
        raw = {"schema_version": SCHEMA_VERSION}
    else:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    return validate_config(raw, command, out)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _plain(v):
    """JSON-safe copy (numpy scalars/arrays, tuples, non-finite floats as strings)."""
    if isinstance(v, dict):
        return {str(k): _plain(a) for k, a in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(a) for a in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _dump(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _write(out: Outcome, cfg: ExperimentConfig, name: str, text: str):
    (cfg.output_dir / name).write_text(text)
    out.artifacts.append(name)


def _grid(cfg: ExperimentConfig, t_end: float | None = None, n: int = 400, beta: float = 2.0) -> Grid1D:
    if cfg.grid is not None:
        return Grid1D(**cfg.grid)
    return Grid1D(default_length(cfg.params.c, t_end), n, "tanh", beta)


def _initial(cfg: ExperimentConfig, grid: Grid1D) -> Field:
    ini = cfg.initial
    if ini["kind"] == "constant":
        v = float(ini.get("value", 0.0))
        return Field(grid, np.full(grid.n, v), 0.0, v)
    k, b = float(ini.get("strain", 1.0)), float(ini.get("intercept", 0.0))
    return Field(grid, b + k * grid.nodes, k, b)


def _cosine_theta(params: Params) -> float | None:
    return params.flux.theta if params.flux.kind == "cosine" else None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_evolve(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .evolve import evolve

    ec = cfg.evolve_config()
    grid = _grid(cfg, ec.t_end)
    traj = evolve(cfg.params, _initial(cfg, grid), ec)
    _write(out, cfg, "trajectory.csv", traj.to_csv())
    _write(out, cfg, "trace.csv", traj.trace_csv())
    out.numerics = {"grid": {"L": grid.L, "n": grid.n, "stretching": grid.stretching, "beta": grid.beta}, "config": asdict(ec), "meta": traj.meta}
    out.check("finite", bool(np.all(np.isfinite(traj.values))))
    out.results = {"t_final": float(traj.times[-1]), "u0_final": float(traj.values[-1][0])}


def cmd_orbit(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .orbits import GRAD_TOL, ORBIT_TOL, NoPeriodicOrbit, floquet_leading, find_orbit_attract, orbit_grid, refine_orbit_newton

    o = cfg.options
    ec = cfg.evolve_config(dt=1e-2, t_end=500.0, scheme="implicit-newton", far_bc="outflow", snapshot_every=0)
    grid = Grid1D(**cfg.grid) if cfg.grid is not None else orbit_grid(cfg.params.c)
    try:
        orb = find_orbit_attract(cfg.params, _initial(cfg, grid), ec, y_phase=float(o["y_phase"]))
    except NoPeriodicOrbit as exc:
        out.status = "no-periodic-orbit"
        out.message = f"{exc}; a zero of g (stationary state) can block the gauge descent"
        out.results = exc.report
        out.check("periodic_orbit_found", False, exc.report)
        _write(out, cfg, "orbit_report.json", _dump({"status": out.status, "message": out.message, "report": exc.report}))
        return
    if o["refine"]:
        orb.numerics = type(orb.numerics)(steps=int(o["steps"]), scheme=orb.numerics.scheme, far_bc=orb.numerics.far_bc)
        orb = refine_orbit_newton(orb)
    if o["floquet"]:
        res = floquet_leading(orb)
        orb.floquet = res.multipliers
        orb.meta["floquet_alignment"] = res.alignment
        out.check("floquet_leading_is_one", abs(res.multipliers[0] - 1) < 1e-6, abs(res.multipliers[0] - 1), hard=False)
        out.check("floquet_second_inside_unit_circle", abs(res.multipliers[1]) < 1, abs(res.multipliers[1]))
        out.check("floquet_alignment", res.alignment < 1e-4, res.alignment, hard=False)
    _write(out, cfg, "orbit.json", orb.to_json())
    out.numerics = {"grid": {"L": grid.L, "n": grid.n}, "orbit": orb.numerics.to_dict(), "attract": asdict(ec)}
    out.results = {"T": orb.T, "omega": orb.omega, "strain": orb.strain, "residual": orb.residual}
    out.check("periodic_orbit_found", True)
    out.check("residual", orb.residual <= 10 * ORBIT_TOL if o["refine"] else True, orb.residual)
    out.check("u_t_negative", orb.flags["dt_negative"])
    out.check("u_x_positive", orb.flags["dx_positive"])
    if "gradient_bounds" in orb.flags:
        out.check("gradient_bounds", orb.flags["gradient_bounds"], [orb.flags["ux_min"], orb.flags["ux_max"], GRAD_TOL])
        out.check("period_bounds_sharp", orb.flags["period_bounds_sharp"], orb.T)
        out.check("period_bounds_printed", orb.flags["period_bounds_printed"], orb.T, hard=False)


def cmd_branch(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .orbits import branch_csv, continue_branch

    o = cfg.options
    grid = Grid1D(**cfg.grid) if cfg.grid is not None else None
    pts = continue_branch(cfg.params.c, o["thetas"], grid=grid, steps=int(o["steps"]), floquet=bool(o["floquet"]))
    _write(out, cfg, "branch.csv", branch_csv(pts))
    out.results = {"thetas": [p.theta for p in pts], "T": [p.orbit.T for p in pts]}
    out.check("branch_complete", len(pts) == len(o["thetas"]), f"{len(pts)}/{len(o['thetas'])}")
    for p in pts:
        f = p.orbit.flags
        out.check(f"gradient_bounds[theta={p.theta}]", f.get("gradient_bounds", True), [f["ux_min"], f["ux_max"]])
        out.check(f"period_bounds_sharp[theta={p.theta}]", f.get("period_bounds_sharp", True), p.orbit.T)
        out.check(f"period_bounds_printed[theta={p.theta}]", f.get("period_bounds_printed", True), p.orbit.T, hard=False)
    T = [p.orbit.T for p in pts]
    out.check("period_increasing_in_theta", all(b > a for a, b in zip(T, T[1:])), T, hard=False)


def cmd_snic(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .connections import snic_scan

    rep = snic_scan(cfg.params.c, cfg.options["thetas"])
    _write(out, cfg, "snic.csv", rep.to_csv())
    _write(out, cfg, "snic.json", _dump(rep.to_dict()))
    out.results = {"rows": rep.rows, "ratio": rep.ratio}
    out.check("period_monotone", rep.monotone, [r["T"] for r in rep.rows])
    out.check("homoclinic_distance_decreasing", rep.distances_decreasing, [r.get("dist_homoclinic") for r in rep.rows])
    out.check("pi_distance_decreasing", rep.pi_distances_decreasing, [r.get("dist_pi") for r in rep.rows], hard=False)
    out.check("period_ratio_above_5", rep.ratio > 5, rep.ratio, hard=False)


def cmd_heteroclinic(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .connections import compute_heteroclinic, connection_csv, find_zero_pairs, translate_distance

    o = cfg.options
    pairs = find_zero_pairs(cfg.params.flux)
    if not pairs:
        out.status = "no-zero-pair"
        out.message = "g has no zeros: no constant stationary states to connect"
        out.check("zero_pair_found", False)
        return
    idx = int(o["pair"])
    if not 0 <= idx < len(pairs):
        out.status = "no-zero-pair"
        out.message = f"pair index {idx} out of range ({len(pairs)} pairs)"
        out.check("zero_pair_found", False, len(pairs))
        return
    pair = pairs[idx]
    recs = []
    for n in o["n_ramp"]:
        rec = compute_heteroclinic(pair, cfg.params, n_ramp=int(n), dt=float(o["dt"]), t_after=float(o["t_after"]))
        recs.append(rec)
        _write(out, cfg, f"connection_n{int(n)}.csv", connection_csv(rec))
        _write(out, cfg, f"connection_n{int(n)}.json", rec.to_json())
        for flag in ("confined", "trace_strictly_inside", "monotone_in_t"):
            out.check(f"{flag}[n={int(n)}]", rec.flags[flag])
        out.check(f"reached[n={int(n)}]", rec.flags["reached"], hard=False)
    dists = []
    for a, b in zip(recs, recs[1:]):
        d = translate_distance(a, b)
        dists.append(d)
        out.check(f"translate_distance[n={a.meta.get('n_ramp')}|{b.meta.get('n_ramp')}]", d["distance"] <= o["distance_tol"], d["distance"], hard=False)
    out.results = {"pair": pair.to_dict(), "translate": dists, "rates": [r.rates for r in recs]}


def cmd_drift(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .selfsim import drift_experiment, drift_grid

    o = cfg.options
    grid = Grid1D(**cfg.grid) if cfg.grid is not None else drift_grid(float(o["t_end"]))
    u0 = Field(grid, np.full(grid.n, float(o["u0"])), 0.0, float(o["u0"]))
    rep = drift_experiment(cfg.params.flux, u0, float(o["t_end"]), dt=float(o["dt"]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "u0"])
    for t, v in rep.trace:
        w.writerow([repr(float(t)), repr(float(v))])
    _write(out, cfg, "drift_trace.csv", buf.getvalue())
    _write(out, cfg, "drift.json", _dump(rep.to_dict()))
    out.numerics = {"grid": {"L": grid.L, "n": grid.n}, "meta": rep.meta}
    out.results = rep.to_dict()
    out.check("drift_envelope", rep.envelope_holds, rep.max_violation)
    lo, hi = 2 * rep.gamma1 / math.sqrt(math.pi), 2 * rep.gamma2 / math.sqrt(math.pi)
    out.check("fitted_coefficient_in_range", lo - 1e-3 <= rep.fitted_coefficient <= hi + 1e-3, rep.fitted_coefficient, hard=False)


def cmd_similarity(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .selfsim import SQRT_PI, similarity_evolve, similarity_stationary_profile, unstable_mode, unstable_projection, vstar_state

    o = cfg.options
    prof = similarity_stationary_profile(float(o["xi_max"]), int(o["n"]))
    _write(out, cfg, "profile.csv", prof.to_csv())
    res = {"V0_shoot": prof.V0_shoot, "boundary_residual": prof.boundary_residual, "interior_residual": prof.interior_residual}
    out.check("V0_equals_inverse_sqrt_pi", abs(prof.V0_shoot - 1 / SQRT_PI) < 1e-8, prof.V0_shoot - 1 / SQRT_PI)
    out.check("profile_positive", bool(np.all(prof.V > 0)))
    out.check("profile_decreasing", bool(np.all(np.diff(prof.V) < 0)))
    if o["tau_end"] > 0:
        st = vstar_state(xi_max=float(o["xi_max"]), eta=float(o["eta"]), scale=float(o["scale"]))
        run = similarity_evolve(st, bool(o["flux_correction"]), float(o["tau_end"]), dtau=float(o["dtau"]))
        xi = st.xi_grid.nodes
        vs, phi = prof(xi), unstable_mode(prof, xi)
        proj = [unstable_projection(v, vs, phi, xi) for v in run.V]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "eta", "V0", "projection"])
        for t, e, v, p in zip(run.taus, run.eta, run.V, proj):
            w.writerow([repr(float(t)), repr(float(e)), repr(float(v[0])), repr(float(p))])
        _write(out, cfg, "similarity_run.csv", buf.getvalue())
        res.update(blew_up=run.blew_up, final_projection=proj[-1])
        eta_exact = float(o["eta"]) * np.exp(0.5 * (run.taus - run.taus[0]))
        out.check("eta_exponential", np.allclose(run.eta, eta_exact, rtol=1e-12, atol=0.0))
        if o["scale"] == 1.0 and o["eta"] == 0.0:
            out.check("vstar_stationary", float(np.max(np.abs(run.V - run.V[0]))) < 1e-8, float(np.max(np.abs(run.V - run.V[0]))))
    out.results = res


def cmd_spectrum(cfg: ExperimentConfig, out: Outcome, workers: int):
    from .selfsim import similarity_spectrum

    o = cfg.options
    rep = similarity_spectrum(tuple(int(n) for n in o["n_ladder"]), float(o["xi_max"]), int(o["k"]), o["boundary_coeff"])
    _write(out, cfg, "spectrum.json", rep.to_json())
    out.results = rep.to_dict()
    out.check("ladder_cauchy", rep.cauchy, rep.observed_order)
    if o["boundary_coeff"] is None:
        out.check("unstable_eigenvalue_one", abs(rep.extrapolated[0] - 1) < 1e-3, rep.extrapolated[0], hard=False)
        out.check("top_stable_eigenvalue", abs(rep.extrapolated[1] + 1.2316) < 5e-3, rep.extrapolated[1], hard=False)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def sweep_cell(kind: str, theta: float, c: float) -> dict:
    """One sweep cell; failures are returned as rows, never raised."""
    row = {"theta": theta, "c": c, "ok": False, "T": math.nan, "omega": math.nan, "strain": math.nan, "residual": math.nan, "method": kind, "error": ""}
    try:
        if abs(theta) >= 1:
            raise ValueError("no periodic orbit: g has zeros for |theta| >= 1")
        if kind == "orbit-fourier":
            from .fourier_orbit import continue_to_theta, solve_fourier_orbit

            if theta == 0.0 or theta < 0:
                o = solve_fourier_orbit(FluxModel.cosine(theta), c, N=256)
            else:
                o = continue_to_theta([0.0, theta], c)[-1]
            row.update(T=float(o.T), omega=float(o.omega), strain=float(o.strain), residual=float(o.residual))
        else:
            from .orbits import _mol_orbit

            o = _mol_orbit(c, theta)
            row.update(T=float(o.T), omega=float(o.omega), strain=float(o.strain), residual=float(o.residual))
        row["ok"] = True
    except Exception as exc:  # recorded per cell
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in SWEEP_HEADER])
    return buf.getvalue()


def cmd_sweep(cfg: ExperimentConfig, out: Outcome, workers: int):
    o = cfg.options
    cells = [(o["kind"], float(t), float(c)) for t in o["theta"] for c in o["c"]]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(sweep_cell, *cell) for cell in cells]
            rows = [f.result() for f in futs]  # parameter order, not completion order
    else:
        rows = [sweep_cell(*cell) for cell in cells]
    _write(out, cfg, "sweep.csv", sweep_csv(rows))
    n_ok = sum(r["ok"] for r in rows)
    out.results = {"cells": len(rows), "succeeded": n_ok, "failed": [(r["theta"], r["c"], r["error"]) for r in rows if not r["ok"]]}
    out.numerics = {"workers": workers}
    out.check("some_cell_succeeded", n_ok > 0, n_ok)
    out.check("all_cells_succeeded", n_ok == len(rows), n_ok, hard=False)
    for c in o["c"]:
        T = [r["T"] for r in rows if r["c"] == float(c) and r["ok"]]
        th = [r["theta"] for r in rows if r["c"] == float(c) and r["ok"]]
        order = np.argsort(th)
        Ts = [T[i] for i in order]
        out.check(f"T_monotone_in_theta[c={c}]", all(b > a for a, b in zip(Ts, Ts[1:])), Ts, hard=False)


DISPATCH = {
    "evolve": cmd_evolve,
    "orbit": cmd_orbit,
    "branch": cmd_branch,
    "snic": cmd_snic,
    "heteroclinic": cmd_heteroclinic,
    "drift": cmd_drift,
    "similarity": cmd_similarity,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _software() -> dict:
    import scipy

    return {"fluxgauge": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def run(config_path: str | None, command: str | None = None, out: str | None = None, workers: int | None = None, strict: bool = False) -> int:
    """Validate, dispatch and write artifacts plus ``manifest.json``; return the exit code."""
    try:
        cfg = load_config(config_path, command, out)
    except InputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    workers = workers if workers is not None else (os.cpu_count() or 1)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    outcome = Outcome()
    t0 = time.perf_counter()
    try:
        DISPATCH[cfg.command](cfg, outcome, workers)
    except InputError as exc:
        outcome.status = "input-error"
        outcome.message = str(exc)
        outcome.check("inputs_admissible", False, str(exc))
    except Exception as exc:  # computation failed; recorded, nonzero exit
        outcome.status = "computation-failed"
        outcome.message = f"{type(exc).__name__}: {exc}"
        outcome.check("computation_completed", False, outcome.message)
    wall = time.perf_counter() - t0
    if strict:
        for inv in outcome.invariants:
            inv.hard = True
    failed = [i.name for i in outcome.invariants if i.hard and not i.passed]
    if failed and outcome.status == "ok":
        outcome.status = "invariant-failure"
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "config": cfg.raw,
        "software": _software(),
        "numerics": outcome.numerics,
        "wall_time_s": wall,
        "strict": strict,
        "status": outcome.status,
        "message": outcome.message,
        "invariants": [i.to_dict() for i in outcome.invariants],
        "results": outcome.results,
        "artifacts": outcome.artifacts,
    }
    (cfg.output_dir / "manifest.json").write_text(_dump(manifest))
    print(f"{cfg.command}: {outcome.status} ({len(outcome.invariants)} invariants, {len(failed)} hard failures) -> {cfg.output_dir}")
    return 1 if (failed or outcome.status != "ok") else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fluxgauge", description="Half-line advection-diffusion with a periodic flux boundary condition.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON configuration (schema_version 1)")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--workers", type=int, default=None, help="sweep worker processes (default: CPU count)")
    p.add_argument("--strict", action="store_true", help="treat soft checks as hard")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return 2
    return run(args.config, args.command, args.out, args.workers, args.strict)


if __name__ == "__main__":
    sys.exit(main())
