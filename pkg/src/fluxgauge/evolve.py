"""Time integration of the half-line problem by the method of lines.

``evolve`` wraps :class:`~fluxgauge.stepper.Stepper` with step grading, step
rejection on boundary Newton failure, snapshot storage and a boundary trace.
``march`` is the underlying generator and is reused by the orbit and
connection solvers, which need per-step control.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import Field, Grid1D, InputError, Params, fit_farfield
from .stepper import Stepper, StepFailure

SCHEMES = {"imex-trapezoid": "cn", "implicit-newton": "trbdf2", "backward-euler": "be"}
MAX_REJECTIONS = 20


class EvolutionFailure(RuntimeError):
    """Too many rejected steps; ``report`` holds the diagnostic record."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class EvolveConfig:
    """Time-stepping controls.

    Parameters
    ----------
    dt : float
        Base step.
    t_end : float
        Final time.
    scheme : {"imex-trapezoid", "implicit-newton", "backward-euler"}
        Crank-Nicolson with a backward-Euler start, TR-BDF2, or backward Euler.
    far_bc : {"auto", "outflow", "weighted-dirichlet-zero", "neumann-strain", "dirichlet"}
        ``auto`` selects ``outflow`` for ``c > 0`` and ``neumann-strain`` otherwise.
    far_value : float
        Strain for ``neumann-strain``, value for ``dirichlet``.
    snapshot_every : int
        Store a field every this many accepted steps (0 stores only the ends).
    dt_start : float, optional
        First step of a geometric ramp up to ``dt``; resolves incompatible data.
    growth : float
        Ramp ratio.
    """

    dt: float = 1e-2
    t_end: float = 1.0
    scheme: str = "imex-trapezoid"
    far_bc: str = "auto"
    far_value: float = 0.0
    snapshot_every: int = 10
    dt_start: float | None = None
    growth: float = 1.1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InputError("dt must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise InputError("t_end must be finite and non-negative")
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown scheme {self.scheme!r}")
        if self.far_bc not in ("auto", "outflow", "weighted-dirichlet-zero", "neumann-strain", "dirichlet"):
            raise InputError(f"unknown far-field condition {self.far_bc!r}")
        if self.snapshot_every < 0:
            raise InputError("snapshot_every must be >= 0")
        if self.dt_start is not None and not (0 < self.dt_start <= self.dt):
            raise InputError("dt_start must lie in (0, dt]")
        if self.growth <= 1.0:
            raise InputError("growth must exceed 1")

    def resolved_far_bc(self, c: float) -> str:
        if self.far_bc == "auto":
            return "outflow" if c > 0 else "neumann-strain"
        return self.far_bc

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_end": self.t_end,
            "scheme": self.scheme,
            "far_bc": self.far_bc,
            "far_value": self.far_value,
            "snapshot_every": self.snapshot_every,
            "dt_start": self.dt_start,
            "growth": self.growth,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EvolveConfig:
        allowed = set(cls().to_dict())
        extra = set(d) - allowed
        if extra:
            raise InputError(f"unknown numerics keys: {sorted(extra)}")
        return cls(**d)


def make_stepper(params: Params, grid: Grid1D, cfg: EvolveConfig, boundary=None) -> Stepper:
    return Stepper(
        grid,
        params.c,
        flux=params.flux,
        boundary=boundary,
        far_bc=cfg.resolved_far_bc(params.c),
        far_value=cfg.far_value,
    )


@dataclass
class Trajectory:
    """Stored snapshots and boundary trace of one run.

    Attributes
    ----------
    params : Params
    grid : Grid1D
    times : ndarray, shape (m,)
        Snapshot times, strictly increasing.
    values : ndarray, shape (m, n)
        Snapshot values.
    trace : ndarray, shape (k, 3)
        Rows ``(t, u(0,t), u_x(0,t))`` at every accepted step.
    bc_residual : float
        Largest ``|u_x(0,t) - g(u(0,t))|`` over the trace.
    """

    params: Params
    grid: Grid1D
    times: np.ndarray
    values: np.ndarray
    trace: np.ndarray
    bc_residual: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def snapshots(self) -> list[tuple[float, Field]]:
        return [(float(t), self.field(i)) for i, t in enumerate(self.times)]

    def field(self, i: int) -> Field:
        v = self.values[i]
        k, b = fit_farfield(self.grid.nodes, v)
        return Field(self.grid, v, k, b)

    @property
    def final(self) -> Field:
        return self.field(len(self.times) - 1)

    def boundary_at(self, t) -> np.ndarray:
        """Linear interpolation of ``u(0, t)`` from the trace."""
        return np.interp(t, self.trace[:, 0], self.trace[:, 1])

    def shifted_time(self, s: float) -> Trajectory:
        tr = self.trace.copy()
        tr[:, 0] -= s
        return replace(self, times=self.times - s, trace=tr)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        x = self.grid.nodes
        for t, row in zip(self.times, self.values):
            for xi, ui in zip(x, row):
                w.writerow([repr(float(t)), repr(float(xi)), repr(float(ui))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def trace_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "u0", "ux0"])
        for t, u0, ux0 in self.trace:
            w.writerow([repr(float(t)), repr(float(u0)), repr(float(ux0))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@dataclass
class StepInfo:
    t: float
    dt: float
    u: np.ndarray
    records: tuple
    scheme: str


def step_sizes(t0: float, t_end: float, dt: float, dt_start: float | None, growth: float):
    """Graded step sequence from ``dt_start`` up to ``dt``, truncated at ``t_end``."""
    t = t0
    h = dt if dt_start is None else dt_start
    while t_end - t > 1e-12 * max(1.0, abs(t_end)):
        step = min(h, dt, t_end - t)
        if t_end - (t + step) < 1e-9 * step:
            step = t_end - t
        yield step
        t += step
        h *= growth


def _safe_step(stepper: Stepper, u, t, dt, scheme, counter, depth=0):
    """One step with recursive halving on boundary Newton failure."""
    try:
        u1, rec = stepper.step(u, t, dt, scheme)
        if not np.all(np.isfinite(u1)):
            raise StepFailure("non-finite state")
        return [(t + dt, dt, u1, rec)]
    except StepFailure as exc:
        counter[0] += 1
        if counter[0] > MAX_REJECTIONS:
            raise EvolutionFailure(
                "more than 20 rejected steps",
                {"t": t, "dt": dt, "rejections": counter[0], "reason": str(exc)},
            ) from exc
        half = 0.5 * dt
        first = _safe_step(stepper, u, t, half, scheme, counter, depth + 1)
        second = _safe_step(stepper, first[-1][2], t + half, half, scheme, counter, depth + 1)
        return first + second


def march(stepper: Stepper, u0: np.ndarray, t0: float, t_end: float, cfg: EvolveConfig, startup: int = 2):
    """Yield :class:`StepInfo` after every accepted step.

    For ``imex-trapezoid`` the first ``startup`` steps are each replaced by two
    backward-Euler half steps, damping the stiff transient of incompatible data.
    """
    scheme = SCHEMES[cfg.scheme]
    u = np.asarray(u0, dtype=float).copy()
    t = t0
    counter = [0]
    for i, h in enumerate(step_sizes(t0, t_end, cfg.dt, cfg.dt_start, cfg.growth)):
        if scheme == "cn" and i < startup:
            parts = _safe_step(stepper, u, t, 0.5 * h, "be", counter)
            parts += _safe_step(stepper, parts[-1][2], t + 0.5 * h, 0.5 * h, "be", counter)
            sch = "be"
        else:
            parts = _safe_step(stepper, u, t, h, scheme, counter)
            sch = scheme
        for tn, dtn, un, rec in parts:
            yield StepInfo(tn, dtn, un, rec, sch)
        u = parts[-1][2]
        t = parts[-1][0]


def evolve(params: Params, u0: Field, cfg: EvolveConfig, boundary=None, stop=None) -> Trajectory:
    """Integrate from ``u0`` to ``cfg.t_end``.

    Parameters
    ----------
    params : Params
    u0 : Field
    cfg : EvolveConfig
    boundary : callable, optional
        ``boundary(t, u0) -> (value, derivative)`` replacing ``params.flux``.
    stop : callable, optional
        ``stop(t, u) -> bool``; integration ends after the first step where it is true.

    Returns
    -------
    Trajectory
    """
    grid = u0.grid
    st = make_stepper(params, grid, cfg, boundary)
    bnd = st.boundary
    times = [0.0]
    vals = [u0.values.copy()]
    ux0 = st.boundary_derivative(u0.values)
    trace = [(0.0, u0.values[0], ux0)]
    res = 0.0
    k = 0
    last = None
    if cfg.dt_start is None and abs(ux0 - bnd(0.0, u0.values[0])[0]) > 1e-8:
        # incompatible data: grade the first steps to resolve the sqrt(t) layer
        cfg = replace(cfg, dt_start=min(cfg.dt, 1e-8))
    for info in march(st, u0.values, 0.0, cfg.t_end, cfg):
        k += 1
        d = st.boundary_derivative(info.u)
        trace.append((info.t, info.u[0], d))
        res = max(res, abs(d - bnd(info.t, info.u[0])[0]))
        last = info
        if cfg.snapshot_every and k % cfg.snapshot_every == 0:
            times.append(info.t)
            vals.append(info.u.copy())
        if stop is not None and stop(info.t, info.u):
            break
    if last is not None and times[-1] < last.t:
        times.append(last.t)
        vals.append(last.u.copy())
    return Trajectory(
        params=params,
        grid=grid,
        times=np.array(times),
        values=np.array(vals),
        trace=np.array(trace),
        bc_residual=res,
        meta={"steps": k, "far_bc": st.far_bc, "scheme": cfg.scheme},
    )
