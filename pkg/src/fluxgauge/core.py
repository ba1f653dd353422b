"""Shared substrate: boundary flux models, grids, fields, heat kernel, mode rates."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

GAUGE = 2.0 * math.pi


class InputError(ValueError):
    """Raised for malformed or non-finite inputs."""


class DomainError(ValueError):
    """Raised when an argument is outside the domain of an operation."""


class RangeError(OverflowError):
    """Raised when a transform would overflow double precision."""


# ---------------------------------------------------------------------------
# Flux models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FluxModel:
    """Gauge-periodic boundary flux ``g`` with ``g(u + 2 pi) = g(u)``.

    Three kinds are supported:

    ``cosine``
        ``g(u) = 1 + theta * cos(u)``.
    ``table``
        periodic cubic interpolant through equispaced samples on ``[0, 2 pi)``.
    ``affine-shift``
        ``g(u) = scale * base(u + offset) + add`` for another model ``base``.
    """

    kind: str
    theta: float = 0.0
    samples: tuple[float, ...] = ()
    base: FluxModel | None = None
    offset: float = 0.0
    scale: float = 1.0
    add: float = 0.0
    gauge: float = GAUGE
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("cosine", "table", "affine-shift"):
            raise InputError(f"unknown flux kind {self.kind!r}")
        if self.kind == "table":
            if len(self.samples) < 8:
                raise InputError("table flux needs at least 8 samples")
            s = np.asarray(self.samples, dtype=float)
            if not np.all(np.isfinite(s)):
                raise InputError("table samples must be finite")
            nodes = np.linspace(0.0, self.gauge, len(s) + 1)
            spline = CubicSpline(nodes, np.append(s, s[0]), bc_type="periodic")
            object.__setattr__(self, "_spline", spline)
        if self.kind == "affine-shift" and self.base is None:
            raise InputError("affine-shift flux needs a base model")

    # constructors -------------------------------------------------------
    @classmethod
    def cosine(cls, theta: float) -> FluxModel:
        return cls("cosine", theta=float(theta))

    @classmethod
    def constant(cls, value: float) -> FluxModel:
        return cls("cosine", theta=0.0).shifted(scale=float(value))

    @classmethod
    def table(cls, samples) -> FluxModel:
        return cls("table", samples=tuple(float(v) for v in samples))

    @classmethod
    def from_function(cls, fn, n: int = 256) -> FluxModel:
        u = np.linspace(0.0, GAUGE, n, endpoint=False)
        return cls.table(fn(u))

    def shifted(self, offset: float = 0.0, scale: float = 1.0, add: float = 0.0) -> FluxModel:
        return FluxModel("affine-shift", base=self, offset=float(offset), scale=float(scale), add=float(add))

    # evaluation ---------------------------------------------------------
    def __call__(self, u):
        return flux_eval(self, u)

    def deriv(self, u, order: int = 1):
        return flux_deriv(self, u, order)

    def lipschitz(self, n: int = 2048) -> float:
        u = np.linspace(0.0, self.gauge, n, endpoint=False)
        return float(np.max(np.abs(self.deriv(u))))

    def min_max(self, n: int = 4096) -> tuple[float, float]:
        u = np.linspace(0.0, self.gauge, n, endpoint=False)
        v = self(u)
        return float(v.min()), float(v.max())

    def normalization_flags(self, tol: float = 1e-6) -> list[str]:
        """Deviations from ``g = 1 + theta h`` with ``min h = h(pi) = -1``, ``max h = 1``."""
        if self.kind == "cosine":
            return []
        u = np.linspace(0.0, self.gauge, 4096, endpoint=False)
        v = self(u)
        lo, hi = v.min(), v.max()
        flags = []
        mid = 0.5 * (lo + hi)
        if abs(mid - 1.0) > tol:
            flags.append(f"midrange {mid:.6g} != 1")
        if abs(self(math.pi) - lo) > max(tol, 1e-3 * (hi - lo)):
            flags.append("minimum not attained at u = pi")
        return flags

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "cosine":
            return {"kind": "cosine", "theta": self.theta}
        if self.kind == "table":
            return {"kind": "table", "samples": list(self.samples)}
        return {
            "kind": "affine-shift",
            "base": self.base.to_dict(),
            "offset": self.offset,
            "scale": self.scale,
            "add": self.add,
        }

    @classmethod
    def from_dict(cls, d: dict) -> FluxModel:
        kind = d.get("kind")
        if kind == "cosine":
            return cls.cosine(float(d["theta"]))
        if kind == "table":
            return cls.table(d["samples"])
        if kind == "affine-shift":
            return cls.from_dict(d["base"]).shifted(d.get("offset", 0.0), d.get("scale", 1.0), d.get("add", 0.0))
        raise InputError(f"unknown flux kind {kind!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> FluxModel:
        return cls.from_dict(json.loads(text))


def _check_finite(u):
    if not np.all(np.isfinite(u)):
        raise InputError("flux argument must be finite")


def flux_eval(f: FluxModel, u):
    """Value of ``g(u)``; scalar in, float out."""
    scalar = np.ndim(u) == 0
    _check_finite(u)
    if f.kind == "cosine":
        out = 1.0 + f.theta * np.cos(u)
    elif f.kind == "table":
        out = f._spline(np.mod(u, f.gauge))
    else:
        out = f.scale * flux_eval(f.base, np.add(u, f.offset)) + f.add
    return float(out) if scalar else np.asarray(out, dtype=float)


def flux_deriv(f: FluxModel, u, order: int = 1):
    """Derivative ``g'(u)`` (or ``g''`` with ``order=2``)."""
    scalar = np.ndim(u) == 0
    _check_finite(u)
    if order not in (1, 2):
        raise InputError("order must be 1 or 2")
    if f.kind == "cosine":
        out = -f.theta * np.sin(u) if order == 1 else -f.theta * np.cos(u)
    elif f.kind == "table":
        out = f._spline(np.mod(u, f.gauge), order)
    else:
        out = f.scale * flux_deriv(f.base, np.add(u, f.offset), order)
    return float(out) if scalar else np.asarray(out, dtype=float)


def scalar_flux(f: FluxModel):
    """Fast scalar closure ``u -> (g(u), g'(u))`` for inner Newton loops."""
    if f.kind == "cosine":
        th = f.theta
        cos, sin = math.cos, math.sin

        def gg(u):
            return 1.0 + th * cos(u), -th * sin(u)

        return gg
    if f.kind == "affine-shift":
        inner = scalar_flux(f.base)
        off, sc, ad = f.offset, f.scale, f.add

        def gg(u):
            v, d = inner(u + off)
            return sc * v + ad, sc * d

        return gg
    spl = f._spline
    dspl = spl.derivative()
    per = f.gauge

    def gg(u):
        w = u % per
        return float(spl(w)), float(dspl(w))

    return gg


# ---------------------------------------------------------------------------
# Grids and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    """Truncated mesh on ``[0, L]``; ``tanh`` stretching clusters nodes at ``x = 0``."""

    L: float
    n: int
    stretching: str = "uniform"
    beta: float = 2.5
    nodes: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 8:
            raise InputError("grid needs n >= 8")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InputError("grid length must be positive")
        if self.nodes is None:
            s = np.linspace(0.0, 1.0, self.n)
            if self.stretching == "uniform":
                x = self.L * s
            elif self.stretching == "tanh":
                x = self.L * (1.0 - np.tanh(self.beta * (1.0 - s)) / math.tanh(self.beta))
            else:
                raise InputError(f"unknown stretching {self.stretching!r}")
            x[0], x[-1] = 0.0, self.L
            object.__setattr__(self, "nodes", x)
        else:
            x = np.asarray(self.nodes, dtype=float)
            if len(x) != self.n or x[0] != 0.0 or not np.all(np.diff(x) > 0):
                raise InputError("nodes must start at 0 and increase strictly")
            object.__setattr__(self, "nodes", x)

    @property
    def x(self) -> np.ndarray:
        return self.nodes

    @classmethod
    def from_nodes(cls, x) -> Grid1D:
        x = np.asarray(x, dtype=float)
        return cls(L=float(x[-1]), n=len(x), stretching="custom", nodes=x)

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights for integrals over ``[0, L]``."""
        h = np.diff(self.nodes)
        w = np.zeros(self.n)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w


def default_length(c: float, t_max: float | None = None) -> float:
    if c > 0:
        return max(10.0, 12.0 / c)
    if t_max is None:
        raise InputError("c = 0 needs t_max to size the domain")
    return max(10.0, 6.0 * math.sqrt(t_max))


@dataclass(frozen=True)
class Field:
    """Sampled profile with affine far-field ``u ~ strain * x + intercept`` beyond ``L``."""

    grid: Grid1D
    values: np.ndarray
    strain: float = 0.0
    intercept: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InputError("field values must match grid size")
        if not math.isfinite(self.strain):
            raise InputError("far-field strain must be finite")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @classmethod
    def from_function(cls, grid: Grid1D, fn, fit_farfield: bool = True) -> Field:
        v = np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.n)
        return cls.with_fitted_farfield(grid, v) if fit_farfield else cls(grid, v)

    @classmethod
    def with_fitted_farfield(cls, grid: Grid1D, values) -> Field:
        k, b = fit_farfield(grid.nodes, values)
        return cls(grid, values, k, b)

    def __call__(self, x):
        """Evaluate by linear interpolation, affine extension past ``L``."""
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.grid.nodes, self.values)
        beyond = x > self.grid.L
        if np.any(beyond):
            out = np.where(beyond, self.values[-1] + self.strain * (x - self.grid.L), out)
        return out

    def shifted(self, delta: float) -> Field:
        return Field(self.grid, self.values + delta, self.strain, self.intercept + delta)

    def with_values(self, values) -> Field:
        return Field.with_fitted_farfield(self.grid, values)

    def gradient(self) -> np.ndarray:
        return np.gradient(self.values, self.grid.nodes, edge_order=2)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "u"])
        for xi, ui in zip(self.grid.nodes, self.values):
            w.writerow([repr(float(xi)), repr(float(ui))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> Field:
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text()
        else:
            text = str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["x", "u"]:
            raise InputError('field CSV must have header "x,u"')
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls.with_fitted_farfield(Grid1D.from_nodes(data[:, 0]), data[:, 1])


def fit_farfield(x, u, frac: float = 0.25) -> tuple[float, float]:
    """Least-squares line through the outer ``frac`` of the nodes."""
    x = np.asarray(x)
    u = np.asarray(u)
    m = x >= x[-1] * (1.0 - frac)
    if m.sum() < 2:
        m = slice(-2, None)
    k, b = np.polyfit(x[m], u[m], 1)
    return float(k), float(b)


@dataclass(frozen=True)
class Params:
    """Advection speed ``c >= 0`` and boundary flux."""

    c: float
    flux: FluxModel

    def __post_init__(self):
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise InputError("advection speed c must be finite and >= 0")

    def to_dict(self) -> dict:
        return {"c": self.c, "flux": self.flux.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> Params:
        return cls(float(d["c"]), FluxModel.from_dict(d["flux"]))


# ---------------------------------------------------------------------------
# Kernels, transforms, rates
# ---------------------------------------------------------------------------


def heat_kernel(x, t: float, c: float = 0.0):
    """Whole-line kernel of ``v_t = v_xx - (c^2/4) v``."""
    if not t > 0:
        raise DomainError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.25 * c * c * t - x * x / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return float(out) if out.ndim == 0 else out


_MAX_EXP = 700.0


def to_weighted(u: Field, c: float) -> Field:
    """``u~(x) = exp(-c x / 2) u(x)``."""
    w = np.exp(-0.5 * c * u.grid.nodes)
    return Field(u.grid, w * u.values, 0.0, 0.0)


def from_weighted(ut: Field, c: float) -> Field:
    """Inverse of :func:`to_weighted`."""
    if 0.5 * c * ut.grid.L > _MAX_EXP:
        raise RangeError("exp(c L / 2) overflows; shrink the domain length L")
    v = np.exp(0.5 * c * ut.grid.nodes) * ut.values
    return Field.with_fitted_farfield(ut.grid, v)


@dataclass(frozen=True)
class ModeRates:
    k: int
    omega: float
    nu_plus: complex
    nu_minus: complex
    eta_plus: complex
    eta_minus: complex


def mode_rates(k: int, omega: float, c: float) -> ModeRates:
    """Spatial rates of time-Fourier mode ``k`` in the weighted and derivative equations.

    ``nu = +-sqrt(c^2/4 + i k omega)`` and ``eta = (c +- sqrt(c^2 + 4 i k omega)) / 2``,
    principal branch, so the ``+`` root has nonnegative real part.
    """
    if not omega > 0:
        raise DomainError("omega must be positive")
    s1 = np.sqrt(complex(0.25 * c * c, k * omega))
    s2 = np.sqrt(complex(c * c, 4.0 * k * omega))
    return ModeRates(int(k), float(omega), complex(s1), complex(-s1), complex(0.5 * (c + s2)), complex(0.5 * (c - s2)))
