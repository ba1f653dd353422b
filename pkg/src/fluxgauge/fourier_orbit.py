"""Relative periodic orbits from a boundary-only Fourier formulation.

Along an orbit ``u(x, t) = k x - omega t + w(x, omega t)`` with ``w`` periodic in
the phase ``theta = omega t`` and ``k = omega / c``.  Mode ``j`` of ``w`` solves
``i j omega w_j = w_j'' - c w_j'`` and stays bounded only along
``exp(eta_j^- x)``, ``eta_j^- = (c - sqrt(c^2 + 4 i j omega)) / 2``.  Writing
``u(0, t) = -theta + q(theta)`` the boundary condition becomes the periodic
equation

    omega / c + (D q)(theta) = g(q(theta) - theta),

with the Dirichlet-to-Neumann multiplier ``D = diag(eta_j^-)`` in Fourier space.
Collocation on ``N`` phases plus the phase condition ``q(0) = y_phase`` gives
``N + 1`` equations for ``(q, omega)``, solved by dense Newton.  The strain
``k = omega / c`` is the phase average of ``g(u(0, t))`` since ``eta_0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import circulant, lu_factor, lu_solve

from .core import GAUGE, FluxModel


class FourierOrbitFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class FourierOrbit:
    """Boundary representation of a relative periodic orbit."""

    c: float
    omega: float
    q: np.ndarray
    y_phase: float
    residual: float
    iterations: int
    tail: float

    @property
    def T(self) -> float:
        return GAUGE / self.omega

    @property
    def strain(self) -> float:
        return self.omega / self.c

    @property
    def N(self) -> int:
        return len(self.q)

    def boundary_trace(self, t) -> np.ndarray:
        """``u(0, t)`` by trigonometric interpolation of ``q``."""
        th = self.omega * np.asarray(t, dtype=float)
        qh = np.fft.rfft(self.q) / self.N
        k = np.arange(len(qh))
        wt = np.where((k == 0) | ((self.N % 2 == 0) & (k == self.N // 2)), 1.0, 2.0)
        vals = np.real(np.exp(1j * np.multiply.outer(th, k)) @ (wt * qh))
        return vals - th

    def profile(self, x) -> np.ndarray:
        """``u(x, 0)`` from the decaying mode sum."""
        return self.field(x, 0.0)

    def field(self, x, t: float) -> np.ndarray:
        """``u(x, t)``: affine part plus decaying modes ``exp(eta_j x + i j omega t)``."""
        x = np.asarray(x, dtype=float)
        N = self.N
        qh = np.fft.fft(self.q) / N
        kk = np.fft.fftfreq(N, 1.0 / N)
        th = self.omega * t
        eta = eta_minus(kk, self.omega, self.c)
        vals = np.real(np.exp(np.multiply.outer(x, eta)) @ (qh * np.exp(1j * kk * th)))
        return self.strain * x - th + vals


def eta_minus(k, omega: float, c: float):
    """Decaying rates ``(c - sqrt(c^2 + 4 i k omega)) / 2``; zero for ``k = 0``."""
    k = np.asarray(k, dtype=float)
    eta = 0.5 * (c - np.sqrt(c * c + 4j * k * omega))
    return np.where(k == 0, 0.0, eta)


def _deta_domega(k, omega: float, c: float):
    k = np.asarray(k, dtype=float)
    d = -1j * k / np.sqrt(c * c + 4j * k * omega)
    return np.where(k == 0, 0.0, d)


def harmonic_strain(flux: FluxModel, n: int = 4096) -> float:
    """``2 pi / int_0^{2 pi} du / g(u)`` for a positive flux (large-c limit of the strain)."""
    u = np.linspace(0.0, GAUGE, n, endpoint=False)
    g = flux(u)
    if np.min(g) <= 0:
        raise ValueError("harmonic strain needs g > 0")
    return GAUGE / (np.mean(1.0 / g) * GAUGE)


def large_c_guess(flux: FluxModel, N: int, y_phase: float = 0.0) -> tuple[np.ndarray, float]:
    """Profile ``q`` and strain from the reduced law ``-k du/dtheta = g(u)``."""
    k = harmonic_strain(flux)
    u = np.linspace(y_phase, y_phase - GAUGE, 8 * N + 1)
    th = k * cumulative_trapezoid(-1.0 / flux(u), u, initial=0.0)
    th *= GAUGE / th[-1]
    phases = GAUGE * np.arange(N) / N
    q = np.interp(phases, th, u) + phases
    return q, k


def _dtn_matrix(N: int, eta) -> np.ndarray:
    # q -> ifft(eta * fft(q)) is circulant with first column ifft(eta)
    return circulant(np.real(np.fft.ifft(eta)))


def resample(q: np.ndarray, N: int) -> np.ndarray:
    """Trigonometric resampling of periodic samples to ``N`` points."""
    M = len(q)
    if M == N:
        return q.copy()
    qh = np.fft.rfft(q)
    out = np.zeros(N // 2 + 1, dtype=complex)
    m = min(len(qh), len(out))
    out[:m] = qh[:m]
    if N < M and N % 2 == 0:
        out[-1] = out[-1].real
    if M % 2 == 0 and M < N:
        out[M // 2] *= 0.5
    return np.fft.irfft(out, n=N) * (N / M)


def solve_fourier_orbit(
    flux: FluxModel,
    c: float,
    N: int = 128,
    y_phase: float = 0.0,
    guess: tuple[np.ndarray, float] | None = None,
    tol: float = 1e-11,
    max_iter: int = 40,
    adapt: bool = True,
    tail_tol: float = 1e-9,
    N_max: int = 4096,
) -> FourierOrbit:
    """Newton solve of the boundary equation, doubling ``N`` until the spectrum is resolved.

    Parameters
    ----------
    guess : (q, omega), optional
        Starting point; ``q`` is resampled to ``N``.  Defaults to the large-c reduced law.
    tail_tol : float
        Required ratio of the top-quarter Fourier amplitudes to the largest one.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if guess is None:
        q, k = large_c_guess(flux, N, y_phase)
        omega = c * k
    else:
        q, omega = resample(np.asarray(guess[0], float), N), float(guess[1])
    while True:
        orb = _newton(flux, c, q, omega, y_phase, tol, max_iter)
        if not adapt or orb.tail <= tail_tol or 2 * orb.N > N_max:
            return orb
        q, omega = resample(orb.q, 2 * orb.N), orb.omega


def _newton(flux, c, q, omega, y_phase, tol, max_iter) -> FourierOrbit:
    N = len(q)
    th = GAUGE * np.arange(N) / N
    kk = np.fft.fftfreq(N, 1.0 / N)
    if N % 2 == 0:
        kk[N // 2] = N // 2  # Nyquist mode kept real below
    q = q.copy()

    def resid(q, omega):
        eta = eta_minus(kk, omega, c)
        if N % 2 == 0:
            eta[N // 2] = eta[N // 2].real
        Dq = np.real(np.fft.ifft(eta * np.fft.fft(q)))
        r = omega / c + Dq - flux(q - th)
        return np.append(r, q[0] - y_phase), eta

    def jacobian(q, omega, eta):
        J = np.empty((N + 1, N + 1))
        J[:N, :N] = _dtn_matrix(N, eta)
        J[np.arange(N), np.arange(N)] -= flux.deriv(q - th)
        de = _deta_domega(kk, omega, c)
        if N % 2 == 0:
            de[N // 2] = de[N // 2].real
        J[:N, N] = np.real(np.fft.ifft(de * np.fft.fft(q))) + 1.0 / c
        J[N, :] = 0.0
        J[N, 0] = 1.0
        return lu_factor(J, overwrite_a=True, check_finite=False)

    r, eta = resid(q, omega)
    nr = np.max(np.abs(r))
    it = 0
    lu = None
    # chord iterations reuse the factorization while they contract fast enough
    for it in range(1, max_iter + 1):
        if nr <= tol:
            it -= 1
            break
        fresh = lu is None
        if fresh:
            lu = jacobian(q, omega, eta)
        step = lu_solve(lu, -r, check_finite=False)
        lam = 1.0
        while True:
            qn = q + lam * step[:N]
            on = omega + lam * step[N]
            if on > 0:
                rn, etan = resid(qn, on)
                nrn = np.max(np.abs(rn))
                if nrn < (1 - 1e-4 * lam) * nr:
                    break
            lam *= 0.5
            if lam < 1e-3:
                break
        if lam < 1e-3:
            if fresh:
                raise FourierOrbitFailure("line search failed")
            lu = None
            continue
        if nrn > 0.25 * nr:
            lu = None
        q, omega, r, eta, nr = qn, on, rn, etan, nrn
        if nr <= tol:
            break
    else:
        raise FourierOrbitFailure(f"Newton did not converge, residual {nr:.3e}")
    qh = np.abs(np.fft.rfft(q - np.mean(q)))
    top = qh[3 * len(qh) // 4 :]
    tail = float(np.max(top) / max(np.max(qh), 1e-300)) if len(top) else 0.0
    return FourierOrbit(c, omega, q, y_phase, float(nr), it, tail)


def continue_in_c(flux: FluxModel, c_values, N0: int = 64, y_phase: float = 0.0, **kw) -> list[FourierOrbit]:
    """Solve along ``c_values`` (ordered), each solution seeding the next."""
    out = []
    guess = None
    N = N0
    for c in c_values:
        if guess is None:
            orb = solve_fourier_orbit(flux, c, N=N, y_phase=y_phase, **kw)
        else:
            orb = solve_fourier_orbit(flux, c, N=N, y_phase=y_phase, guess=(guess.q, guess.omega * c / guess.c), **kw)
        out.append(orb)
        guess = orb
        N = orb.N
    return out


def log_path(c_start: float, c_end: float, ratio: float = 1.25) -> np.ndarray:
    """Geometric sequence from ``c_start`` to ``c_end`` (inclusive)."""
    n = max(2, int(math.ceil(abs(math.log(c_end / c_start)) / math.log(ratio))) + 1)
    return np.geomspace(c_start, c_end, n)


def continue_to_theta(thetas, c: float, ratio: float = 1.5, N0: int = 256, y_phase: float = 0.0, **kw) -> list[FourierOrbit]:
    """Cosine-flux orbits at increasing ``thetas`` in ``[0, 1)``, returned in input order.

    Between targets ``1 - theta`` shrinks geometrically by at most ``ratio``.
    Near the saddle-node at ``theta = 1`` the frequency scales like
    ``sqrt(1 - theta)``, which rescales the predictor.
    """
    thetas = [float(t) for t in thetas]
    if any(b <= a for a, b in zip(thetas, thetas[1:])) or not 0 <= thetas[0] < thetas[-1] < 1:
        raise ValueError("thetas must increase inside [0, 1)")
    out = []
    prev = None
    prev_gap = 1.0 - thetas[0]
    for target in thetas:
        gap_t = 1.0 - target
        if prev is None:
            gaps = [gap_t]
        else:
            m = max(1, int(math.ceil(math.log(prev_gap / gap_t) / math.log(ratio))))
            gaps = np.geomspace(prev_gap, gap_t, m + 1)[1:]
        for gap in gaps:
            flux = FluxModel.cosine(1.0 - gap)
            if prev is None:
                orb = solve_fourier_orbit(flux, c, N=N0, y_phase=y_phase, **kw)
            else:
                om = prev.omega * math.sqrt(gap / prev_gap)
                orb = solve_fourier_orbit(flux, c, N=prev.N, y_phase=y_phase, guess=(prev.q, om), **kw)
            prev, prev_gap = orb, gap
        out.append(prev)
    return out
