"""Quantum Brownian motion: coefficients, exact propagator, and evolution.

Perturbative master-equation coefficients are built by quadrature of the
bath kernels against the free oscillator trig functions.  The exact route
solves the nonlocal classical equation

    u'' + Omega^2 u + (2/M) int_0^s eta(s - s') u(s') ds' = 0

for the two boundary solutions u1(0)=u2(t)=1, u1(t)=u2(0)=0, from which the
Gaussian propagator of the reduced density matrix follows:

    J(X,Y;X0,Y0) = (b3/pi) exp[i(b1 X Y + b2 X0 Y - b3 X Y0 - b4 X0 Y0)]
                   exp[-(a11 Y^2 + a12 Y Y0 + a22 Y0^2)]

in sum/difference coordinates X = x + x', Y = x - x', acting with measure
dx0 dx0'.  With hbar explicit the phase coefficients are
b(1,2) = (M/2hbar) du(2,1)/ds|_t, b(3,4) = (M/2hbar) du(2,1)/ds|_0 and the
noise coefficients a_jl = (1+delta_jl)^(-1) (1/hbar) intint u_j u_l nu.
Exact master-equation coefficients follow from d/dt of the propagator;
hermiticity of the generator fixes them uniquely (the anomalous-diffusion
sign is pinned by cross-checking against the perturbative route).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, signal

from . import accel
from .env_kernels import ThermalBath, cached_kernel_set, kernel_trig_integrals
from .errors import CausticError, DomainError, ResolutionError, SolverError, StepSizeError
from .wigner import (PositionDensityMatrix, WignerGrid,  # noqa: F401
                     inverse_wigner_transform, wigner_transform)

__all__ = [
    "OscillatorParams", "CoefficientSet", "PropagatorCoefficients",
    "PositionDensityMatrix", "WignerGrid", "wigner_transform",
    "inverse_wigner_transform", "perturbative_coefficients", "u_functions",
    "propagator_coefficients", "propagator_series", "exact_master_coefficients",
    "apply_propagator", "evolve_master_equation", "make_grid",
    "gaussian_state", "trace_distance",
]


@dataclass(frozen=True)
class OscillatorParams:
    mass: float
    frequency: float
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.mass, self.frequency, self.hbar) <= 0:
            raise DomainError("oscillator parameters must be positive")

    @property
    def ground_width(self):
        """Ground-state position spread sqrt(hbar / 2 M Omega)."""
        return float(np.sqrt(self.hbar / (2 * self.mass * self.frequency)))


@dataclass
class CoefficientSet:
    """Time-dependent master-equation coefficients on a shared grid.

    freq_renorm holds the frequency-squared *shift* relative to the bare
    Omega^2 (so every series vanishes at t = 0).
    """

    times: np.ndarray
    freq_renorm: np.ndarray
    damping: np.ndarray
    diffusion: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        for name in ("freq_renorm", "damping", "diffusion", "anomalous"):
            if len(getattr(self, name)) != n:
                raise DomainError("coefficient series must share the time grid")

    def interpolators(self):
        return tuple(interpolate.CubicSpline(self.times, getattr(self, k))
                     for k in ("freq_renorm", "damping", "diffusion", "anomalous"))


def perturbative_coefficients(bath: ThermalBath, osc: OscillatorParams,
                              times) -> CoefficientSet:
    """Second-order coefficients by quadrature of eta, nu against trig."""
    times = np.asarray(times, dtype=float)
    ints = kernel_trig_integrals(bath, osc.frequency, times)
    m, om, hb = osc.mass, osc.frequency, osc.hbar
    return CoefficientSet(
        times=times,
        freq_renorm=-(2.0 / m) * ints["eta_cos"],
        damping=ints["eta_sin"] / (m * om),
        diffusion=ints["nu_cos"] / hb,
        anomalous=-ints["nu_sin"] / (m * om),
    )


# -- u functions and the Gaussian propagator ---------------------------------

_DEF_STEPS = 4000


def _u_step(bath, osc, horizon):
    spec = bath.spectral
    period = 2 * np.pi / osc.frequency
    h = min(period / _DEF_STEPS, horizon / 1000.0)
    if spec.kind == "ohmic-drude":
        h = min(h, 1.0 / (40.0 * spec.cutoff))
    else:
        h = min(h, 1.0 / (40.0 * spec.table[-1, 0]))
    n = int(np.ceil(horizon / h))
    return horizon / n, n


def _u_ivp(bath, osc, horizon, h=None, n=None):
    """Integrate the two initial-value solutions of the memory equation."""
    if h is None:
        h, n = _u_step(bath, osc, horizon)
    spec = bath.spectral
    om2 = osc.frequency**2
    two_over_m = 2.0 / osc.mass
    if spec.kind == "ohmic-drude":
        eta0 = spec.mass * spec.gamma0 * spec.cutoff**2
        u, v, _w = accel.drude_u_ivp(om2, eta0, spec.cutoff, two_over_m, h, n)
    else:
        kset = cached_kernel_set(bath, horizon)
        lags = np.arange(n + 1) * h
        eta_vals = np.asarray(kset.eta(lags), dtype=float)
        u = accel.volterra_u_ivp(eta_vals, om2, two_over_m, h, n)
        v = np.gradient(u, h, axis=1)
    s = np.arange(n + 1) * h
    return s, u, v


def u_functions(bath: ThermalBath, osc: OscillatorParams, horizon,
                return_grid=False):
    """Boundary solutions (u1, u2) of the memory equation on [0, horizon].

    Returns callables; raises CausticError when the boundary-value problem
    is degenerate (free case: sin(Omega t) = 0).
    """
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    s, u, v = _u_ivp(bath, osc, horizon)
    v1_end, v2_end = u[0, -1], u[1, -1]
    if abs(v2_end) < 1e-9 * max(1.0, np.max(np.abs(u[1]))):
        raise CausticError("degenerate boundary-value problem (caustic)",
                           time=horizon)
    c = v1_end / v2_end
    u1_vals = u[0] - c * u[1]
    u2_vals = u[1] / v2_end
    du1_vals = v[0] - c * v[1]
    du2_vals = v[1] / v2_end
    u1 = interpolate.CubicSpline(s, u1_vals)
    u2 = interpolate.CubicSpline(s, u2_vals)
    if return_grid:
        return u1, u2, (s, u1_vals, u2_vals, du1_vals, du2_vals)
    return u1, u2


def _u_residual(s, u_vals, om2, two_over_m, eta_lags):
    """Max-norm residual of the memory equation on the interior grid."""
    h = s[1] - s[0]
    n = len(s)
    if n < 9:
        return np.inf
    idx = np.arange(2, n - 2)
    upp = (-u_vals[idx - 2] + 16 * u_vals[idx - 1] - 30 * u_vals[idx]
           + 16 * u_vals[idx + 1] - u_vals[idx + 2]) / (12 * h * h)
    mem = np.empty(len(idx))
    for j, i in enumerate(idx):
        w = np.full(i + 1, h)
        w[0] = w[-1] = h / 2
        mem[j] = np.dot(w, eta_lags[i::-1] * u_vals[:i + 1])
    resid = upp + om2 * u_vals[idx] + two_over_m * mem
    scale = om2 * np.max(np.abs(u_vals)) + np.max(np.abs(two_over_m * mem)) + 1.0
    return float(np.max(np.abs(resid)) / scale)


@dataclass
class PropagatorCoefficients:
    """Gaussian propagator data at one horizon t."""

    horizon: float
    b1: float
    b2: float
    b3: float
    b4: float
    a11: float
    a12: float
    a22: float
    u1: Optional[Callable] = None
    u2: Optional[Callable] = None
    mass: float = 1.0
    hbar: float = 1.0

    def validate(self, tol=1e-6):
        if self.a11 < -tol or self.a22 < -tol:
            raise DomainError("noise quadratic form must have a11, a22 >= 0")
        if self.u1 is not None:
            for val, want in ((self.u1(0.0), 1.0), (self.u2(self.horizon), 1.0),
                              (self.u1(self.horizon), 0.0), (self.u2(0.0), 0.0)):
                if abs(val - want) > 1e-8:
                    raise SolverError("u boundary conditions violated")
        return self


def _noise_coefficients(bath, u1_vals, u2_vals, h, hbar):
    """a_jl by trapezoid double quadrature via FFT lag correlation."""
    n = len(u1_vals)
    kset = cached_kernel_set(bath, (n - 1) * h)
    lags = np.arange(n) * h
    nu_lags = np.asarray(kset.nu(lags), dtype=float)
    if bath.spectral.kind == "ohmic-drude":
        # panel-averaged origin value (log singularity is integrable)
        nu_lags[0] = kset.nu_samples[0] if abs(kset.grid[1] - h) < 1e-9 * h else nu_lags[0]
    w = np.full(n, h)
    w[0] = w[-1] = h / 2

    def corr(a, b):
        # c[k] = sum_i a[i] b[i - k], k = -(n-1)..(n-1)
        return signal.fftconvolve(a, b[::-1])[::-1]

    out = {}
    for (j, uj), (k, uk) in (((1, u1_vals), (1, u1_vals)),
                             ((1, u1_vals), (2, u2_vals)),
                             ((2, u2_vals), (2, u2_vals))):
        c = corr(w * uj, w * uk)
        lag_idx = np.abs(np.arange(-(n - 1), n))
        val = np.dot(nu_lags[lag_idx], c)
        delta = 1.0 if j == k else 0.0
        out[(j, k)] = val / (1.0 + delta) / hbar
    return out[(1, 1)], out[(1, 2)], out[(2, 2)]


def propagator_coefficients(bath: ThermalBath, osc: OscillatorParams,
                            horizon) -> PropagatorCoefficients:
    """b and a coefficients of the Gaussian propagator at one horizon."""
    u1, u2, (s, u1v, u2v, du1v, du2v) = u_functions(bath, osc, horizon,
                                                    return_grid=True)
    m_2h = osc.mass / (2 * osc.hbar)
    b1 = m_2h * du2v[-1]
    b2 = m_2h * du1v[-1]
    b3 = m_2h * du2v[0]
    b4 = m_2h * du1v[0]
    a11, a12, a22 = _noise_coefficients(bath, u1v, u2v, s[1] - s[0], osc.hbar)
    pc = PropagatorCoefficients(horizon=float(horizon), b1=float(b1),
                                b2=float(b2), b3=float(b3), b4=float(b4),
                                a11=float(a11), a12=float(a12), a22=float(a22),
                                u1=u1, u2=u2, mass=osc.mass, hbar=osc.hbar)
    return pc.validate()


@dataclass
class PropagatorSeries:
    """Propagator coefficients sampled over a grid of horizons."""

    times: np.ndarray
    b: np.ndarray      # shape (4, n)
    a: np.ndarray      # shape (3, n): a11, a12, a22
    mass: float
    hbar: float
    bare_frequency: float

    def at(self, i) -> PropagatorCoefficients:
        return PropagatorCoefficients(
            horizon=float(self.times[i]), b1=self.b[0, i], b2=self.b[1, i],
            b3=self.b[2, i], b4=self.b[3, i], a11=self.a[0, i],
            a12=self.a[1, i], a22=self.a[2, i], mass=self.mass, hbar=self.hbar)


def propagator_series(bath: ThermalBath, osc: OscillatorParams,
                      times) -> PropagatorSeries:
    """One IVP solve shared across horizons; BVP recombination per horizon."""
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise DomainError("horizon grid must be positive and increasing")
    t_max = float(times[-1])
    s, u, v = _u_ivp(bath, osc, t_max)
    h = s[1] - s[0]
    idx = np.rint(times / h).astype(int)
    if np.max(np.abs(idx * h - times)) > 1e-9 * t_max:
        # re-integrate with a grid commensurate with the requested horizons
        raise DomainError("horizons must be (near) multiples of the solver step; "
                          "use propagator_series_on_grid")
    b = np.empty((4, len(times)))
    a = np.empty((3, len(times)))
    m_2h = osc.mass / (2 * osc.hbar)
    for j, i in enumerate(idx):
        v2_end = u[1, i]
        if abs(v2_end) < 1e-9:
            raise CausticError("caustic inside the horizon grid", time=times[j])
        c = u[0, i] / v2_end
        u1v = u[0, :i + 1] - c * u[1, :i + 1]
        u2v = u[1, :i + 1] / v2_end
        b[0, j] = m_2h * (v[1, i] / v2_end)
        b[1, j] = m_2h * (v[0, i] - c * v[1, i])
        b[2, j] = m_2h * (v[1, 0] / v2_end)
        b[3, j] = m_2h * (v[0, 0] - c * v[1, 0])
        a[0, j], a[1, j], a[2, j] = _noise_coefficients(bath, u1v, u2v, h,
                                                        osc.hbar)
    return PropagatorSeries(times=times, b=b, a=a, mass=osc.mass,
                            hbar=osc.hbar, bare_frequency=osc.frequency)


def horizon_grid(bath, osc, t_min, t_max, n_points):
    """A horizon grid aligned with the internal solver step."""
    h, _ = _u_step(bath, osc, t_max)
    n = int(np.ceil(t_max / h))
    h = t_max / n
    lo = max(int(np.ceil(t_min / h)), 1)
    idx = np.unique(np.linspace(lo, n, n_points).astype(int))
    return idx * h


def exact_master_coefficients(series: PropagatorSeries) -> CoefficientSet:
    """Ehrenfest-exact coefficients from d/dt of the Gaussian propagator.

    Centered differences on the horizon grid; requires b2, b3 != 0.
    """
    t = series.times
    b1, b2, b3, _ = series.b
    a11, a12, _ = series.a
    if np.any(np.abs(b2) < 1e-12) or np.any(np.abs(b3) < 1e-12):
        bad = t[np.argmin(np.minimum(np.abs(b2), np.abs(b3)))]
        raise CausticError("vanishing b2/b3 on the grid", time=float(bad))
    hb, m = series.hbar, series.mass
    db1 = np.gradient(b1, t)
    db2 = np.gradient(b2, t)
    da11 = np.gradient(a11, t)
    da12 = np.gradient(a12, t)
    gamma = -db2 / (2 * b2) - hb * b1 / m
    om2_full = (2 * hb / m) * (b1 * db2 / b2 - db1)
    diffusion = (da11 - 2 * a11 * db2 / b2 - a12 * b1 * db2 / (b2 * b3)
                 + b1 * da12 / b3 - 4 * hb * a11 * b1 / m)
    anomalous = (a12 * db2 / (2 * b2 * b3) - da12 / (2 * b3) + 2 * hb * a11 / m)
    return CoefficientSet(times=t, freq_renorm=om2_full - series.bare_frequency**2,
                          damping=gamma, diffusion=diffusion, anomalous=anomalous)


# -- grids, states, metrics ---------------------------------------------------

DEFAULT_GRID_POINTS = 256


def make_grid(osc: OscillatorParams, n=DEFAULT_GRID_POINTS, half_width=None):
    """Uniform position grid; default spans +-8 ground-state widths."""
    if half_width is None:
        half_width = 8.0 * osc.ground_width
    return np.linspace(-half_width, half_width, n)


def gaussian_state(osc: OscillatorParams, x, center=0.0, momentum=0.0,
                   width=None) -> PositionDensityMatrix:
    """Pure Gaussian wavepacket density matrix on the grid."""
    if width is None:
        width = osc.ground_width * np.sqrt(2.0)  # delta with |psi|^2 std delta/sqrt2
    psi = np.exp(-((x - center) ** 2) / (2 * width**2)
                 + 1j * momentum * x / osc.hbar)
    return PositionDensityMatrix.from_wavefunction(x, psi)


def trace_distance(r1: PositionDensityMatrix, r2: PositionDensityMatrix):
    d = 0.5 * (r1.values - r2.values)
    ev = np.linalg.eigvalsh(0.5 * (d + d.conj().T))
    return float(np.sum(np.abs(ev))) * r1.dx


# -- evolution: exact propagator applied on the grid --------------------------

def apply_propagator(rho0: PositionDensityMatrix,
                     pc: PropagatorCoefficients) -> PositionDensityMatrix:
    """rho(t) = intint J rho0 dx0 dx0' by direct lattice quadrature.

    O(N^3) via grouping by input/output difference coordinates.
    """
    x = rho0.x
    n = len(x)
    dx = rho0.dx
    vals = rho0.values
    b1, b2, b3, b4 = pc.b1, pc.b2, pc.b3, pc.b4
    a11, a12, a22 = pc.a11, pc.a12, pc.a22

    d_in = np.arange(-(n - 1), n) * dx          # Y0 values per input diagonal
    # input anti-diagonal table: for each diagonal, the X0 values and entries
    pre = vals * np.exp(-1j * b4 * np.add.outer(x, x) * np.subtract.outer(x, x)
                        - a22 * np.subtract.outer(x, x) ** 2)
    X0 = np.add.outer(x, x)                     # [j1, j2]
    Y0 = np.subtract.outer(x, x)

    out = np.empty((n, n), dtype=complex)
    # loop over output difference index d (Y = d*dx), entries x1 = x[i], x2 = x[i-d]
    for d in range(-(n - 1), n):
        i_lo = max(0, d)
        i_hi = n + min(0, d)
        ii = np.arange(i_lo, i_hi)
        Yv = d * dx
        Xv = x[ii] + x[ii - d]
        # T[k] = sum over input diag k of exp(i b2 X0 Y) * pre
        ph = np.exp(1j * b2 * X0 * Yv) * pre     # [j1, j2]
        # reduce along input anti...: group by j1 - j2
        Tk = np.array([np.trace(ph, offset=-k) for k in range(-(n - 1), n)])
        w = np.exp(-1j * b3 * np.outer(Xv, d_in) - a12 * Yv * d_in[None, :])
        row = (w @ Tk) * np.exp(1j * b1 * Xv * Yv - a11 * Yv**2)
        out[ii, ii - d] = row
    out *= (pc.b3 / np.pi) * dx * dx

    tr = float(np.real(np.sum(np.diag(out)) * dx))
    drift = abs(tr - np.real(rho0.trace()))
    if drift > 1e-4:
        raise ResolutionError("propagator trace drift too large", measured=drift)
    herm = 0.5 * (out + out.conj().T)
    herm /= np.real(np.trace(herm)) * dx
    return PositionDensityMatrix(x=x, values=herm)


# -- evolution: direct master-equation stepping -------------------------------

def _derivative_factors(x, hbar):
    n = len(x)
    dx = x[1] - x[0]
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    return k


def evolve_master_equation(rho0: PositionDensityMatrix, coeffs: CoefficientSet,
                           osc: OscillatorParams, dt=None, steps=None,
                           t_final=None, snapshot_every=None):
    """Explicit RK4 stepping of the four-term generator.

    The generator, in the position representation (x1 row, x2 column):

      drho = (i hbar/2M)(d1^2 - d2^2) rho - (i M (Om^2+shift)/2 hbar)(x1^2-x2^2) rho
             - gamma (x1-x2)(d1-d2) rho - D (x1-x2)^2 rho
             + i f (x1-x2)(d1+d2) rho

    Hermiticity is restored by symmetrization each step.
    """
    x = rho0.x
    n = len(x)
    hb, m = osc.hbar, osc.mass
    om2_bare = osc.frequency**2
    if t_final is None:
        if steps is None or dt is None:
            raise DomainError("give dt and steps, or t_final")
        t_final = dt * steps
    if dt is None:
        dt = min(0.01 / osc.frequency, t_final / 100.0)
    k = _derivative_factors(x, hb)
    kmax2 = np.max(k**2)
    dt_stab = 2.6 / (hb * kmax2 / (2 * m) + om2_bare)
    dt = min(dt, dt_stab)
    steps = int(np.ceil(t_final / dt))
    dt = t_final / steps

    fr_s, ga_s, di_s, an_s = coeffs.interpolators()
    tmax = coeffs.times[-1]

    xx = np.subtract.outer(x, x)          # x1 - x2
    x2diff = np.add.outer(x**2, -x**2)    # x1^2 - x2^2

    def d_axis0(r):
        return np.fft.ifft(1j * k[:, None] * np.fft.fft(r, axis=0), axis=0)

    def d_axis1(r):
        return np.fft.ifft(1j * k[None, :] * np.fft.fft(r, axis=1), axis=1)

    def dd_axis0(r):
        return np.fft.ifft(-(k**2)[:, None] * np.fft.fft(r, axis=0), axis=0)

    def dd_axis1(r):
        return np.fft.ifft(-(k**2)[None, :] * np.fft.fft(r, axis=1), axis=1)

    def rhs(r, t):
        tc = min(t, tmax)
        shift, ga, di, an = (float(fr_s(tc)), float(ga_s(tc)),
                             float(di_s(tc)), float(an_s(tc)))
        om2 = om2_bare + shift
        d1 = d_axis0(r)
        d2 = d_axis1(r)
        out = (0.5j * hb / m) * (dd_axis0(r) - dd_axis1(r))
        out -= (0.5j * m * om2 / hb) * x2diff * r
        out -= ga * xx * (d1 - d2)
        out -= di * xx**2 * r
        out += 1j * an * xx * (d1 + d2)
        return out

    r = rho0.values.copy()
    t = 0.0
    snaps = []
    for step in range(steps):
        k1 = rhs(r, t)
        k2 = rhs(r + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(r + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(r + dt * k3, t + dt)
        r = r + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        r = 0.5 * (r + r.conj().T)
        t += dt
        nrm = np.max(np.abs(r))
        if not np.isfinite(nrm) or nrm > 1e6:
            raise StepSizeError(f"master equation stepping unstable at t={t}")
        if snapshot_every and (step + 1) % snapshot_every == 0:
            snaps.append((t, PositionDensityMatrix(x, r.copy())))
    final = PositionDensityMatrix(x, r)
    if snapshot_every:
        return final, snaps
    return final
