"""Spectral densities, thermal occupation, and bath correlation kernels.

Conventions (natural units, k_B = 1, hbar explicit):

* ohmic-Drude spectral density  J(w) = 2 M gamma0 (w/pi) L^2/(L^2 + w^2),
  with high-frequency cutoff L.
* noise kernel        nu(t)  = int_0^inf J(w) cos(w t) (1 + 2 N(w)) dw
* dissipation kernel  eta(t) = int_0^inf J(w) sin(w t) dw
* decay kernel        k(t)   = hbar * int_0^inf J(w) exp(-i w t) dw,
  so Re k = hbar * nu|_{T=0} and Im k = -hbar * eta.

For the Drude form, eta has the exact closed form M gamma0 L^2 exp(-L t)
(t > 0), and the T = 0 noise kernel reduces to exponential-integral
functions; both are used in preference to quadrature.  Note nu(0) diverges
logarithmically for the Drude tail -- kernels are meant to be evaluated at
t != 0 and integrated through the origin, where the singularity is
integrable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate, special

from .errors import DomainError, QuadratureError, RangeError

__all__ = [
    "SpectralDensity",
    "ThermalBath",
    "KernelSet",
    "spectral_density_value",
    "thermal_occupation",
    "noise_kernel",
    "dissipation_kernel",
    "decay_kernel",
    "bilinear_bath_kernels",
    "build_kernel_set",
    "kernel_trig_integrals",
    "load_tabulated_spectral_density",
]

_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDensity:
    """Coupling-weighted density of bath modes.

    kind is "ohmic-drude" or "tabulated".  Tabulated data is a strictly
    increasing (omega, J) table, linearly interpolated, zero outside the
    tabulated support when integrated, and a RangeError on point lookups
    beyond the table.
    """

    kind: str
    gamma0: float = 0.0
    cutoff: float = 0.0
    mass: float = 1.0
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("ohmic-drude", "tabulated"):
            raise DomainError(f"unknown spectral density kind {self.kind!r}")
        if self.kind == "ohmic-drude":
            if self.gamma0 < 0 or self.cutoff <= 0 or self.mass <= 0:
                raise DomainError("ohmic-drude needs gamma0 >= 0 and cutoff, mass > 0")
        else:
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
                raise DomainError("tabulated spectral density needs an (n,2) table")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise DomainError("tabulated omega grid must be strictly increasing")
            if np.any(tab[:, 0] < 0) or np.any(tab[:, 1] < 0):
                raise DomainError("tabulated spectral density must have omega, J >= 0")
            object.__setattr__(self, "table", tab)

    @classmethod
    def ohmic_drude(cls, gamma0, cutoff, mass=1.0):
        return cls(kind="ohmic-drude", gamma0=gamma0, cutoff=cutoff, mass=mass)

    @classmethod
    def tabulated(cls, omega, j_values):
        table = np.column_stack([np.asarray(omega, float), np.asarray(j_values, float)])
        return cls(kind="tabulated", table=table)


@dataclass(frozen=True)
class ThermalBath:
    """A stationary thermal bath: spectral density + temperature.

    temperature = 0 is handled as an exact branch (coth factor -> 1),
    never as a large-beta limit.
    """

    spectral: SpectralDensity
    temperature: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")
        if self.hbar <= 0:
            raise DomainError("hbar must be > 0")

    def coth_factor(self, omega):
        """1 + 2 N(omega) = coth(beta hbar omega / 2); 1 exactly at T = 0."""
        omega = np.asarray(omega, dtype=float)
        if self.temperature == 0.0:
            return np.ones_like(omega)
        x = self.hbar * omega / self.temperature  # = beta hbar omega
        return 1.0 + 2.0 / np.expm1(x)


def spectral_density_value(bath, omega):
    """J(omega) for a bath or bare SpectralDensity; omega >= 0."""
    spec = bath.spectral if isinstance(bath, ThermalBath) else bath
    om = np.asarray(omega, dtype=float)
    if np.any(om < 0):
        raise DomainError("spectral density is defined for omega >= 0")
    if spec.kind == "ohmic-drude":
        L2 = spec.cutoff**2
        val = 2.0 * spec.mass * spec.gamma0 * (om / np.pi) * L2 / (L2 + om**2)
    else:
        tab = spec.table
        if np.any(om > tab[-1, 0]) or np.any(om < tab[0, 0]):
            raise RangeError("omega outside tabulated spectral density range")
        val = np.interp(om, tab[:, 0], tab[:, 1])
    return float(val) if np.isscalar(omega) else val


def thermal_occupation(bath, omega):
    """Mean occupation N(omega) with 1 + 2N = coth(beta hbar omega / 2)."""
    if omega <= 0:
        raise DomainError("thermal occupation needs omega > 0")
    if bath.temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(bath.hbar * omega / bath.temperature)


# -- Drude closed forms ------------------------------------------------------

def _eta_drude(spec, t):
    """Exact dissipation kernel for the Drude form; odd in t, eta(0) = 0."""
    t = np.asarray(t, dtype=float)
    amp = spec.mass * spec.gamma0 * spec.cutoff**2
    out = np.sign(t) * amp * np.exp(-spec.cutoff * np.abs(t))
    return out


def _expei_sym(x):
    """e^x Ei(-x) + e^-x Ei(x), stable for large x (both pieces overflow)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 30.0
    xs = x[small]
    out[small] = -np.exp(xs) * special.exp1(xs) + np.exp(-xs) * special.expi(xs)
    xl = x[~small]
    # asymptotic series of the symmetric combination: 2/x^2 + 12/x^4 + 240/x^6
    inv2 = 1.0 / (xl * xl)
    out[~small] = inv2 * (2.0 + inv2 * (12.0 + inv2 * 240.0))
    return out


def _nu0_drude(spec, t):
    """T = 0 noise kernel for the Drude form (exact, diverges at t = 0)."""
    t = np.abs(np.asarray(t, dtype=float))
    amp = spec.mass * spec.gamma0 * spec.cutoff**2 / np.pi
    return -amp * _expei_sym(spec.cutoff * t)


def _nu_thermal_drude_point(bath, t, tol=_QUAD_TOL):
    """Thermal part int J(w) 2N(w) cos(w t) dw; integrand decays as e^-beta w."""
    spec = bath.spectral
    if bath.temperature == 0.0:
        return 0.0
    beta_h = bath.hbar / bath.temperature
    w_hi = 45.0 / beta_h

    def f(w):
        if w == 0.0:
            return 4.0 * spec.mass * spec.gamma0 * bath.temperature / (np.pi * bath.hbar)
        return spectral_density_value(spec, w) * 2.0 / math.expm1(beta_h * w)

    t = abs(t)
    if t == 0.0:
        val, err = integrate.quad(f, 0.0, w_hi, epsabs=tol, epsrel=tol, limit=400)
    else:
        val, err = integrate.quad(f, 0.0, w_hi, weight="cos", wvar=t,
                                  epsabs=tol, epsrel=tol, limit=400)
    return val


def _nu_thermal_drude_grid(bath, grid):
    """Thermal part of nu on a uniform time grid via an FFT cosine transform.

    The integrand g(w) = J(w) 2N(w) decays like exp(-beta hbar w), so a
    trapezoid rule on a fine uniform w grid commensurate with the FFT
    length is spectrally cheap and accurate to ~1e-8 relative.
    """
    spec = bath.spectral
    if bath.temperature == 0.0:
        return np.zeros_like(grid)
    h = grid[1] - grid[0]
    beta_h = bath.hbar / bath.temperature
    w_hi = 45.0 / beta_h
    nfft = 1 << 21
    dw = 2.0 * np.pi / (nfft * h)
    n_w = int(np.ceil(w_hi / dw)) + 1
    if n_w > nfft:
        # horizon x bandwidth too large for the default FFT; fall back
        return np.array([_nu_thermal_drude_point(bath, t) for t in grid])
    w = np.arange(n_w) * dw
    g = np.zeros(n_w)
    g[1:] = spectral_density_value(spec, w[1:]) * 2.0 / np.expm1(beta_h * w[1:])
    g[0] = 4.0 * spec.mass * spec.gamma0 * bath.temperature / (np.pi * bath.hbar)
    g[0] *= 0.5  # trapezoid end weight
    spec_fft = np.fft.rfft(g, n=nfft)
    vals = dw * spec_fft.real[: len(grid)]
    return vals


def _tabulated_kernel_point(bath, t, trig, thermal, tol=_QUAD_TOL):
    spec = bath.spectral
    lo, hi = spec.table[0, 0], spec.table[-1, 0]

    def f(w):
        j = np.interp(w, spec.table[:, 0], spec.table[:, 1])
        return j * (bath.coth_factor(w) if thermal else 1.0)

    t = float(t)
    if t == 0.0:
        if trig == "sin":
            return 0.0, 0.0
        return integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=400)
    val, err = integrate.quad(f, lo, hi, weight=trig, wvar=abs(t),
                              epsabs=tol, epsrel=tol, limit=400)
    if trig == "sin" and t < 0:
        val = -val
    return val, err


def noise_kernel(bath, t, tol=1e-10):
    """nu(t) by closed form + quadrature (Drude) or quadrature (tabulated).

    Even in t.  For Drude baths nu(0) diverges logarithmically and raises
    QuadratureError.
    """
    spec = bath.spectral
    if spec.kind == "ohmic-drude":
        if spec.gamma0 == 0.0:
            return 0.0
        if t == 0.0:
            raise QuadratureError(
                "nu(0) diverges logarithmically for the Drude tail", estimate=np.inf)
        return float(_nu0_drude(spec, t)) + _nu_thermal_drude_point(bath, t, tol)
    val, err = _tabulated_kernel_point(bath, abs(t), "cos", thermal=True, tol=tol)
    if err > max(tol, 1e-8 * abs(val)) * 100:
        raise QuadratureError("noise kernel quadrature did not converge", estimate=err)
    return val


def dissipation_kernel(bath, t, tol=1e-10):
    """eta(t); odd in t, eta(0) = 0 exactly."""
    spec = bath.spectral
    if t == 0.0:
        return 0.0
    if spec.kind == "ohmic-drude":
        return float(_eta_drude(spec, t))
    val, err = _tabulated_kernel_point(bath, t, "sin", thermal=False, tol=tol)
    if err > max(tol, 1e-8 * abs(val)) * 100:
        raise QuadratureError("dissipation kernel quadrature did not converge",
                              estimate=err)
    return val


def decay_kernel(bath, t, tol=1e-10):
    """Rotating-wave kernel k(t) = hbar int J(w) e^{-i w t} dw.

    Temperature independent (commutator average).  conj(k(t)) = k(-t).
    """
    spec = bath.spectral
    if spec.kind == "ohmic-drude":
        if spec.gamma0 == 0.0:
            return 0.0 + 0.0j
        if t == 0.0:
            raise QuadratureError(
                "k(0) diverges logarithmically for the Drude tail", estimate=np.inf)
        re = float(_nu0_drude(spec, abs(t)))
        im = -float(_eta_drude(spec, abs(t)))
        k = bath.hbar * (re + 1j * im)
        return k if t > 0 else np.conj(k)
    re, err_r = _tabulated_kernel_point(bath, abs(t), "cos", thermal=False, tol=tol)
    im, err_i = (0.0, 0.0) if t == 0.0 else _tabulated_kernel_point(
        bath, abs(t), "sin", thermal=False, tol=tol)
    k = bath.hbar * (re - 1j * im)
    return k if t >= 0 else np.conj(k)


def bilinear_bath_kernels(bath, t, t1):
    """Second-order kernels K^(1)..K^(4) for a single hermitian bath coupling.

    For E = sum_n lambda_n q_n in a stationary thermal state these reduce to
    K1 = K3 = hbar nu(t - t1) and K2 = K4 = -i hbar eta(t - t1).
    """
    tau = t - t1
    k1 = bath.hbar * noise_kernel(bath, tau)
    k2 = -1j * bath.hbar * dissipation_kernel(bath, tau)
    return k1, k2, k1, k2


# -- cached kernel sets ------------------------------------------------------

@dataclass
class KernelSet:
    """Kernels sampled on a uniform grid with cubic interpolation.

    nu / eta / k are callables valid on [-valid_horizon, valid_horizon].
    The raw samples are kept for integrators that want lag arrays.
    """

    nu: Callable
    eta: Callable
    k: Callable
    valid_horizon: float
    grid: np.ndarray = field(repr=False)
    nu_samples: np.ndarray = field(repr=False)
    eta_samples: np.ndarray = field(repr=False)
    # Drude only: the smooth thermal part of nu, sampled on the same grid
    nu_thermal_samples: Optional[np.ndarray] = field(default=None, repr=False)

    def _check(self, t):
        if np.any(np.abs(t) > self.valid_horizon * (1 + 1e-12)):
            raise DomainError("kernel evaluated beyond its valid horizon")


def _default_grid_step(bath, horizon):
    spec = bath.spectral
    if spec.kind == "ohmic-drude":
        scale = 1.0 / (20.0 * spec.cutoff)
    else:
        scale = 1.0 / (20.0 * spec.table[-1, 0])
    return min(scale, horizon / 200.0)


def build_kernel_set(bath, horizon, grid_step=None):
    """Sample nu and eta on [0, horizon] and wrap in interpolants.

    nu(0) is stored as the average of the first panel so the cached kernel
    can be integrated through the (integrable) origin singularity.
    """
    if grid_step is None:
        grid_step = _default_grid_step(bath, horizon)
    n = max(int(np.ceil(horizon / grid_step)), 16)
    grid = np.linspace(0.0, horizon, n + 1)
    spec = bath.spectral

    nu_th = None
    if spec.kind == "ohmic-drude":
        eta_s = _eta_drude(spec, grid)
        nu_th = np.zeros_like(grid)
        if bath.temperature > 0:
            nu_th = _nu_thermal_drude_grid(bath, grid)
        nu_s = np.empty_like(grid)
        nu_s[1:] = _nu0_drude(spec, grid[1:]) + nu_th[1:]
        # panel-averaged origin value keeps integrals through t=0 sane
        head, _ = integrate.quad(lambda s: float(_nu0_drude(spec, s)),
                                 0.0, grid[1], epsabs=1e-12, epsrel=1e-10)
        nu_s[0] = head / grid[1] + nu_th[0]
    else:
        eta_s = np.array([dissipation_kernel(bath, t) for t in grid])
        nu_s = np.array([noise_kernel(bath, t) for t in grid])

    nu_spl = interpolate.CubicSpline(grid, nu_s)
    eta_spl = interpolate.CubicSpline(grid, eta_s)

    def nu_f(t):
        return nu_spl(np.abs(t))

    def eta_f(t):
        return np.sign(t) * eta_spl(np.abs(t))

    def k_f(t):
        if spec.kind == "ohmic-drude":
            re = _nu0_drude(spec, np.abs(t))
        else:
            re = np.array([_tabulated_kernel_point(bath, abs(ti), "cos", False)[0]
                           for ti in np.atleast_1d(t)])
        return bath.hbar * (re - 1j * eta_f(t))

    return KernelSet(nu=nu_f, eta=eta_f, k=k_f, valid_horizon=horizon,
                     grid=grid, nu_samples=nu_s, eta_samples=eta_s,
                     nu_thermal_samples=nu_th)


# -- cumulative trig-weighted kernel integrals -------------------------------

_KSET_CACHE: dict = {}


def _bath_key(bath):
    spec = bath.spectral
    tab = None if spec.table is None else spec.table.tobytes()
    return (spec.kind, spec.gamma0, spec.cutoff, spec.mass, tab,
            bath.temperature, bath.hbar)


def cached_kernel_set(bath, horizon):
    key = _bath_key(bath)
    hit = _KSET_CACHE.get(key)
    if hit is None or hit.valid_horizon < horizon:
        hit = build_kernel_set(bath, horizon * 1.05)
        _KSET_CACHE[key] = hit
    return hit


def kernel_trig_integrals(bath, freq, ts, tol=1e-11):
    """Cumulative integrals int_0^t trig(freq s) kernel(s) ds on a grid.

    Returns a dict with arrays 'nu_cos', 'nu_sin', 'eta_cos', 'eta_sin'
    matching ts (which must start at 0 and increase).  These are the raw
    quadratures every perturbative master-equation coefficient is built
    from.
    """
    ts = np.asarray(ts, dtype=float)
    if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
        raise DomainError("time grid must start at 0 and increase")
    spec = bath.spectral
    kset = cached_kernel_set(bath, float(ts[-1]) if ts[-1] > 0 else 1.0)

    if spec.kind == "ohmic-drude":
        # exact closed forms inside the integrand; spline only for the
        # (smooth) thermal part of nu
        def eta_f(s):
            return float(_eta_drude(spec, s))

        if bath.temperature > 0:
            th_spl = interpolate.CubicSpline(kset.grid, kset.nu_thermal_samples)

            def nu_f(s):
                return (float(_nu0_drude(spec, s)) if s > 0 else 0.0) + float(th_spl(s))
        else:
            def nu_f(s):
                return float(_nu0_drude(spec, s)) if s > 0 else 0.0
    else:
        def eta_f(s):
            return float(kset.eta(s))

        def nu_f(s):
            return float(kset.nu(s))

    out = {k: np.zeros_like(ts) for k in ("nu_cos", "nu_sin", "eta_cos", "eta_sin")}
    acc = dict.fromkeys(out, 0.0)
    specs = {
        "nu_cos": (nu_f, np.cos),
        "nu_sin": (nu_f, np.sin),
        "eta_cos": (eta_f, np.cos),
        "eta_sin": (eta_f, np.sin),
    }
    for i in range(1, len(ts)):
        a, b = ts[i - 1], ts[i]
        for name, (ker, trig) in specs.items():
            val, err = integrate.quad(lambda s: ker(s) * trig(freq * s), a, b,
                                      epsabs=tol, epsrel=1e-10, limit=200)
            if not np.isfinite(val):
                raise QuadratureError(f"{name} integral diverged on [{a}, {b}]",
                                      estimate=err)
            acc[name] += val
            out[name][i] = acc[name]
    return out


def load_tabulated_spectral_density(path):
    """Load a two-column CSV ``omega,J`` with a ``# units: ...`` header."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if parts[0].lower() in ("omega", "w"):
                continue
            rows.append((float(parts[0]), float(parts[1])))
    if len(rows) < 2:
        raise DomainError("tabulated spectral density CSV needs >= 2 rows")
    arr = np.asarray(rows, dtype=float)
    return SpectralDensity.tabulated(arr[:, 0], arr[:, 1])
