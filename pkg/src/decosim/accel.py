"""Paired numba / pure-numpy implementations of the hot inner loops.

The numba path is the default.  Setting the environment variable
``DECOSIM_DISABLE_NUMBA=1`` (before import) selects the pure-numpy
fallbacks, which produce the same numbers more slowly.  The benchmark
script ``benchmarks/bench_accel.py`` times both paths side by side.

Only loop-dominated kernels live here (Volterra integro-differential
steppers, tangent-map integration).  FFT- and BLAS-bound stages elsewhere
in the package gain nothing from numba and stay plain numpy.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "DECOSIM_DISABLE_NUMBA"

USE_NUMBA = os.environ.get(DISABLE_ENV, "") not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# ---------------------------------------------------------------------------
# Drude-kernel u-function IVP (exact ODE embedding of the memory integral)
#
# u'' + Omega^2 u + (2/M) w = 0,   w(s) = int_0^s eta(s-s') u(s') ds'
# For eta(t) = eta0 * exp(-lam t) the memory obeys w' = eta0 u - lam w,
# so the integro-differential equation closes into a local 3-state ODE.
# ---------------------------------------------------------------------------

def _drude_u_ivp_py(omega_sq, eta0, lam, two_over_m, h, n_steps):
    u = np.empty((2, n_steps + 1))
    v = np.empty((2, n_steps + 1))
    w = np.empty((2, n_steps + 1))
    u[0, 0], v[0, 0] = 1.0, 0.0
    u[1, 0], v[1, 0] = 0.0, 1.0
    w[:, 0] = 0.0
    for i in range(2):
        ui, vi, wi = u[i, 0], v[i, 0], w[i, 0]
        for n in range(n_steps):
            k1u = vi
            k1v = -omega_sq * ui - two_over_m * wi
            k1w = eta0 * ui - lam * wi

            u2_ = ui + 0.5 * h * k1u
            v2_ = vi + 0.5 * h * k1v
            w2_ = wi + 0.5 * h * k1w
            k2u = v2_
            k2v = -omega_sq * u2_ - two_over_m * w2_
            k2w = eta0 * u2_ - lam * w2_

            u3_ = ui + 0.5 * h * k2u
            v3_ = vi + 0.5 * h * k2v
            w3_ = wi + 0.5 * h * k2w
            k3u = v3_
            k3v = -omega_sq * u3_ - two_over_m * w3_
            k3w = eta0 * u3_ - lam * w3_

            u4_ = ui + h * k3u
            v4_ = vi + h * k3v
            w4_ = wi + h * k3w
            k4u = v4_
            k4v = -omega_sq * u4_ - two_over_m * w4_
            k4w = eta0 * u4_ - lam * w4_

            ui += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
            vi += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
            wi += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
            u[i, n + 1], v[i, n + 1], w[i, n + 1] = ui, vi, wi
    return u, v, w


# ---------------------------------------------------------------------------
# General (tabulated) memory kernel: central-difference Volterra stepper.
#
# u_{n+1} = 2 u_n - u_{n-1} + h^2 (-Omega^2 u_n - (2/M) I_n),
# I_n = trapezoid_{j<=n} eta[(n-j) h] u_j.   O(n^2) history cost.
# ---------------------------------------------------------------------------

def _volterra_u_ivp_py(eta_vals, omega_sq, two_over_m, h, n_steps):
    u = np.empty((2, n_steps + 1))
    v0 = (0.0, 1.0)
    eta0 = eta_vals[0]
    for i in range(2):
        u0 = 1.0 if i == 0 else 0.0
        vi = v0[i]
        acc0 = -omega_sq * u0
        jerk0 = -omega_sq * vi - two_over_m * eta0 * u0
        u[i, 0] = u0
        u[i, 1] = u0 + h * vi + 0.5 * h * h * acc0 + h ** 3 / 6.0 * jerk0
        for n in range(1, n_steps):
            mem = 0.5 * (eta_vals[n] * u[i, 0] + eta0 * u[i, n])
            mem += np.dot(eta_vals[n - 1:0:-1], u[i, 1:n])
            mem *= h
            acc = -omega_sq * u[i, n] - two_over_m * mem
            u[i, n + 1] = 2.0 * u[i, n] - u[i, n - 1] + h * h * acc
    return u


def _volterra_u_ivp_loops(eta_vals, omega_sq, two_over_m, h, n_steps):
    # identical math with explicit loops; this is the njit target
    u = np.empty((2, n_steps + 1))
    eta0 = eta_vals[0]
    for i in range(2):
        u0 = 1.0 if i == 0 else 0.0
        vi = 0.0 if i == 0 else 1.0
        acc0 = -omega_sq * u0
        jerk0 = -omega_sq * vi - two_over_m * eta0 * u0
        u[i, 0] = u0
        u[i, 1] = u0 + h * vi + 0.5 * h * h * acc0 + h ** 3 / 6.0 * jerk0
        for n in range(1, n_steps):
            mem = 0.5 * (eta_vals[n] * u[i, 0] + eta0 * u[i, n])
            for j in range(1, n):
                mem += eta_vals[n - j] * u[i, j]
            mem *= h
            acc = -omega_sq * u[i, n] - two_over_m * mem
            u[i, n + 1] = 2.0 * u[i, n] - u[i, n - 1] + h * h * acc
    return u


# ---------------------------------------------------------------------------
# Classical tangent-map integrator for the driven double well.
#
# V(x, t) = -a x^2/2 + b x^4/4 + f x cos(w t);  mass 1.
# Integrates (x, p) and the tangent vector (dx, dp), renormalizing the
# tangent every `renorm_every` steps and recording the log growth factors.
# ---------------------------------------------------------------------------

def _tangent_map_py(a, b, f, w, x0, p0, dt, n_steps, renorm_every):
    n_seg = n_steps // renorm_every
    logs = np.empty(n_seg)
    x, p = x0, p0
    dx, dp = 1.0, 0.0
    t = 0.0
    seg = 0
    for n in range(n_seg * renorm_every):
        # RK4 on the joint 4-state system (non-autonomous drive)
        k1x = p
        k1p = a * x - b * x ** 3 - f * np.cos(w * t)
        k1dx = dp
        k1dp = (a - 3.0 * b * x ** 2) * dx

        xh = x + 0.5 * dt * k1x
        ph = p + 0.5 * dt * k1p
        dxh = dx + 0.5 * dt * k1dx
        dph = dp + 0.5 * dt * k1dp
        th = t + 0.5 * dt
        k2x = ph
        k2p = a * xh - b * xh ** 3 - f * np.cos(w * th)
        k2dx = dph
        k2dp = (a - 3.0 * b * xh ** 2) * dxh

        xh = x + 0.5 * dt * k2x
        ph = p + 0.5 * dt * k2p
        dxh = dx + 0.5 * dt * k2dx
        dph = dp + 0.5 * dt * k2dp
        k3x = ph
        k3p = a * xh - b * xh ** 3 - f * np.cos(w * th)
        k3dx = dph
        k3dp = (a - 3.0 * b * xh ** 2) * dxh

        xh = x + dt * k3x
        ph = p + dt * k3p
        dxh = dx + dt * k3dx
        dph = dp + dt * k3dp
        tf = t + dt
        k4x = ph
        k4p = a * xh - b * xh ** 3 - f * np.cos(w * tf)
        k4dx = dph
        k4dp = (a - 3.0 * b * xh ** 2) * dxh

        x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        dx += dt / 6.0 * (k1dx + 2 * k2dx + 2 * k3dx + k4dx)
        dp += dt / 6.0 * (k1dp + 2 * k2dp + 2 * k3dp + k4dp)
        t = tf

        if (n + 1) % renorm_every == 0:
            norm = np.sqrt(dx * dx + dp * dp)
            logs[seg] = np.log(norm)
            seg += 1
            dx /= norm
            dp /= norm
    return logs


if USE_NUMBA:
    _jit = numba.njit(cache=True, fastmath=False)
    drude_u_ivp = _jit(_drude_u_ivp_py)
    volterra_u_ivp = _jit(_volterra_u_ivp_loops)
    tangent_map = _jit(_tangent_map_py)
else:
    drude_u_ivp = _drude_u_ivp_py
    volterra_u_ivp = _volterra_u_ivp_py
    tangent_map = _tangent_map_py

# always importable by the benchmark, whatever the env flag says
PY_IMPLS = {
    "drude_u_ivp": _drude_u_ivp_py,
    "volterra_u_ivp": _volterra_u_ivp_py,
    "tangent_map": _tangent_map_py,
}
