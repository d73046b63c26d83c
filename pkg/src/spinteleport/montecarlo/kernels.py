"""Hot loops of the trajectory simulation.

Time is measured in units of 1/gamma0 (every output moment is independent of
gamma0 once written in shot-noise units).  Per step ``k`` of width ``dt``:

* eight white-noise samples with variance 1/dt: vacuum-field and atomic noise
  on the amplitude and phase quadratures of cavities 1 and 2;
* each cavity's outgoing quadrature is
  ``c_fd*xi + c_fc*F + c_ad*v + c_ac*Fv - eta*sqrt(2)*x_i*e^{-t}``, where
  ``F``/``Fv`` are the exponential convolutions of the noises;
* X_- = (X_1 - X_2)/sqrt(2) and Y_+ = (Y_1 + Y_2)/sqrt(2) drive spin 3
  through ``d x3 = K e^{-t} X_- dt`` with ``K = -2 g / eta``.

The deterministic exponentials are integrated exactly over each step
(``w[k]`` for ``e^{-t}``, ``sw[k]`` for the signal's ``e^{-2t}``); the
convolution accumulators use the exponential Euler update
``F <- e^{-dt} F + (1 - e^{-dt}) xi``.

Output rows: x0, y0, x1, y1, x2, y2, x3, y3 (initial samples) followed by
x3_out, y3_out.
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import njit, prange
from .rng import normal_pair, normal_pair_array, trajectory_key, trajectory_keys

N_INIT = 8
N_COLS = 10
INIT_PAIRS = 4
NOISE_PAIRS = 4
SQRT_HALF = math.sqrt(0.5)


def step_weights(dt: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-step integrals of e^{-t} and e^{-2t}."""
    t = np.arange(n_steps) * dt
    w = np.exp(-t) * -np.expm1(-dt)
    sw = np.exp(-2.0 * t) * (-np.expm1(-2.0 * dt)) * 0.5
    return w, sw


@njit(parallel=True, cache=True)
def _run_numba(seed, start, n, means, factor, w, sw, dt, coefs, K, eta, noise):
    out = np.empty((n, N_COLS))
    n_steps = w.shape[0]
    decay = math.exp(-dt)
    a = -math.expm1(-dt)
    amp = 1.0 / math.sqrt(dt) if noise else 0.0
    cfd, cfc, cad, cac = coefs[0], coefs[1], coefs[2], coefs[3]
    # alpha*Jx(0) = eta*sqrt(2)*x in shot-noise units, divided by sqrt(2) at the beamsplitter
    sig = -eta
    for j in prange(n):
        key = trajectory_key(np.uint64(seed), np.uint64(start + j))
        z = np.empty(N_INIT)
        for p in range(INIT_PAIRS):
            z0, z1 = normal_pair(key, np.uint64(p))
            z[2 * p] = z0
            z[2 * p + 1] = z1
        s = np.empty(N_INIT)
        for r in range(N_INIT):
            acc = means[r]
            for c in range(N_INIT):
                acc += factor[r, c] * z[c]
            s[r] = acc
            out[j, r] = acc
        sx = sig * (s[2] - s[4])
        sy = sig * (s[3] + s[5])
        x3 = s[6]
        y3 = s[7]
        # convolution accumulators: vacuum x1, x2, atomic x1, x2, then y
        fx1 = 0.0
        fx2 = 0.0
        gx1 = 0.0
        gx2 = 0.0
        fy1 = 0.0
        fy2 = 0.0
        gy1 = 0.0
        gy2 = 0.0
        for k in range(n_steps):
            base = INIT_PAIRS + NOISE_PAIRS * k
            a0, a1 = normal_pair(key, np.uint64(base))
            b0, b1 = normal_pair(key, np.uint64(base + 1))
            c0, c1 = normal_pair(key, np.uint64(base + 2))
            d0, d1 = normal_pair(key, np.uint64(base + 3))
            ex1 = a0 * amp
            ex2 = a1 * amp
            vx1 = b0 * amp
            vx2 = b1 * amp
            ey1 = c0 * amp
            ey2 = c1 * amp
            vy1 = d0 * amp
            vy2 = d1 * amp
            ox1 = cfd * ex1 + cfc * fx1 + cad * vx1 + cac * gx1
            ox2 = cfd * ex2 + cfc * fx2 + cad * vx2 + cac * gx2
            oy1 = cfd * ey1 + cfc * fy1 + cad * vy1 + cac * gy1
            oy2 = cfd * ey2 + cfc * fy2 + cad * vy2 + cac * gy2
            xm = (ox1 - ox2) * SQRT_HALF
            yp = (oy1 + oy2) * SQRT_HALF
            x3 += K * (w[k] * xm + sw[k] * sx)
            y3 += K * (w[k] * yp + sw[k] * sy)
            fx1 = decay * fx1 + a * ex1
            fx2 = decay * fx2 + a * ex2
            gx1 = decay * gx1 + a * vx1
            gx2 = decay * gx2 + a * vx2
            fy1 = decay * fy1 + a * ey1
            fy2 = decay * fy2 + a * ey2
            gy1 = decay * gy1 + a * vy1
            gy2 = decay * gy2 + a * vy2
        out[j, 8] = x3
        out[j, 9] = y3
    return out


def _run_numpy(seed, start, n, means, factor, w, sw, dt, coefs, K, eta, noise, chunk=4096):
    out = np.empty((n, N_COLS))
    decay = math.exp(-dt)
    a = -math.expm1(-dt)
    amp = 1.0 / math.sqrt(dt) if noise else 0.0
    cfd, cfc, cad, cac = (float(c) for c in coefs)
    sig = -eta
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        keys = trajectory_keys(seed, np.arange(start + lo, start + hi))
        z = np.empty((hi - lo, N_INIT))
        for p in range(INIT_PAIRS):
            z[:, 2 * p], z[:, 2 * p + 1] = normal_pair_array(keys, p)
        s = np.empty_like(z)
        for r in range(N_INIT):
            acc = np.full(hi - lo, means[r])
            for c in range(N_INIT):
                acc = acc + factor[r, c] * z[:, c]
            s[:, r] = acc
        out[lo:hi, :N_INIT] = s
        sx = sig * (s[:, 2] - s[:, 4])
        sy = sig * (s[:, 3] + s[:, 5])
        x3 = s[:, 6].copy()
        y3 = s[:, 7].copy()
        acc = np.zeros((8, hi - lo))
        for k in range(len(w)):
            base = INIT_PAIRS + NOISE_PAIRS * k
            e = np.empty((8, hi - lo))
            for q in range(NOISE_PAIRS):
                e[2 * q], e[2 * q + 1] = normal_pair_array(keys, base + q)
            e *= amp
            # rows of e/acc: ex1, ex2, vx1, vx2, ey1, ey2, vy1, vy2
            o = np.stack([cfd * e[i] + cfc * acc[i] + cad * e[i + 2] + cac * acc[i + 2]
                          for i in (0, 1, 4, 5)])
            xm = (o[0] - o[1]) * SQRT_HALF
            yp = (o[2] + o[3]) * SQRT_HALF
            x3 += K * (w[k] * xm + sw[k] * sx)
            y3 += K * (w[k] * yp + sw[k] * sy)
            acc = decay * acc + a * e
        out[lo:hi, 8] = x3
        out[lo:hi, 9] = y3
    return out


def run_block(backend, seed, start, n, means, factor, w, sw, dt, coefs, K, eta, noise):
    """Simulate trajectories ``start .. start+n-1``; returns an (n, 10) array."""
    args = (int(seed), int(start), int(n), np.ascontiguousarray(means, dtype=np.float64),
            np.ascontiguousarray(factor, dtype=np.float64), w, sw, float(dt),
            np.asarray(coefs, dtype=np.float64), float(K), float(eta), bool(noise))
    if backend == "numba":
        from ._jit import HAVE_NUMBA

        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        return _run_numba(*args)
    if backend == "numpy":
        return _run_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
