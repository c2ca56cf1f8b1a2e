"""Bessel functions of order 0 and 1 and the Hankel function H_0^(1).

Three regimes are used, all vectorised over the argument:

* ``x <= 8``: ascending power series (40 terms).
* ``8 < x <= 16``: Miller backward recurrence, normalised with
  ``J_0 + 2 sum J_2k = 1``; Y_0 and Y_1 follow from the Neumann series.
* ``x > 16``: Hankel asymptotic expansion, truncated at its smallest term.

The asymptotic expansion only reaches ~1e-8 at x = 8, which is why the middle
band exists.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061

SERIES_MAX = 8.0
MILLER_MAX = 16.0

_SERIES_TERMS = 40
_ASYMPTOTIC_TERMS = 40


def _series(x):
    t = 0.25 * x * x
    lg = np.log(0.5 * x) + EULER_GAMMA
    j0 = np.zeros_like(x)
    j1s = np.zeros_like(x)
    y0s = np.zeros_like(x)
    y1s = np.zeros_like(x)
    term0 = np.ones_like(x)  # t^k / (k!)^2
    term1 = np.ones_like(x)  # t^k / (k! (k+1)!)
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        sign = -1.0 if k % 2 else 1.0
        if k > 0:
            term0 = term0 * t / (k * k)
            term1 = term1 * t / (k * (k + 1))
            harmonic += 1.0 / k
        j0 += sign * term0
        j1s += sign * term1
        if k > 0:
            y0s -= sign * harmonic * term0
        y1s += sign * (2.0 * harmonic + 1.0 / (k + 1)) * term1
    j1 = 0.5 * x * j1s
    y0 = (2.0 / np.pi) * (lg * j0 + y0s)
    y1 = -2.0 / (np.pi * x) + (2.0 / np.pi) * lg * j1 - (0.5 * x / np.pi) * y1s
    return j0, j1, y0, y1


def _miller(x):
    top = 2 * int(math.ceil((float(np.max(x)) + 40.0) / 2.0))
    b = np.zeros((top + 2,) + x.shape)
    b[top] = 1.0
    for n in range(top, 0, -1):
        b[n - 1] = (2.0 * n / x) * b[n] - b[n + 1]
    norm = b[0] + 2.0 * b[2:top + 1:2].sum(axis=0)
    jn = b / norm
    j0, j1 = jn[0], jn[1]
    lg = np.log(0.5 * x) + EULER_GAMMA
    ks = np.arange(1, top // 2)
    signs = np.where(ks % 2, -1.0, 1.0).reshape((-1,) + (1,) * x.ndim)
    kk = ks.reshape((-1,) + (1,) * x.ndim)
    y0 = (2.0 / np.pi) * lg * j0 - (4.0 / np.pi) * (signs * jn[2 * ks] / kk).sum(axis=0)
    diff = (jn[2 * ks - 1] - jn[2 * ks + 1]) / kk
    y1 = (-(2.0 / np.pi) * j0 / x + (2.0 / np.pi) * lg * j1
          + (2.0 / np.pi) * (signs * diff).sum(axis=0))
    return j0, j1, y0, y1


def _asymptotic(x, nu):
    mu = 4.0 * nu * nu
    total = np.ones(x.shape, dtype=complex)
    coef = np.ones_like(x)
    prev = np.full(x.shape, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _ASYMPTOTIC_TERMS):
        coef = coef * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        size = np.abs(coef)
        # stop each point before the divergent tail starts growing
        active &= size < prev
        total += np.where(active, (1j) ** k * coef, 0.0)
        prev = size
    phase = x - 0.5 * nu * np.pi - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * x)) * np.exp(1j * phase) * total


def bessel01(x):
    """Return ``(J0, J1, Y0, Y1)`` evaluated at positive ``x`` (array-like)."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("Bessel evaluation requires finite x > 0")
    out = [np.empty_like(x) for _ in range(4)]
    small = x <= SERIES_MAX
    mid = (x > SERIES_MAX) & (x <= MILLER_MAX)
    big = x > MILLER_MAX
    if small.any():
        for o, v in zip(out, _series(x[small])):
            o[small] = v
    if mid.any():
        for o, v in zip(out, _miller(x[mid])):
            o[mid] = v
    if big.any():
        h0 = _asymptotic(x[big], 0)
        h1 = _asymptotic(x[big], 1)
        out[0][big], out[2][big] = h0.real, h0.imag
        out[1][big], out[3][big] = h1.real, h1.imag
    return tuple(out)


def hankel1_0(x):
    """Hankel function of the first kind, order zero: ``J0(x) + i Y0(x)``.

    Accepts a scalar or an array of positive reals; scalars give a Python
    complex back.
    """
    scalar = np.ndim(x) == 0
    j0, _, y0, _ = bessel01(np.atleast_1d(x))
    h = j0 + 1j * y0
    return complex(h[0]) if scalar else h


def hankel1_1(x):
    """Hankel function of the first kind, order one: ``J1(x) + i Y1(x)``."""
    scalar = np.ndim(x) == 0
    _, j1, _, y1 = bessel01(np.atleast_1d(x))
    h = j1 + 1j * y1
    return complex(h[0]) if scalar else h
