"""Independent reference implementations used only by the tests.

Each oracle takes a different route from the library code: explicit loops
instead of vectorized algebra, and a high-precision power series for the
Bessel functions instead of the library's three-regime scheme.
"""

import math

import mpmath
import numpy as np


def matmul_loops(a, b):
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m), dtype=complex)
    for i in range(n):
        for j in range(m):
            s = 0j
            for t in range(k):
                s += a[i, t] * b[t, j]
            out[i, j] = s
    return out


def hankel1_0_series(x, dps=80):
    """``J0 + i Y0`` from the ascending series in ``dps``-digit arithmetic."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        q = (x / 2) ** 2
        term = mpmath.mpf(1)
        harmonic = mpmath.mpf(0)
        j0 = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        k = 0
        while True:
            j0 += term
            tail += harmonic * term
            k += 1
            term *= -q / (k * k)
            harmonic += mpmath.mpf(1) / k
            if k > 10 and abs(term) * (1 + harmonic) < mpmath.mpf(10) ** (-dps + 5):
                break
        y0 = 2 / mpmath.pi * ((mpmath.log(x / 2) + mpmath.euler) * j0 - tail)
        return complex(float(j0), float(y0))


def dirichlet_direct(n, x):
    return sum(complex(math.cos(k * x), math.sin(k * x)) for k in range(n))


def aoa_loops(positions, k, directions, amplitudes, times):
    out = np.zeros((len(times), len(positions)), dtype=complex)
    for l, t in enumerate(times):
        for m, (px, py) in enumerate(positions):
            s = 0j
            for (u, v), a in zip(directions, amplitudes):
                s += a * np.exp(-1j * t * u) * np.exp(-1j * k * (px * u + py * v))
            out[l, m] = s
    return out


def phi2d(x, z, k):
    r = math.hypot(x[0] - z[0], x[1] - z[1])
    return 0.25j * hankel1_0_series(k * r, dps=40)


def born_loops(points, scatterers, contrasts, k):
    n = len(points)
    phis = [[phi2d(p, z, k) for z in scatterers] for p in points]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            s = 0j
            for t, m in enumerate(contrasts):
                s += m * phis[i][t] * phis[j][t].conjugate()
            out[i, j] = -k * k * s
    return out


def quad_form_loops(mat, g):
    s = 0j
    for a in range(mat.shape[0]):
        for b in range(mat.shape[1]):
            s += g[a].conjugate() * mat[a, b] * g[b]
    return abs(s) ** 2


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# "criterion N: PASS/FAIL ..." lines collected by the acceptance tests
ACCEPTANCE_LINES = []
