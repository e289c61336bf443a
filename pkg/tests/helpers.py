"""Independent oracles shared by unit and acceptance tests.

These deliberately re-derive results along different routes than the
package (dense linear solves, dot-product trigonometry) so agreement is
meaningful.
"""

import math

import numpy as np


def arccos_angle(a, b, c) -> float:
    """Included angle at b via the normalized dot product, in degrees."""
    bax, bay = a[0] - b[0], a[1] - b[1]
    bcx, bcy = c[0] - b[0], c[1] - b[1]
    na = math.hypot(bax, bay)
    nc = math.hypot(bcx, bcy)
    cos_v = (bax * bcx + bay * bcy) / (na * nc)
    return math.degrees(math.acos(min(1.0, max(-1.0, cos_v))))


def dense_natural_spline_m(x, y) -> np.ndarray:
    """Knot second derivatives via a dense solve of the full system.

    Builds the complete n x n natural-spline equations (boundary rows
    pin M[0] = M[n-1] = 0) and solves them with ``np.linalg.solve``,
    independent of any tridiagonal elimination.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    a = np.zeros((n, n))
    rhs = np.zeros(n)
    a[0, 0] = 1.0
    a[n - 1, n - 1] = 1.0
    h = np.diff(x)
    for i in range(1, n - 1):
        a[i, i - 1] = h[i - 1]
        a[i, i] = 2.0 * (h[i - 1] + h[i])
        a[i, i + 1] = h[i]
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1])
    return np.linalg.solve(a, rhs)


def _segment(spline, i, t):
    x, y, m = spline.x, spline.y, spline.m
    h = x[i + 1] - x[i]
    return x, y, m, h, x[i + 1] - t, t - x[i]


def spline_value_on_segment(spline, i, t) -> float:
    """S(t) evaluated with segment ``i``'s cubic (re-derivation)."""
    x, y, m, h, left, right = _segment(spline, i, t)
    return (m[i] * left ** 3 / (6 * h) + m[i + 1] * right ** 3 / (6 * h)
            + (y[i] / h - m[i] * h / 6) * left
            + (y[i + 1] / h - m[i + 1] * h / 6) * right)


def spline_first_derivative(spline, i, t) -> float:
    x, y, m, h, left, right = _segment(spline, i, t)
    return (-m[i] * left ** 2 / (2 * h) + m[i + 1] * right ** 2 / (2 * h)
            - (y[i] / h - m[i] * h / 6) + (y[i + 1] / h - m[i + 1] * h / 6))


def spline_second_derivative(spline, i, t) -> float:
    x, _, m, h, left, right = _segment(spline, i, t)
    return m[i] * left / h + m[i + 1] * right / h


def random_knots(rng, n) -> list:
    """Strictly increasing x with well-separated spacing, bounded y."""
    gaps = rng.uniform(0.2, 2.0, size=n - 1)
    x = np.concatenate([[rng.uniform(-5, 5)], gaps]).cumsum()
    y = rng.uniform(-50.0, 50.0, size=n)
    return list(zip(x, y))
