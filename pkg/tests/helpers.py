"""Shared test utilities: hypothesis strategies and independent oracles."""

import math

import numpy as np
from hypothesis import strategies as st


def _spherical(cos_polar, azimuth):
    s = math.sqrt(max(0.0, 1.0 - cos_polar * cos_polar))
    return np.array([s * math.cos(azimuth), s * math.sin(azimuth), cos_polar])


unit_vectors = st.builds(
    _spherical, st.floats(-1.0, 1.0), st.floats(0.0, 2.0 * math.pi)
)

angles = st.floats(-math.pi, math.pi)


def hat(w):
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def expm_series(m, terms=40):
    """Plain truncated matrix-exponential series, independent of Rodrigues."""
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def random_rotation(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-math.pi, math.pi)
    return expm_series(hat(axis) * angle)


def line_scan_multiplicity(v, p, q, delta, n=20001):
    """
    Count line-sphere intersections by densely sampling the point-to-line
    distance. The sampled minimum overshoots the true one by at most half
    a grid step, so draws within that margin of tangency are reported as
    unclassifiable (None) instead of being guessed.
    """
    u = q - p
    center = float(u @ v)
    half_width = delta + float(np.linalg.norm(u)) + 1.0
    grid = center + np.linspace(-half_width, half_width, n)
    dist = np.sqrt(((u[None, :] - grid[:, None] * v[None, :]) ** 2).sum(axis=1))
    dmin = float(dist.min())
    margin = 2.0 * (2.0 * half_width / (n - 1))
    if abs(delta - dmin) < margin:
        return None
    return 2 if delta > dmin else 0
