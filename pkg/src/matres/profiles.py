"""Polynomial smoothstep transitions shared by weights, distortions and cutoffs.

``smoothstep(t, order=k)`` is the unique degree 2k+1 polynomial with
S(0)=0, S(1)=1 and k vanishing derivatives at both knots.  order=2 is the
quintic 6t^5-15t^4+10t^3 (C^2 across the knots), order=4 is the degree-9
variant (C^3 across the knots, needed for the distortion vector field).
"""

import math

import numpy as np

from .errors import ProfileNotSmooth

# coefficients of S and its antiderivative for the orders used here
_COEFFS = {
    1: [(3.0, 2), (-2.0, 3)],
    2: [(10.0, 3), (-15.0, 4), (6.0, 5)],
    4: [(126.0, 5), (-420.0, 6), (540.0, 7), (-315.0, 8), (70.0, 9)],
}

# derivatives continuous across the knots for each order
KNOT_SMOOTHNESS = {1: 1, 2: 2, 4: 4}


def _poly(t, terms):
    out = np.zeros_like(t)
    for c, p in terms:
        out = out + c * t**p
    return out


def smoothstep(t, order=2):
    """S(t) clamped to [0, 1] outside the transition."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    return _poly(tc, _COEFFS[order])


def smoothstep_d1(t, order=2):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.0)
    terms = [(c * p, p - 1) for c, p in _COEFFS[order]]
    return np.where(inside, _poly(tc, terms), 0.0)


def smoothstep_d2(t, order=2):
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    tc = np.where(inside, t, 0.0)
    terms = [(c * p * (p - 1), p - 2) for c, p in _COEFFS[order]]
    return np.where(inside, _poly(tc, terms), 0.0)


def smoothstep_antideriv(t, order=2):
    """Integral of S from 0 to t (t clamped above 1 continues linearly)."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    terms = [(c / (p + 1), p + 1) for c, p in _COEFFS[order]]
    base = _poly(tc, terms)
    return base + np.where(t > 1.0, t - 1.0, 0.0)


_PROFILE_ORDERS = {
    "quintic-smoothstep": 2,
    "nonic-smoothstep": 4,
}

# profiles recognised but rejected: too few continuous derivatives at the knots
_REJECTED_PROFILES = {"linear": 0, "cubic-smoothstep": 1}


def profile_order(name):
    """Map a profile family name to its smoothstep order.

    Raises ProfileNotSmooth for families that cannot supply three continuous
    derivatives of the integrated weight (phi needs phi''' continuous, hence
    the transition of phi' must be C^2 at the knots).
    """
    if name in _PROFILE_ORDERS:
        return _PROFILE_ORDERS[name]
    if name in _REJECTED_PROFILES:
        raise ProfileNotSmooth(
            f"profile {name!r} is C^{_REJECTED_PROFILES[name]} at the knots; "
            "need at least C^2 (try 'quintic-smoothstep')"
        )
    raise ProfileNotSmooth(f"unknown transition profile {name!r}")


def bump_cutoff(t):
    """psi with psi=1 for t<=1, 0 for t>=2, quintic transition in between."""
    return 1.0 - smoothstep(np.asarray(t, dtype=float) - 1.0, order=2)


def clamp_angle(theta, c0):
    """Largest admissible scaling angle for an analyticity cone slope c0."""
    return min(math.atan(c0), 0.7) if math.isfinite(c0) else 0.7


__all__ = [
    "smoothstep",
    "smoothstep_d1",
    "smoothstep_d2",
    "smoothstep_antideriv",
    "profile_order",
    "bump_cutoff",
    "clamp_angle",
    "KNOT_SMOOTHNESS",
]
