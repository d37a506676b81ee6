"""Circular (mod 2*pi) angle helpers shared by all modules."""

import math

TAU = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Map an angle to the canonical range [0, 2*pi)."""
    r = theta % TAU
    # A tiny negative input can round up to exactly TAU.
    if r >= TAU:
        r = 0.0
    return r


def circular_distance(a: float, b: float) -> float:
    """Shortest angular distance between two angles, in [0, pi]."""
    d = abs(a - b) % TAU
    return min(d, TAU - d)
