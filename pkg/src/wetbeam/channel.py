"""Two-antenna MISO channel model and exact (noiseless) RSSI evaluation.

The transmitter splits power P equally across two antennas and controls only
the per-beam phases.  For a receiver whose channel has amplitudes (a1, a2)
and phases (delta1, delta2), the received energy is a cosine response in the
beam phases.  This module derives the response coefficients for one receiver,
combines two receivers into a single equivalent response, and evaluates the
exact RSSI for one or two beams.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import TAU, normalize_angle

_REL_TOL = 1e-9
_ABS_TOL = 1e-12


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ChannelVector:
    """Amplitudes and phases of the 2x1 channel to a single receiver.

    Phases are normalized to [0, 2*pi) on construction; amplitudes are
    linear-scale and nonnegative.
    """

    a1: float
    delta1: float
    a2: float
    delta2: float

    def __post_init__(self):
        for name in ("a1", "a2"):
            v = float(getattr(self, name))
            _require_finite(name, v)
            if v < 0.0:
                raise ValueError(f"{name} must be >= 0, got {v!r}")
            object.__setattr__(self, name, v)
        for name in ("delta1", "delta2"):
            v = float(getattr(self, name))
            _require_finite(name, v)
            object.__setattr__(self, name, normalize_angle(v))


@dataclass(frozen=True)
class RssiParams:
    """Derived cosine-response coefficients for one receiver.

    ``alpha + beta*cos(th1-th2) + gamma*(cos(th1+phi) + cos(th2+phi))`` is the
    two-beam RSSI; ``alpha_prime + gamma_prime*cos(th + phi)`` is the
    single-beam restriction, with alpha_prime = alpha + beta and
    gamma_prime = 2*gamma.  ``power`` is the transmit sum-power the
    coefficients were derived with.
    """

    alpha: float
    beta: float
    gamma: float
    phi: float
    alpha_prime: float
    gamma_prime: float
    power: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "alpha_prime", "gamma_prime", "power"):
            _require_finite(name, float(getattr(self, name)))
        if self.power <= 0.0:
            raise ValueError(f"power must be > 0, got {self.power!r}")
        if not (self.alpha >= self.beta >= 0.0):
            raise ValueError("requires alpha >= beta >= 0")
        if self.gamma < 0.0:
            raise ValueError("gamma must be >= 0")
        if not math.isclose(
            self.alpha_prime, self.alpha + self.beta, rel_tol=_REL_TOL, abs_tol=_ABS_TOL
        ):
            raise ValueError("alpha_prime must equal alpha + beta")
        if not math.isclose(
            self.gamma_prime, 2.0 * self.gamma, rel_tol=_REL_TOL, abs_tol=_ABS_TOL
        ):
            raise ValueError("gamma_prime must equal 2*gamma")
        if self.alpha_prime < self.gamma_prime - _ABS_TOL * max(1.0, self.alpha_prime):
            raise ValueError("requires alpha_prime >= gamma_prime")
        object.__setattr__(self, "phi", normalize_angle(float(self.phi)))

    @classmethod
    def from_coefficients(
        cls, alpha: float, beta: float, gamma: float, phi: float, power: float = 1.0
    ) -> "RssiParams":
        """Build params from the base coefficients, filling the derived fields."""
        return cls(
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            phi=phi,
            alpha_prime=alpha + beta,
            gamma_prime=2.0 * gamma,
            power=power,
        )


@dataclass(frozen=True)
class CombinedParams:
    """Pair-level cosine-response coefficients for the summed RSSI of two receivers."""

    alpha_t: float
    beta_t: float
    gamma_t: float
    phi_t: float
    k1: float
    k2: float

    def __post_init__(self):
        for name in ("alpha_t", "beta_t", "gamma_t", "k1", "k2"):
            _require_finite(name, float(getattr(self, name)))
        if not math.isclose(
            self.gamma_t, math.hypot(self.k1, self.k2), rel_tol=_REL_TOL, abs_tol=_ABS_TOL
        ):
            raise ValueError("gamma_t must equal hypot(k1, k2)")
        object.__setattr__(self, "phi_t", normalize_angle(float(self.phi_t)))


def derive_params(ch: ChannelVector, power: float) -> RssiParams:
    """Derive the RSSI response coefficients of one receiver.

    alpha = (P/8)(4*a1^2 + a2^2), beta = (P/8)*a2^2, gamma = (P/4)*a1*a2 and
    phi = (delta2 - delta1) mod 2*pi; the single-beam fields follow.
    """
    power = float(power)
    _require_finite("power", power)
    if power <= 0.0:
        raise ValueError(f"power must be > 0, got {power!r}")
    alpha = (power / 8.0) * (4.0 * ch.a1 * ch.a1 + ch.a2 * ch.a2)
    beta = (power / 8.0) * (ch.a2 * ch.a2)
    gamma = (power / 4.0) * ch.a1 * ch.a2
    phi = normalize_angle(ch.delta2 - ch.delta1)
    return RssiParams.from_coefficients(alpha, beta, gamma, phi, power)


def rssi_two_beam(p: RssiParams, theta1: float, theta2: float) -> float:
    """Exact RSSI at one receiver when two beams with phases theta1, theta2 are sent."""
    return (
        p.alpha
        + p.beta * math.cos(theta1 - theta2)
        + p.gamma * (math.cos(theta1 + p.phi) + math.cos(theta2 + p.phi))
    )


def rssi_single_beam(p: RssiParams, theta: float) -> float:
    """Exact RSSI at one receiver for a single beam with phase theta."""
    return p.alpha_prime + p.gamma_prime * math.cos(theta + p.phi)


def combine_pair(p1: RssiParams, p2: RssiParams) -> CombinedParams:
    """Combine two receivers' coefficients into the summed-RSSI response.

    The two gain phasors gamma_i * exp(j*phi_i) add; the sum's magnitude and
    angle give gamma_t and phi_t.  Both inputs must share the same transmit
    power.
    """
    if p1.power != p2.power:
        raise ValueError(
            f"params derived with different powers: {p1.power!r} vs {p2.power!r}"
        )
    k1 = p1.gamma * math.cos(p1.phi) + p2.gamma * math.cos(p2.phi)
    k2 = p1.gamma * math.sin(p1.phi) + p2.gamma * math.sin(p2.phi)
    gamma_t = math.hypot(k1, k2)
    phi_t = normalize_angle(math.atan2(k2, k1)) if gamma_t > 0.0 else 0.0
    return CombinedParams(
        alpha_t=p1.alpha + p2.alpha,
        beta_t=p1.beta + p2.beta,
        gamma_t=gamma_t,
        phi_t=phi_t,
        k1=k1,
        k2=k2,
    )


def sample_channel(
    rng: np.random.Generator, amp_range: tuple[float, float] = (0.1, 1.0)
) -> ChannelVector:
    """Draw a random channel: amplitudes uniform on amp_range, phases uniform on [0, 2*pi).

    Draw order is fixed (a1, a2, delta1, delta2) so a seeded generator
    reproduces the same vector.  A degenerate range with low == high is
    allowed and yields that amplitude deterministically.
    """
    low, high = float(amp_range[0]), float(amp_range[1])
    if not (math.isfinite(low) and math.isfinite(high)) or low < 0.0 or low > high:
        raise ValueError(f"invalid amplitude range: {amp_range!r}")
    a1 = float(rng.uniform(low, high))
    a2 = float(rng.uniform(low, high))
    d1 = float(rng.uniform(0.0, TAU))
    d2 = float(rng.uniform(0.0, TAU))
    return ChannelVector(a1=a1, delta1=d1, a2=a2, delta2=d2)


def rssi_quadratic_form(
    ch: ChannelVector, power: float, theta1: float, theta2: float
) -> float:
    """RSSI evaluated directly from the transmit covariance, via complex arithmetic.

    Independent cross-check path: computes |h . x|^2 for the superposed
    equal-gain beams without going through the derived cosine coefficients.
    It differs from the coefficient form by a fixed affine map, so only the
    location of maxima should be compared between the two.
    """
    if power <= 0.0:
        raise ValueError(f"power must be > 0, got {power!r}")
    h1 = ch.a1 * complex(math.cos(ch.delta1), math.sin(ch.delta1))
    h2 = ch.a2 * complex(math.cos(ch.delta2), math.sin(ch.delta2))
    b_sum_1 = math.sqrt(0.5) * 2.0
    b_sum_2 = math.sqrt(0.5) * (
        complex(math.cos(theta1), math.sin(theta1))
        + complex(math.cos(theta2), math.sin(theta2))
    )
    amplitude = h1 * b_sum_1 + h2 * b_sum_2
    return (power / 4.0) * (amplitude.real**2 + amplitude.imag**2)
