"""Codebook training sweep and closed-form estimation from noisy RSSI feedback.

During training the transmitter sends one beam per codebook entry and each
receiver feeds back the observed energy.  With equally spaced codebook
phases the least-squares fit of a cosine to those observations has a closed
form: the phase comes from a two-argument arctangent of the first-harmonic
sums, the offset is the sample mean, and the gain is the matched cosine
projection.  At zero noise all three are exact for any codebook size >= 3.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import TAU, normalize_angle
from .channel import RssiParams


class PhaseUnobservableError(ValueError):
    """Raised when a trace carries no angular information (zero gain, no noise)."""


@dataclass(frozen=True)
class Codebook:
    """Equally spaced training beam phases 2*(j-1)*pi/n for j = 1..n."""

    n: int
    angles: tuple[float, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"codebook size must be at least 3, got {self.n}")
        if len(self.angles) != self.n:
            raise ValueError("angles length must equal n")


def make_codebook(n: int) -> Codebook:
    """Build the codebook of n equally spaced phases starting at 0.

    Sizes below 3 are rejected: the closed-form estimators rely on the
    second-harmonic sums over the codebook vanishing, which fails at n = 2.
    """
    n = int(n)
    if n < 3:
        raise ValueError(f"codebook size must be at least 3, got {n}")
    return Codebook(n=n, angles=tuple(TAU * j / n for j in range(n)))


@dataclass(frozen=True)
class RssiTrace:
    """One receiver's feedback for a full codebook sweep.

    Values may be negative when noise_std > 0; they are deliberately not
    clamped at zero, since the estimators assume additive Gaussian noise and
    clamping would bias them.
    """

    codebook: Codebook
    values: tuple[float, ...]
    noise_std: float

    def __post_init__(self):
        if len(self.values) != self.codebook.n:
            raise ValueError("trace length must match codebook size")
        if not math.isfinite(self.noise_std) or self.noise_std < 0.0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std!r}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("trace values must be finite")


@dataclass(frozen=True)
class EstimateSet:
    """The seven quantities the transmitter can recover from RSSI feedback.

    Per receiver: phase phi, single-beam offset alpha_prime and gain
    gamma_prime.  For the pair: the phase phi_t of the summed response.
    The two-beam cross coefficient beta is not observable from single-beam
    training and is intentionally absent.
    """

    phi_hat_1: float
    phi_hat_2: float
    phi_hat_t: float
    alpha_prime_hat_1: float
    alpha_prime_hat_2: float
    gamma_prime_hat_1: float
    gamma_prime_hat_2: float

    def __post_init__(self):
        for name in ("phi_hat_1", "phi_hat_2", "phi_hat_t"):
            object.__setattr__(self, name, normalize_angle(float(getattr(self, name))))
        if self.gamma_prime_hat_1 < 0.0 or self.gamma_prime_hat_2 < 0.0:
            raise ValueError("gamma_prime estimates must be >= 0")


def simulate_training(
    p: RssiParams, cb: Codebook, sigma: float, rng: np.random.Generator
) -> RssiTrace:
    """Sweep the codebook and return the noisy feedback trace.

    values[j] = alpha_prime + gamma_prime*cos(angle_j + phi) + z_j with z_j
    i.i.d. Gaussian(0, sigma^2).  The standard normals are drawn even when
    sigma == 0 so a seeded generator advances identically for any sigma.
    """
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma!r}")
    angles = np.asarray(cb.angles)
    clean = p.alpha_prime + p.gamma_prime * np.cos(angles + p.phi)
    noise = sigma * rng.standard_normal(cb.n)
    values = tuple(float(v) for v in clean + noise)
    return RssiTrace(codebook=cb, values=values, noise_std=sigma)


def _harmonic_sums(trace: RssiTrace) -> tuple[float, float]:
    angles = np.asarray(trace.codebook.angles)
    values = np.asarray(trace.values)
    s_sin = float(np.dot(values, np.sin(angles)))
    s_cos = float(np.dot(values, np.cos(angles)))
    return s_sin, s_cos


def estimate_phi(trace: RssiTrace) -> float:
    """Estimate the response phase from one trace.

    Uses atan2(-sum(R*sin), sum(R*cos)), which resolves the quadrant
    directly from the two signs.  A constant trace carries no phase
    information and raises PhaseUnobservableError.
    """
    s_sin, s_cos = _harmonic_sums(trace)
    scale = float(np.sum(np.abs(np.asarray(trace.values))))
    if math.hypot(s_sin, s_cos) <= 1e-12 * max(scale, 1.0):
        raise PhaseUnobservableError(
            "trace is constant to rounding; phase is unobservable"
        )
    return normalize_angle(math.atan2(-s_sin, s_cos))


def estimate_alpha_prime(trace: RssiTrace) -> float:
    """Estimate the single-beam offset: the sample mean of the trace."""
    return float(np.mean(np.asarray(trace.values)))


def estimate_gamma_prime(trace: RssiTrace, phi_hat: float) -> tuple[float, float]:
    """Estimate the single-beam gain given an already-estimated phase.

    Returns (gamma_prime_hat, phi_hat).  The raw projection
    (2/N)*sum(R*cos(angle + phi_hat)) can come out negative when phi_hat is
    off by pi; in that case the sign is folded into the phase (negate the
    gain, advance the phase by pi) so the returned gain is always >= 0 and
    the fitted curve is unchanged.
    """
    angles = np.asarray(trace.codebook.angles)
    values = np.asarray(trace.values)
    raw = 2.0 / trace.codebook.n * float(np.dot(values, np.cos(angles + phi_hat)))
    if raw < 0.0:
        return -raw, normalize_angle(phi_hat + math.pi)
    return raw, normalize_angle(phi_hat)


def _fit_trace(trace: RssiTrace) -> tuple[float, float, float]:
    """Fit (phi, alpha_prime, gamma_prime) to one trace, tolerating flat traces.

    A phase-unobservable trace gets phi = 0 and whatever gain the projection
    yields (zero up to rounding for a genuinely constant trace).
    """
    try:
        phi = estimate_phi(trace)
    except PhaseUnobservableError:
        phi = 0.0
    alpha = estimate_alpha_prime(trace)
    gamma, phi = estimate_gamma_prime(trace, phi)
    return phi, alpha, gamma


def estimate_all(trace1: RssiTrace, trace2: RssiTrace) -> EstimateSet:
    """Estimate the full seven-parameter set from both receivers' traces.

    The pair phase is estimated from the element-wise summed trace, not by
    combining the per-receiver fits.  Both traces must use the same codebook.
    """
    if trace1.codebook.n != trace2.codebook.n:
        raise ValueError(
            f"codebook mismatch: {trace1.codebook.n} vs {trace2.codebook.n}"
        )
    phi1, alpha1, gamma1 = _fit_trace(trace1)
    phi2, alpha2, gamma2 = _fit_trace(trace2)
    summed = RssiTrace(
        codebook=trace1.codebook,
        values=tuple(a + b for a, b in zip(trace1.values, trace2.values)),
        noise_std=math.hypot(trace1.noise_std, trace2.noise_std),
    )
    phi_t, _, _ = _fit_trace(summed)
    return EstimateSet(
        phi_hat_1=phi1,
        phi_hat_2=phi2,
        phi_hat_t=phi_t,
        alpha_prime_hat_1=alpha1,
        alpha_prime_hat_2=alpha2,
        gamma_prime_hat_1=gamma1,
        gamma_prime_hat_2=gamma2,
    )
