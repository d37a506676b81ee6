"""Single-beam phase selection under per-receiver minimum-energy constraints.

Each receiver's constraint R_i(theta) >= rho_i carves an arc of admissible
beam phases out of the circle.  The optimizer intersects those arcs, places
the beam at the unconstrained peak -phi_t when that peak is admissible, and
otherwise at the best arc endpoint.  When the joint problem is infeasible
the transmit rule relaxes constraints one at a time: drop the smaller
requirement first, then the larger, then both.

Arcs are genuine circular sets (with explicit empty and full kinds), because
on the circle the intersection of two wide arcs can be two disjoint pieces;
the endpoint rule extends naturally to all endpoints of all pieces.
"""

import math
from dataclasses import dataclass
from enum import Enum

from .angles import TAU, circular_distance, normalize_angle
from .channel import CombinedParams
from .training import EstimateSet

# Slack for acos arguments just outside [-1, 1] due to rounding; keeps
# exact-boundary constraints from reading as infeasible.
_ACOS_SLACK = 1e-12


class ArcKind(Enum):
    EMPTY = "empty"
    FULL = "full"
    PROPER = "proper"


@dataclass(frozen=True)
class CircularArc:
    """A closed arc {theta : circular_distance(theta, center) <= half_width}.

    half_width == pi means the whole circle (kind FULL); kind EMPTY
    represents no points at all.  A half_width of 0 is a single point.
    """

    kind: ArcKind
    center: float
    half_width: float

    def __post_init__(self):
        object.__setattr__(self, "center", normalize_angle(float(self.center)))
        hw = float(self.half_width)
        if not math.isfinite(hw) or hw < 0.0 or hw > math.pi:
            raise ValueError(f"half_width must be in [0, pi], got {hw!r}")
        if (self.kind is ArcKind.FULL) != (hw == math.pi):
            raise ValueError("kind FULL if and only if half_width == pi")

    @classmethod
    def empty(cls) -> "CircularArc":
        return cls(kind=ArcKind.EMPTY, center=0.0, half_width=0.0)

    @classmethod
    def full(cls) -> "CircularArc":
        return cls(kind=ArcKind.FULL, center=0.0, half_width=math.pi)

    @classmethod
    def proper(cls, center: float, half_width: float) -> "CircularArc":
        """Arc from center and half-width; promotes to FULL at half_width == pi."""
        if half_width >= math.pi:
            return cls.full()
        return cls(kind=ArcKind.PROPER, center=center, half_width=half_width)

    @property
    def start(self) -> float:
        """Counterclockwise start endpoint (meaningful for proper arcs)."""
        return normalize_angle(self.center - self.half_width)

    @property
    def end(self) -> float:
        """Counterclockwise end endpoint (meaningful for proper arcs)."""
        return normalize_angle(self.center + self.half_width)

    def contains(self, theta: float) -> bool:
        if self.kind is ArcKind.EMPTY:
            return False
        if self.kind is ArcKind.FULL:
            return True
        return circular_distance(theta, self.center) <= self.half_width


@dataclass(frozen=True)
class ArcSet:
    """Up to two disjoint arcs, ordered by center angle."""

    arcs: tuple[CircularArc, ...]

    def __post_init__(self):
        if len(self.arcs) > 2:
            raise ValueError("an arc set holds at most two arcs")
        if any(a.kind is ArcKind.EMPTY for a in self.arcs):
            raise ValueError("empty arcs are represented by omission")
        object.__setattr__(
            self, "arcs", tuple(sorted(self.arcs, key=lambda a: a.center))
        )

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls(arcs=())

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    def contains(self, theta: float) -> bool:
        return any(a.contains(theta) for a in self.arcs)

    def endpoints(self) -> list[float]:
        """All distinct endpoints of the member arcs, ascending."""
        points: list[float] = []
        for a in self.arcs:
            if a.kind is ArcKind.FULL:
                continue
            points.append(a.start)
            if a.end != a.start:
                points.append(a.end)
        return sorted(set(points))


@dataclass(frozen=True)
class EnergyConstraints:
    """Per-receiver minimum harvested-energy requirements."""

    rho1: float
    rho2: float

    def __post_init__(self):
        for name in ("rho1", "rho2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


class DecisionLevel(Enum):
    BOTH_SATISFIED = "both-satisfied"
    HIGHER_ONLY = "higher-only"
    LOWER_ONLY = "lower-only"
    UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class TransmitDecision:
    """Chosen beam phase, the constraint level it satisfies, and predicted energies."""

    theta_star: float
    level: DecisionLevel
    predicted_r1: float
    predicted_r2: float
    predicted_rt: float

    def __post_init__(self):
        object.__setattr__(self, "theta_star", normalize_angle(float(self.theta_star)))


def unconstrained_optimum(c: CombinedParams) -> tuple[float, bool]:
    """Best beam phase with no constraints: (-phi_t) mod 2*pi.

    Returns (theta, degenerate).  When the two gain phasors cancel (gamma_t
    zero up to rounding) the summed RSSI does not depend on the phase; any
    value is optimal and (0.0, True) is returned.
    """
    if c.gamma_t <= 1e-12 * (abs(c.alpha_t) + 1.0):
        return 0.0, True
    return normalize_angle(-c.phi_t), False


def acute_condition(phi1: float, phi2: float) -> bool:
    """True when the two receivers' phases are within pi/2 on the circle.

    This is the sufficient condition under which restricting to a single
    beam loses nothing.
    """
    return circular_distance(phi1, phi2) <= math.pi / 2.0


def feasible_arc(
    alpha_prime: float, gamma_prime: float, phi: float, rho: float
) -> CircularArc:
    """Arc of beam phases for which alpha_prime + gamma_prime*cos(theta+phi) >= rho.

    The arc is centered on -phi with half-width acos((rho - alpha_prime) /
    gamma_prime); a requirement above the achievable maximum gives the empty
    arc and one below the minimum gives the full circle.  A zero gain means
    the energy is constant: full when alpha_prime >= rho, otherwise empty.
    """
    if gamma_prime == 0.0:
        return CircularArc.full() if alpha_prime >= rho else CircularArc.empty()
    r = (rho - alpha_prime) / gamma_prime
    if r > 1.0:
        if r > 1.0 + _ACOS_SLACK:
            return CircularArc.empty()
        r = 1.0
    elif r < -1.0:
        if r < -1.0 - _ACOS_SLACK:
            return CircularArc.full()
        r = -1.0
    return CircularArc.proper(center=-phi, half_width=math.acos(r))


def intersect_arcs(a: CircularArc, b: CircularArc) -> ArcSet:
    """Exact set intersection of two arcs on the circle (0, 1, or 2 pieces)."""
    if a.kind is ArcKind.EMPTY or b.kind is ArcKind.EMPTY:
        return ArcSet.empty()
    if a.kind is ArcKind.FULL:
        return ArcSet(arcs=(b,))
    if b.kind is ArcKind.FULL:
        return ArcSet(arcs=(a,))

    # Work in a frame rotated so that a spans [0, len_a]; b then spans
    # [s, s + len_b] with s in [0, 2*pi), possibly wrapping past 2*pi.
    len_a = 2.0 * a.half_width
    len_b = 2.0 * b.half_width
    s = normalize_angle(b.start - a.start)

    pieces: list[tuple[float, float]] = []
    if s + len_b < TAU:
        if s <= len_a:
            pieces.append((s, min(len_a, s + len_b)))
    else:
        # b wraps past the frame origin: a head piece at the start of a,
        # plus (when b's start still lies inside a) a tail piece.
        pieces.append((0.0, min(len_a, s + len_b - TAU)))
        if s <= len_a:
            pieces.append((s, len_a))

    arcs = tuple(
        CircularArc.proper(
            center=a.start + 0.5 * (lo + hi), half_width=0.5 * (hi - lo)
        )
        for lo, hi in pieces
    )
    return ArcSet(arcs=arcs)


def estimated_single_beam(e: EstimateSet, which: int, theta: float) -> float:
    """Single-beam energy predicted for one receiver from the estimates."""
    if which == 1:
        return e.alpha_prime_hat_1 + e.gamma_prime_hat_1 * math.cos(theta + e.phi_hat_1)
    if which == 2:
        return e.alpha_prime_hat_2 + e.gamma_prime_hat_2 * math.cos(theta + e.phi_hat_2)
    raise ValueError(f"receiver index must be 1 or 2, got {which!r}")


def estimated_total(e: EstimateSet, theta: float) -> float:
    """Predicted summed energy: the two single-beam predictions added."""
    return estimated_single_beam(e, 1, theta) + estimated_single_beam(e, 2, theta)


def _optimum_over_region(e: EstimateSet, region: ArcSet) -> float | None:
    """Maximize the predicted total over an arc set; None when the set is empty.

    The peak -phi_hat_t wins when admissible; otherwise the total is a plain
    cosine along each arc, so the maximum sits at an arc endpoint.  Ties go
    to the smallest angle (endpoints are scanned in ascending order).
    """
    if region.is_empty:
        return None
    peak = normalize_angle(-e.phi_hat_t)
    if region.contains(peak):
        return peak
    best_theta = None
    best_value = -math.inf
    for theta in region.endpoints():
        value = estimated_total(e, theta)
        if value > best_value:
            best_theta, best_value = theta, value
    return best_theta


def constrained_optimum(e: EstimateSet, cons: EnergyConstraints) -> float | None:
    """Best single-beam phase meeting both requirements; None when infeasible."""
    arc1 = feasible_arc(e.alpha_prime_hat_1, e.gamma_prime_hat_1, e.phi_hat_1, cons.rho1)
    arc2 = feasible_arc(e.alpha_prime_hat_2, e.gamma_prime_hat_2, e.phi_hat_2, cons.rho2)
    return _optimum_over_region(e, intersect_arcs(arc1, arc2))


def single_constraint_optimum(
    e: EstimateSet, rho_priority: float, which: int
) -> float | None:
    """Best single-beam phase meeting only one receiver's requirement."""
    if which == 1:
        arc = feasible_arc(
            e.alpha_prime_hat_1, e.gamma_prime_hat_1, e.phi_hat_1, rho_priority
        )
    elif which == 2:
        arc = feasible_arc(
            e.alpha_prime_hat_2, e.gamma_prime_hat_2, e.phi_hat_2, rho_priority
        )
    else:
        raise ValueError(f"receiver index must be 1 or 2, got {which!r}")
    if arc.kind is ArcKind.EMPTY:
        return None
    return _optimum_over_region(e, ArcSet(arcs=(arc,)))


def transmit_decision(e: EstimateSet, cons: EnergyConstraints) -> TransmitDecision:
    """Pick the beam phase for a block, relaxing constraints only as needed.

    Cascade: (i) satisfy both receivers; (ii) drop the smaller requirement
    and satisfy only the receiver asking for more (ties treat receiver 1 as
    the higher one); (iii) drop the larger instead; (iv) drop both and take
    the unconstrained peak.  Zero requirements on both sides are the
    unconstrained problem outright and are labeled as such.
    """
    theta: float | None
    if cons.rho1 == 0.0 and cons.rho2 == 0.0:
        theta = normalize_angle(-e.phi_hat_t)
        level = DecisionLevel.UNCONSTRAINED
    else:
        theta = constrained_optimum(e, cons)
        level = DecisionLevel.BOTH_SATISFIED
        if theta is None:
            higher = 1 if cons.rho1 >= cons.rho2 else 2
            lower = 2 if higher == 1 else 1
            rho_higher = cons.rho1 if higher == 1 else cons.rho2
            rho_lower = cons.rho2 if higher == 1 else cons.rho1
            theta = single_constraint_optimum(e, rho_higher, higher)
            level = DecisionLevel.HIGHER_ONLY
            if theta is None:
                theta = single_constraint_optimum(e, rho_lower, lower)
                level = DecisionLevel.LOWER_ONLY
            if theta is None:
                theta = normalize_angle(-e.phi_hat_t)
                level = DecisionLevel.UNCONSTRAINED
    r1 = estimated_single_beam(e, 1, theta)
    r2 = estimated_single_beam(e, 2, theta)
    return TransmitDecision(
        theta_star=theta,
        level=level,
        predicted_r1=r1,
        predicted_r2=r2,
        predicted_rt=r1 + r2,
    )
