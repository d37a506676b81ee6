"""Pairwise scheduling for more than two receivers.

Each block, the transmitter probes every receiver, estimates its channel
phase from the feedback, and serves the two receivers whose phases are
closest on the circle.  With five or more receivers some pair always falls
within a quarter turn, so the served pair satisfies the acute condition and
the single-beam transmit rule stays optimal for it.  Receivers left out of a
block accumulate an energy deficit that is recorded but does not yet steer
the selection.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .angles import circular_distance, normalize_angle
from .channel import ChannelVector, derive_params, rssi_single_beam, sample_channel
from .optimize import DecisionLevel, EnergyConstraints, transmit_decision
from .training import (
    Codebook,
    PhaseUnobservableError,
    estimate_all,
    estimate_phi,
    simulate_training,
)


@dataclass
class ErEntry:
    """One receiver in the pool; deficit accumulates across rounds."""

    er_id: int
    phi_hat: float = 0.0
    rho: float = 0.0
    deficit: float = 0.0

    def __post_init__(self):
        self.phi_hat = normalize_angle(float(self.phi_hat))
        if not math.isfinite(self.rho) or self.rho < 0.0:
            raise ValueError(f"rho must be finite and >= 0, got {self.rho!r}")


@dataclass
class ErPool:
    """The set of receivers competing for service."""

    entries: list[ErEntry]

    def __post_init__(self):
        ids = [e.er_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("er_ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def by_id(self, er_id: int) -> ErEntry:
        for e in self.entries:
            if e.er_id == er_id:
                return e
        raise KeyError(er_id)


@dataclass(frozen=True)
class ScheduleRound:
    """Outcome of one block: who was served, with what beam, and who got what."""

    index: int
    er_a: int
    er_b: int
    acute: bool
    theta_star: float
    level: DecisionLevel
    delivered: dict[int, float]
    deficits: dict[int, float]


def select_pair(pool: ErPool) -> tuple[int, int, bool]:
    """Pick the pair of receivers with the smallest circular phase distance.

    Returns (id_a, id_b, acute) with id_a < id_b.  Ties go to the smallest
    id pair (pairs are scanned in ascending id order and only a strictly
    smaller distance displaces the incumbent).
    """
    if len(pool) < 2:
        raise ValueError(f"pool must hold at least 2 receivers, got {len(pool)}")
    entries = sorted(pool.entries, key=lambda e: e.er_id)
    best: tuple[int, int] | None = None
    best_dist = math.inf
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            d = circular_distance(entries[i].phi_hat, entries[j].phi_hat)
            if d < best_dist:
                best = (entries[i].er_id, entries[j].er_id)
                best_dist = d
    assert best is not None
    return best[0], best[1], best_dist <= math.pi / 2.0


def run_schedule(
    pool: ErPool,
    rounds: int,
    codebook: Codebook,
    noise_std: float,
    master_seed: int,
    power: float = 1.0,
    amp_range: tuple[float, float] = (0.1, 1.0),
    channel_sampler: Callable[[np.random.Generator], ChannelVector] | None = None,
) -> list[ScheduleRound]:
    """Run the block-by-block schedule, mutating the pool's phases and deficits.

    Each round draws fresh channels for every receiver (quasi-static per
    block), probes them all with the training codebook, serves the closest
    pair through the transmit cascade, and credits every receiver the energy
    it actually harvests from the chosen beam.  Deficits grow by each
    receiver's shortfall against its own requirement.  Round r uses the
    substream seeded by (master_seed, r), so results do not depend on
    execution environment.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if channel_sampler is None:
        def channel_sampler(rng):
            return sample_channel(rng, amp_range)

    history: list[ScheduleRound] = []
    order = sorted(pool.entries, key=lambda e: e.er_id)
    for r in range(rounds):
        rng = np.random.default_rng([master_seed, r])
        params = {}
        traces = {}
        for entry in order:
            ch = channel_sampler(rng)
            p = derive_params(ch, power)
            trace = simulate_training(p, codebook, noise_std, rng)
            params[entry.er_id] = p
            traces[entry.er_id] = trace
            try:
                entry.phi_hat = estimate_phi(trace)
            except PhaseUnobservableError:
                entry.phi_hat = 0.0

        id_a, id_b, acute = select_pair(pool)
        estimates = estimate_all(traces[id_a], traces[id_b])
        cons = EnergyConstraints(rho1=pool.by_id(id_a).rho, rho2=pool.by_id(id_b).rho)
        decision = transmit_decision(estimates, cons)

        delivered = {
            entry.er_id: rssi_single_beam(params[entry.er_id], decision.theta_star)
            for entry in order
        }
        for entry in order:
            entry.deficit += max(0.0, entry.rho - delivered[entry.er_id])

        history.append(
            ScheduleRound(
                index=r,
                er_a=id_a,
                er_b=id_b,
                acute=acute,
                theta_star=decision.theta_star,
                level=decision.level,
                delivered=delivered,
                deficits={entry.er_id: entry.deficit for entry in order},
            )
        )
    return history
