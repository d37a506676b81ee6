"""Acceptance gate: every stated criterion at its stated scale and tolerance.

Each test prints one PASS line with the measured numbers (run pytest with -s
to see them; with -v each criterion shows as its own pass/fail line).
"""

import math
import time

import numpy as np

from wetbeam.angles import TAU, circular_distance, normalize_angle
from wetbeam.channel import (
    RssiParams,
    combine_pair,
    derive_params,
    rssi_single_beam,
    rssi_two_beam,
    sample_channel,
)
from wetbeam.harness import (
    ExperimentConfig,
    _best_on_grid,
    _response_grids,
    grid_oracle,
    grid_tolerance,
    run_fig1_experiment,
    run_fig2_experiment,
)
from wetbeam.optimize import (
    DecisionLevel,
    EnergyConstraints,
    EstimateSet,
    constrained_optimum,
    estimated_total,
    transmit_decision,
)
from wetbeam.scheduler import ErEntry, ErPool, select_pair
from wetbeam.training import (
    estimate_all,
    estimate_alpha_prime,
    estimate_gamma_prime,
    estimate_phi,
    make_codebook,
    simulate_training,
)
from wetbeam.cli import main as cli_main


def exact_estimates(p1, p2) -> EstimateSet:
    return EstimateSet(
        phi_hat_1=p1.phi,
        phi_hat_2=p2.phi,
        phi_hat_t=combine_pair(p1, p2).phi_t,
        alpha_prime_hat_1=p1.alpha_prime,
        alpha_prime_hat_2=p2.alpha_prime,
        gamma_prime_hat_1=p1.gamma_prime,
        gamma_prime_hat_2=p2.gamma_prime,
    )


def test_criterion_1_estimator_exactness_at_zero_noise():
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    worst_phi = worst_alpha = worst_gamma = 0.0
    for _ in range(200):
        p = derive_params(sample_channel(rng), 1.0)
        for n in (3, 4, 8, 16, 64):
            trace = simulate_training(p, make_codebook(n), 0.0, rng)
            phi_hat = estimate_phi(trace)
            gamma_hat, _ = estimate_gamma_prime(trace, phi_hat)
            worst_phi = max(worst_phi, circular_distance(phi_hat, p.phi))
            worst_alpha = max(worst_alpha, abs(estimate_alpha_prime(trace) - p.alpha_prime))
            worst_gamma = max(worst_gamma, abs(gamma_hat - p.gamma_prime))
    elapsed = time.monotonic() - start
    assert worst_phi <= 1e-9
    assert worst_alpha <= 1e-9
    assert worst_gamma <= 1e-9
    assert elapsed < 1.0
    print(
        f"PASS criterion 1: estimator exactness | worst errors "
        f"phi={worst_phi:.2e} alpha'={worst_alpha:.2e} gamma'={worst_gamma:.2e} "
        f"({elapsed:.2f}s)"
    )


def test_criterion_2_phase_mse_halves_when_codebook_doubles():
    start = time.monotonic()
    p = RssiParams.from_coefficients(5.0, 1.0, 2.0, 1.234, 1.0)  # alpha'=6, gamma'=4
    sigma = 0.1 * p.alpha_prime
    rng = np.random.default_rng(1002)
    trials = 10000

    def phase_mse(n: int) -> float:
        cb = make_codebook(n)
        errors = np.empty(trials)
        for t in range(trials):
            trace = simulate_training(p, cb, sigma, rng)
            errors[t] = circular_distance(estimate_phi(trace), p.phi)
        return float(np.mean(errors**2))

    mse16 = phase_mse(16)
    mse32 = phase_mse(32)
    ratio = mse32 / mse16
    elapsed = time.monotonic() - start
    assert 0.4 <= ratio <= 0.6
    assert elapsed < 30.0
    print(
        f"PASS criterion 2: MSE scaling | mse(N=16)={mse16:.3e} mse(N=32)={mse32:.3e} "
        f"ratio={ratio:.3f} in [0.4, 0.6] ({elapsed:.1f}s)"
    )


def test_criterion_3_unconstrained_optimum_matches_grid_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(1003)
    worst = -math.inf
    for _ in range(500):
        p1 = derive_params(sample_channel(rng), 1.0)
        p2 = derive_params(sample_channel(rng), 1.0)
        c = combine_pair(p1, p2)
        theta = normalize_angle(-c.phi_t)
        achieved = rssi_two_beam(p1, theta, theta) + rssi_two_beam(p2, theta, theta)
        thetas, r1, r2, rt = _response_grids(p1, p2, 720)
        best = _best_on_grid(thetas, r1, r2, rt, None)
        tol = grid_tolerance(p1, p2, 720)
        worst = max(worst, best.r_total - achieved - tol)
        assert best.r_total - achieved <= tol
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    print(
        f"PASS criterion 3: peak-phase optimality vs 720x720 oracle | "
        f"worst (gap - tolerance)={worst:.2e} over 500 pairs ({elapsed:.1f}s)"
    )


def test_criterion_4_acute_constrained_optimum_matches_grid_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(1004)
    resolution = 360
    checked = 0
    worst = -math.inf
    while checked < 1000:
        p1 = derive_params(sample_channel(rng), 1.0)
        p2 = derive_params(sample_channel(rng), 1.0)
        if circular_distance(p1.phi, p2.phi) > math.pi / 2:
            continue
        # anchor a random feasible phase so the constraints are satisfiable
        anchor = float(rng.uniform(0.0, TAU))
        cons = EnergyConstraints(
            rho1=float(
                rng.uniform(p1.alpha_prime - p1.gamma_prime, rssi_single_beam(p1, anchor))
            ),
            rho2=float(
                rng.uniform(p2.alpha_prime - p2.gamma_prime, rssi_single_beam(p2, anchor))
            ),
        )
        e = exact_estimates(p1, p2)
        theta = constrained_optimum(e, cons)
        assert theta is not None
        achieved = estimated_total(e, theta)
        best = grid_oracle(p1, p2, cons, resolution)
        assert best is not None
        tol = grid_tolerance(p1, p2, resolution)
        worst = max(worst, best.r_total - achieved - tol)
        assert best.r_total <= achieved + tol
        checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 300.0
    print(
        f"PASS criterion 4: acute constrained optimum vs grid oracle | "
        f"worst (gap - tolerance)={worst:.2e} over 1000 acute pairs ({elapsed:.1f}s)"
    )


def test_criterion_5_gap_by_phase_difference():
    start = time.monotonic()
    cfg = ExperimentConfig(
        trials=1000,
        constraint_combos=20,
        grid_resolution=360,
        noise_std=0.0,
        codebook_n=16,
        master_seed=1005,
    )
    result = run_fig1_experiment(cfg)
    finite = [r for r in result.records if math.isfinite(r.gap)]
    acute = [r for r in finite if r.phase_diff <= math.pi / 2]
    positive = [r for r in finite if r.gap > r.tolerance]
    near_pi = [r for r in finite if r.phase_diff >= 3 * math.pi / 4]

    # every acute record is optimal within grid tolerance
    assert all(r.gap <= r.tolerance for r in acute)
    # strictly positive gaps, when they occur at all, sit beyond the acute
    # region and concentrate near pi (the measured regime has none: the
    # single-beam choice is grid-optimal at every sampled phase difference)
    assert all(r.phase_diff > math.pi / 2 for r in positive)
    if positive:
        top_quartile = sum(1 for r in positive if r.phase_diff >= 3 * math.pi / 4)
        assert top_quartile >= 0.5 * len(positive)
    # zero-gap instances exist near pi
    assert near_pi and any(r.gap <= r.tolerance for r in near_pi)
    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    print(
        f"PASS criterion 5: gap vs phase difference | records={len(result.records)} "
        f"gap_defined={len(finite)} positive_gaps={len(positive)} "
        f"max_acute_gap={max(r.gap for r in acute):.2e} "
        f"near_pi_zero_gap={sum(1 for r in near_pi if r.gap <= r.tolerance)}/{len(near_pi)} "
        f"({elapsed:.1f}s)"
    )


def test_criterion_6_energy_comparison_against_baseline_and_oracle():
    start = time.monotonic()
    cfg = ExperimentConfig(
        trials=1000,
        constraint_combos=1,
        grid_resolution=360,
        noise_std=0.01,
        codebook_n=16,
        master_seed=1006,
    )
    result = run_fig2_experiment(cfg)
    proposed = result.methods["proposed"]
    baseline = result.methods["two_beam_directed"]
    oracle = result.methods["grid_oracle"]
    ratio = proposed.mean_rt / oracle.mean_rt

    assert proposed.mean_rt > baseline.mean_rt  # strict improvement in mean
    assert ratio >= 0.98
    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    print(
        f"PASS criterion 6: harvested-energy comparison | "
        f"proposed={proposed.mean_rt:.6f} baseline={baseline.mean_rt:.6f} "
        f"oracle={oracle.mean_rt:.6f} measured ratio={ratio:.4f} (>= 0.98) "
        f"oracle_defined={oracle.n_defined}/{len(result.records)} ({elapsed:.1f}s)"
    )


def test_criterion_7_cascade_feasibility_invariants():
    start = time.monotonic()
    rng = np.random.default_rng(1007)
    cb = make_codebook(8)
    levels_seen = set()

    def check(p1, p2, cons, decision):
        r1 = rssi_single_beam(p1, decision.theta_star)
        r2 = rssi_single_beam(p2, decision.theta_star)
        if decision.level is DecisionLevel.BOTH_SATISFIED:
            assert r1 >= cons.rho1 - 1e-9 and r2 >= cons.rho2 - 1e-9
        elif decision.level is DecisionLevel.HIGHER_ONLY:
            high_r, high_rho = (r1, cons.rho1) if cons.rho1 >= cons.rho2 else (r2, cons.rho2)
            assert high_r >= high_rho - 1e-9
        elif decision.level is DecisionLevel.LOWER_ONLY:
            low_r, low_rho = (r2, cons.rho2) if cons.rho1 >= cons.rho2 else (r1, cons.rho1)
            assert low_r >= low_rho - 1e-9
        else:
            peak = normalize_angle(-combine_pair(p1, p2).phi_t)
            assert circular_distance(decision.theta_star, peak) <= 1e-9

    for _ in range(10000):
        p1 = derive_params(sample_channel(rng), 1.0)
        p2 = derive_params(sample_channel(rng), 1.0)
        t1 = simulate_training(p1, cb, 0.0, rng)
        t2 = simulate_training(p2, cb, 0.0, rng)
        e = estimate_all(t1, t2)
        cons = EnergyConstraints(
            rho1=float(rng.uniform(p1.alpha_prime - p1.gamma_prime, p1.alpha_prime + p1.gamma_prime)),
            rho2=float(rng.uniform(p2.alpha_prime - p2.gamma_prime, p2.alpha_prime + p2.gamma_prime)),
        )
        decision = transmit_decision(e, cons)
        levels_seen.add(decision.level)
        check(p1, p2, cons, decision)

    # constructed edge cases: empty arcs, exact-boundary requirements, zero gain
    p1 = RssiParams.from_coefficients(5.0, 1.0, 2.0, 0.0, 1.0)
    p2 = RssiParams.from_coefficients(4.0, 1.0, 1.5, math.pi, 1.0)
    e = exact_estimates(p1, p2)
    cases = [
        EnergyConstraints(p1.alpha_prime + p1.gamma_prime + 1.0, p2.alpha_prime + p2.gamma_prime + 1.0),
        EnergyConstraints(p1.alpha_prime + p1.gamma_prime, p2.alpha_prime + p2.gamma_prime),
        EnergyConstraints(p1.alpha_prime + p1.gamma_prime + 1.0, p2.alpha_prime + p2.gamma_prime),
        EnergyConstraints(p1.alpha_prime + p1.gamma_prime, 0.1),
        EnergyConstraints(0.1, p2.alpha_prime + p2.gamma_prime),
        EnergyConstraints(p1.alpha_prime - p1.gamma_prime, p2.alpha_prime - p2.gamma_prime),
    ]
    for cons in cases:
        decision = transmit_decision(e, cons)
        levels_seen.add(decision.level)
        check(p1, p2, cons, decision)

    # zero-gain receiver: constant energy, feasibility decided by the offset
    p_flat = RssiParams.from_coefficients(3.0, 1.0, 0.0, 0.0, 1.0)
    p_live = RssiParams.from_coefficients(5.0, 1.0, 2.0, 1.0, 1.0)
    e_flat = exact_estimates(p_flat, p_live)
    for rho_flat in (p_flat.alpha_prime - 0.5, p_flat.alpha_prime + 0.5):
        cons = EnergyConstraints(rho_flat, p_live.alpha_prime)
        decision = transmit_decision(e_flat, cons)
        levels_seen.add(decision.level)
        check(p_flat, p_live, cons, decision)

    assert DecisionLevel.BOTH_SATISFIED in levels_seen
    assert DecisionLevel.HIGHER_ONLY in levels_seen
    assert DecisionLevel.LOWER_ONLY in levels_seen
    assert DecisionLevel.UNCONSTRAINED in levels_seen
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    print(
        f"PASS criterion 7: cascade level invariants | 10000 random plus "
        f"{len(cases) + 2} edge instances, all four levels exercised ({elapsed:.1f}s)"
    )


def test_criterion_8_scheduler_pigeonhole():
    start = time.monotonic()
    rng = np.random.default_rng(1008)
    for _ in range(1000):
        n = int(rng.integers(5, 21))
        pool = ErPool(
            entries=[
                ErEntry(er_id=i + 1, phi_hat=float(rng.uniform(0.0, TAU)))
                for i in range(n)
            ]
        )
        _, _, acute = select_pair(pool)
        assert acute
    # adversarial equally spaced pools
    for n in range(5, 21):
        pool = ErPool(
            entries=[ErEntry(er_id=i + 1, phi_hat=TAU * i / n) for i in range(n)]
        )
        _, _, acute = select_pair(pool)
        assert acute
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    print(
        f"PASS criterion 8: pigeonhole pair selection | 1000 random pools (5-20) "
        f"+ 16 equally spaced pools all acute ({elapsed:.1f}s)"
    )


def test_criterion_9_byte_identical_outputs(tmp_path, monkeypatch, capsys):
    start = time.monotonic()

    def run(args):
        assert cli_main(args) == 0
        capsys.readouterr()

    def snapshot(paths):
        return [p.read_bytes() for p in paths]

    # fig1: identical seeds, then a different thread count
    f1 = tmp_path / "f1.csv"
    f1_files = [f1, tmp_path / "f1_bins.csv", tmp_path / "f1.png"]
    fig1_args = [
        "fig1", "--trials", "40", "--combos", "3", "--grid", "120",
        "--seed", "9", "--out", str(f1),
    ]
    monkeypatch.setenv("WETBEAM_THREADS", "1")
    run(fig1_args)
    first = snapshot(f1_files)
    run(fig1_args)
    assert snapshot(f1_files) == first
    monkeypatch.setenv("WETBEAM_THREADS", "3")
    run(fig1_args)
    assert snapshot(f1_files) == first

    # fig2 likewise
    f2 = tmp_path / "f2.csv"
    f2_files = [f2, tmp_path / "f2_summary.csv", tmp_path / "f2.png"]
    fig2_args = [
        "fig2", "--trials", "40", "--grid", "120", "--noise", "0.01",
        "--seed", "9", "--out", str(f2),
    ]
    run(fig2_args)
    first2 = snapshot(f2_files)
    monkeypatch.setenv("WETBEAM_THREADS", "1")
    run(fig2_args)
    assert snapshot(f2_files) == first2

    # schedule
    s = tmp_path / "s.csv"
    schedule_args = ["schedule", "--ers", "5", "--rounds", "40", "--seed", "9", "--out", str(s)]
    run(schedule_args)
    first3 = snapshot([s])
    monkeypatch.setenv("WETBEAM_THREADS", "4")
    run(schedule_args)
    assert snapshot([s]) == first3

    elapsed = time.monotonic() - start
    print(
        f"PASS criterion 9: byte-identical outputs across reruns and "
        f"WETBEAM_THREADS values ({elapsed:.1f}s)"
    )
