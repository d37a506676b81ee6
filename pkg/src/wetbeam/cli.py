"""Command-line interface: estimate | optimize | fig1 | fig2 | schedule.

Every subcommand is deterministic under a fixed --seed.  Options may also be
given in a flat key=value config file (--config); explicit flags win over
file values, and unknown keys in the file are rejected.  Exit codes: 0 on
success, 1 on runtime/I-O failure, 2 on usage errors.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .angles import circular_distance
from .channel import (
    ChannelVector,
    combine_pair,
    derive_params,
    rssi_single_beam,
    sample_channel,
)
from .harness import (
    ExperimentConfig,
    _oracle_for_level,
    _response_grids,
    grid_tolerance,
    run_fig1_experiment,
    run_fig2_experiment,
)
from .optimize import DecisionLevel, EnergyConstraints, transmit_decision
from .report import (
    fmt,
    render_fig1_figure,
    render_fig2_figure,
    write_fig1_csv,
    write_fig1_json,
    write_fig2_csv,
    write_fig2_json,
    write_schedule_csv,
    write_schedule_json,
)
from .scheduler import ErEntry, ErPool, run_schedule
from .training import estimate_all, make_codebook, simulate_training

_UNSET = object()


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable
    default: object
    help: str


_COMMON = [
    Opt("seed", int, 0, "master seed for all randomness"),
    Opt("power", float, 1.0, "transmit sum power"),
    Opt("codebook", int, 16, "training codebook size (>= 3)"),
    Opt("noise", float, 0.0, "feedback noise standard deviation (>= 0)"),
    Opt("grid", int, 360, "oracle grid resolution per axis (>= 90)"),
    Opt("out", str, None, "output file path"),
    Opt("format", str, "csv", "output format: csv or json"),
    Opt("amp-low", float, 0.1, "low end of the channel amplitude range"),
    Opt("amp-high", float, 1.0, "high end of the channel amplitude range"),
]

_OPTIONS: dict[str, list[Opt]] = {
    "estimate": list(_COMMON),
    "optimize": _COMMON
    + [
        Opt("rho1", float, 0.0, "minimum energy requirement for receiver 1"),
        Opt("rho2", float, 0.0, "minimum energy requirement for receiver 2"),
        Opt("channel1", str, None, "receiver 1 channel as a1,delta1,a2,delta2"),
        Opt("channel2", str, None, "receiver 2 channel as a1,delta1,a2,delta2"),
        Opt("oracle", bool, False, "also run the grid oracle and report the gap"),
    ],
    "fig1": _COMMON
    + [
        Opt("trials", int, 1000, "number of channel realizations"),
        Opt("combos", int, 20, "constraint combos per realization"),
        Opt("no-plot", bool, False, "skip rendering the PNG figure"),
    ],
    "fig2": _COMMON
    + [
        Opt("trials", int, 1000, "number of channel realizations"),
        Opt("combos", int, 1, "constraint combos per realization"),
        Opt("no-plot", bool, False, "skip rendering the PNG figure"),
    ],
    "schedule": _COMMON
    + [
        Opt("ers", int, None, "number of receivers in the pool (>= 2)"),
        Opt("rounds", int, 100, "number of transmission blocks to simulate"),
        Opt("rho", float, 0.0, "per-receiver minimum energy requirement"),
    ],
}

_DESCRIPTIONS = {
    "estimate": "synthesize a channel pair, train, and report true vs estimated parameters",
    "optimize": "run the transmit cascade for one channel pair and report the decision",
    "fig1": "optimality-gap experiment binned by the receivers' phase difference",
    "fig2": "harvested-energy comparison: proposed vs two-beam-directed vs grid oracle",
    "schedule": "pairwise scheduling simulation for a pool of receivers",
}


def _dest(name: str) -> str:
    return name.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wetbeam",
        description="RSSI-feedback energy beamforming simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, opts in _OPTIONS.items():
        p = sub.add_parser(command, help=_DESCRIPTIONS[command])
        p.add_argument("--config", type=str, default=None, help="key=value config file")
        for opt in opts:
            flag = f"--{opt.name}"
            if opt.type is bool:
                p.add_argument(flag, dest=_dest(opt.name), action="store_const",
                               const=True, default=_UNSET, help=opt.help)
            else:
                p.add_argument(flag, dest=_dest(opt.name), type=opt.type,
                               default=_UNSET, help=opt.help)
    return parser


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _load_config(parser, path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[_dest(key.strip())] = value.strip()
    return values


def _merge_options(parser, args, command: str) -> dict:
    """Resolve each option as: explicit flag > config file > built-in default."""
    specs = {_dest(o.name): o for o in _OPTIONS[command]}
    file_values: dict[str, str] = {}
    if args.config is not None:
        file_values = _load_config(parser, args.config)
        for key in file_values:
            if key not in specs:
                parser.error(f"unknown config key: {key!r}")
    merged = {}
    for dest, opt in specs.items():
        cli_value = getattr(args, dest)
        if cli_value is not _UNSET:
            merged[dest] = cli_value
        elif dest in file_values:
            raw = file_values[dest]
            caster = _parse_bool if opt.type is bool else opt.type
            try:
                merged[dest] = caster(raw)
            except ValueError:
                parser.error(f"bad config value for {opt.name}: {raw!r}")
        else:
            merged[dest] = opt.default
    return merged


def _validate_common(parser, ns: dict) -> None:
    if ns["codebook"] < 3:
        parser.error("--codebook must be at least 3 (estimator identities fail below)")
    if ns["noise"] < 0.0:
        parser.error("--noise must be >= 0")
    if ns["grid"] < 90:
        parser.error("--grid must be at least 90")
    if ns["power"] <= 0.0:
        parser.error("--power must be > 0")
    if ns["format"] not in ("csv", "json"):
        parser.error("--format must be csv or json")
    if ns["amp_low"] < 0.0 or ns["amp_low"] > ns["amp_high"]:
        parser.error("--amp-low/--amp-high must satisfy 0 <= low <= high")


def _out_paths(ns: dict, default_stem: str) -> tuple[str, str]:
    out = ns["out"] or f"{default_stem}.{ns['format']}"
    stem = os.path.splitext(out)[0]
    return out, stem


def _parse_channel(parser, text: str) -> ChannelVector:
    parts = text.split(",")
    if len(parts) != 4:
        parser.error(f"channel must be a1,delta1,a2,delta2, got {text!r}")
    try:
        a1, d1, a2, d2 = (float(p) for p in parts)
        return ChannelVector(a1=a1, delta1=d1, a2=a2, delta2=d2)
    except ValueError as exc:
        parser.error(f"bad channel spec {text!r}: {exc}")


def _front_half(ns: dict, rng, ch1: ChannelVector, ch2: ChannelVector):
    """Derive true params, run one training sweep, and estimate."""
    p1 = derive_params(ch1, ns["power"])
    p2 = derive_params(ch2, ns["power"])
    cb = make_codebook(ns["codebook"])
    t1 = simulate_training(p1, cb, ns["noise"], rng)
    t2 = simulate_training(p2, cb, ns["noise"], rng)
    return p1, p2, estimate_all(t1, t2)


def _synthesize(ns: dict):
    rng = np.random.default_rng([ns["seed"], 0])
    amp_range = (ns["amp_low"], ns["amp_high"])
    ch1 = sample_channel(rng, amp_range)
    ch2 = sample_channel(rng, amp_range)
    return _front_half(ns, rng, ch1, ch2)


def cmd_estimate(parser, ns: dict) -> int:
    p1, p2, est = _synthesize(ns)
    true_phi_t = combine_pair(p1, p2).phi_t
    print(
        f"seed={ns['seed']} codebook={ns['codebook']} "
        f"noise={fmt(float(ns['noise']))} power={fmt(float(ns['power']))}"
    )
    rows = [
        ("er1 phi", p1.phi, est.phi_hat_1, True),
        ("er1 alpha_prime", p1.alpha_prime, est.alpha_prime_hat_1, False),
        ("er1 gamma_prime", p1.gamma_prime, est.gamma_prime_hat_1, False),
        ("er2 phi", p2.phi, est.phi_hat_2, True),
        ("er2 alpha_prime", p2.alpha_prime, est.alpha_prime_hat_2, False),
        ("er2 gamma_prime", p2.gamma_prime, est.gamma_prime_hat_2, False),
        ("pair phi_t", true_phi_t, est.phi_hat_t, True),
    ]
    for label, true, hat, is_angle in rows:
        err = circular_distance(true, hat) if is_angle else abs(true - hat)
        print(f"{label}: true={fmt(true)} est={fmt(hat)} abs_err={fmt(err)}")
    return 0


def cmd_optimize(parser, ns: dict) -> int:
    if (ns["channel1"] is None) != (ns["channel2"] is None):
        parser.error("--channel1 and --channel2 must be given together")
    if ns["rho1"] < 0.0 or ns["rho2"] < 0.0:
        parser.error("--rho1/--rho2 must be >= 0")
    if ns["channel1"] is not None:
        ch1 = _parse_channel(parser, ns["channel1"])
        ch2 = _parse_channel(parser, ns["channel2"])
        rng = np.random.default_rng([ns["seed"], 0])
        p1, p2, est = _front_half(ns, rng, ch1, ch2)
    else:
        p1, p2, est = _synthesize(ns)
    cons = EnergyConstraints(rho1=ns["rho1"], rho2=ns["rho2"])
    decision = transmit_decision(est, cons)
    print(f"theta_star={fmt(decision.theta_star)}")
    print(f"level={decision.level.value}")
    print(
        f"predicted_r1={fmt(decision.predicted_r1)} "
        f"predicted_r2={fmt(decision.predicted_r2)} "
        f"predicted_rt={fmt(decision.predicted_rt)}"
    )
    if ns["oracle"]:
        achieved = rssi_single_beam(p1, decision.theta_star) + rssi_single_beam(
            p2, decision.theta_star
        )
        grids = _response_grids(p1, p2, ns["grid"])
        best = _oracle_for_level(grids, cons, decision.level)
        tol = grid_tolerance(p1, p2, ns["grid"])
        oracle_rt = best.r_total if best is not None else math.nan
        print(
            f"achieved_rt={fmt(achieved)} oracle_rt={fmt(oracle_rt)} "
            f"gap={fmt(oracle_rt - achieved)} tolerance={fmt(tol)}"
        )
    return 0


def _experiment_config(parser, ns: dict) -> ExperimentConfig:
    if ns["trials"] < 1 or ns["combos"] < 1:
        parser.error("--trials and --combos must be >= 1")
    return ExperimentConfig(
        trials=ns["trials"],
        constraint_combos=ns["combos"],
        amp_range=(ns["amp_low"], ns["amp_high"]),
        power=ns["power"],
        codebook_n=ns["codebook"],
        noise_std=ns["noise"],
        grid_resolution=ns["grid"],
        master_seed=ns["seed"],
    )


def cmd_fig1(parser, ns: dict) -> int:
    result = run_fig1_experiment(_experiment_config(parser, ns))
    out, stem = _out_paths(ns, "fig1")
    if ns["format"] == "csv":
        write_fig1_csv(out, f"{stem}_bins.csv", result)
    else:
        write_fig1_json(out, result)
    if not ns["no_plot"]:
        render_fig1_figure(f"{stem}.png", result)
    finite = [r.gap for r in result.records if math.isfinite(r.gap)]
    acute = [
        r.gap
        for r in result.records
        if math.isfinite(r.gap) and r.phase_diff <= math.pi / 2.0
    ]
    positive = sum(
        1 for r in result.records if math.isfinite(r.gap) and r.gap > r.tolerance
    )
    both = sum(1 for r in result.records if r.level is DecisionLevel.BOTH_SATISFIED)
    satisfied = sum(
        1 for r in result.records if r.r1 >= r.rho1 and r.r2 >= r.rho2
    )
    n = len(result.records)
    print(
        f"fig1: trials={result.config.trials} combos={result.config.constraint_combos} "
        f"records={n} gap_defined={len(finite)} "
        f"mean_gap={fmt(float(np.mean(finite)) if finite else math.nan)} "
        f"max_acute_gap={fmt(max(acute) if acute else math.nan)} "
        f"positive_gaps={positive} "
        f"both_level_fraction={fmt(both / n)} feasible_fraction={fmt(satisfied / n)} "
        f"out={out}"
    )
    return 0


def cmd_fig2(parser, ns: dict) -> int:
    result = run_fig2_experiment(_experiment_config(parser, ns))
    out, stem = _out_paths(ns, "fig2")
    if ns["format"] == "csv":
        write_fig2_csv(out, f"{stem}_summary.csv", result)
    else:
        write_fig2_json(out, result)
    if not ns["no_plot"]:
        render_fig2_figure(f"{stem}.png", result)
    proposed = result.methods["proposed"]
    baseline = result.methods["two_beam_directed"]
    oracle = result.methods["grid_oracle"]
    ratio = proposed.mean_rt / oracle.mean_rt if oracle.mean_rt else math.nan
    print(
        f"fig2: trials={result.config.trials} "
        f"proposed_mean_rt={fmt(proposed.mean_rt)} "
        f"baseline_mean_rt={fmt(baseline.mean_rt)} "
        f"oracle_mean_rt={fmt(oracle.mean_rt)} "
        f"proposed_to_oracle_ratio={fmt(ratio)} "
        f"proposed_feasible_fraction={fmt(proposed.feasible_fraction)} out={out}"
    )
    return 0


def cmd_schedule(parser, ns: dict) -> int:
    if ns["ers"] is None or ns["ers"] < 2:
        parser.error("--ers must be given and at least 2")
    if ns["rounds"] < 1:
        parser.error("--rounds must be >= 1")
    if ns["rho"] < 0.0:
        parser.error("--rho must be >= 0")
    pool = ErPool(
        entries=[ErEntry(er_id=i, rho=ns["rho"]) for i in range(1, ns["ers"] + 1)]
    )
    rounds = run_schedule(
        pool,
        ns["rounds"],
        make_codebook(ns["codebook"]),
        ns["noise"],
        ns["seed"],
        power=ns["power"],
        amp_range=(ns["amp_low"], ns["amp_high"]),
    )
    out, _ = _out_paths(ns, "schedule")
    metadata = {
        "ers": ns["ers"],
        "rounds": ns["rounds"],
        "rho": ns["rho"],
        "master_seed": ns["seed"],
        "power": ns["power"],
        "codebook_n": ns["codebook"],
        "noise_std": ns["noise"],
        "amp_low": ns["amp_low"],
        "amp_high": ns["amp_high"],
    }
    if ns["format"] == "csv":
        write_schedule_csv(out, rounds, metadata)
    else:
        write_schedule_json(out, rounds, metadata)
    counts = {e.er_id: 0 for e in pool.entries}
    for rnd in rounds:
        counts[rnd.er_a] += 1
        counts[rnd.er_b] += 1
    acute_fraction = sum(1 for r in rounds if r.acute) / len(rounds)
    freq = " ".join(f"er{i}={fmt(counts[i] / len(rounds))}" for i in sorted(counts))
    print(
        f"schedule: ers={ns['ers']} rounds={ns['rounds']} "
        f"acute_fraction={fmt(acute_fraction)} freq: {freq} out={out}"
    )
    return 0


_HANDLERS = {
    "estimate": cmd_estimate,
    "optimize": cmd_optimize,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "schedule": cmd_schedule,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ns = _merge_options(parser, args, args.command)
        _validate_common(parser, ns)
        return _HANDLERS[args.command](parser, ns)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
