"""Writers for experiment outputs: CSV/JSON records plus rendered figures.

All numbers are printed with 12 significant digits so written files can be
re-parsed to the printed precision, and nothing time- or host-dependent is
embedded, so reruns with the same seed are byte-identical.
"""

import json
import math
from typing import Iterable

from .harness import Fig1Result, Fig2Result, TrialRecord
from .scheduler import ScheduleRound

TRIAL_COLUMNS = [
    "trial_id",
    "combo_id",
    "a1_1",
    "delta1_1",
    "a2_1",
    "delta2_1",
    "a1_2",
    "delta1_2",
    "a2_2",
    "delta2_2",
    "phase_diff",
    "rho1",
    "rho2",
    "theta_star",
    "level",
    "r1",
    "r2",
    "rt",
    "oracle_rt",
    "gap",
]

BASELINE_COLUMNS = ["baseline_r1", "baseline_r2", "baseline_rt"]

BIN_COLUMNS = [
    "bin_lo",
    "bin_hi",
    "n_records",
    "n_gap_defined",
    "max_gap",
    "mean_gap",
    "max_rel_gap",
    "mean_rel_gap",
    "n_positive",
    "n_zero",
    "max_tolerance",
]

METHOD_COLUMNS = [
    "method",
    "n_defined",
    "mean_r1",
    "mean_r2",
    "mean_rt",
    "feasible_fraction",
    "rt_feasible_part",
    "rt_infeasible_part",
    "r1_feasible_part",
    "r1_infeasible_part",
    "r2_feasible_part",
    "r2_infeasible_part",
]


def fmt(value) -> str:
    """Render a cell: floats at 12 significant digits, everything else plain."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def _metadata(result) -> dict:
    cfg = result.config
    return {
        "trials": cfg.trials,
        "constraint_combos": cfg.constraint_combos,
        "amp_low": cfg.amp_range[0],
        "amp_high": cfg.amp_range[1],
        "power": cfg.power,
        "codebook_n": cfg.codebook_n,
        "noise_std": cfg.noise_std,
        "grid_resolution": cfg.grid_resolution,
        "master_seed": cfg.master_seed,
    }


def _trial_row(rec: TrialRecord, with_baseline: bool) -> list:
    row = [
        rec.trial_id,
        rec.combo_id,
        rec.channel1.a1,
        rec.channel1.delta1,
        rec.channel1.a2,
        rec.channel1.delta2,
        rec.channel2.a1,
        rec.channel2.delta1,
        rec.channel2.a2,
        rec.channel2.delta2,
        rec.phase_diff,
        rec.rho1,
        rec.rho2,
        rec.theta_star,
        rec.level.value,
        rec.r1,
        rec.r2,
        rec.rt,
        rec.oracle_rt,
        rec.gap,
    ]
    if with_baseline:
        row += [rec.baseline_r1, rec.baseline_r2, rec.baseline_rt]
    return row


def _write_csv(path, metadata: dict, columns: list[str], rows: Iterable[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key}={fmt(value)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(cell) for cell in row) + "\n")


def read_csv(path) -> tuple[dict, list[dict]]:
    """Parse a file written by _write_csv back into metadata and row dicts.

    Numeric-looking cells come back as floats (ints stay exact at 12
    significant digits for the magnitudes used here).
    """

    def convert(cell: str):
        try:
            return float(cell)
        except ValueError:
            return cell

    metadata: dict = {}
    rows: list[dict] = []
    columns: list[str] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                metadata[key] = convert(value)
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append(dict(zip(columns, map(convert, line.split(",")))))
    return metadata, rows


def _bin_rows(result: Fig1Result) -> list[list]:
    return [
        [
            b.lo,
            b.hi,
            b.n_records,
            b.n_gap_defined,
            b.max_gap,
            b.mean_gap,
            b.max_rel_gap,
            b.mean_rel_gap,
            b.n_positive,
            b.n_zero,
            b.max_tolerance,
        ]
        for b in result.bins
    ]


def write_fig1_csv(trials_path, bins_path, result: Fig1Result) -> None:
    meta = {"experiment": "fig1", **_metadata(result)}
    _write_csv(
        trials_path,
        meta,
        TRIAL_COLUMNS,
        (_trial_row(r, with_baseline=False) for r in result.records),
    )
    _write_csv(bins_path, meta, BIN_COLUMNS, _bin_rows(result))


def write_fig1_json(path, result: Fig1Result) -> None:
    payload = {
        "metadata": {"experiment": "fig1", **_metadata(result)},
        "trials": [
            dict(zip(TRIAL_COLUMNS, _trial_row(r, with_baseline=False)))
            for r in result.records
        ],
        "bins": [dict(zip(BIN_COLUMNS, row)) for row in _bin_rows(result)],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _method_rows(result: Fig2Result) -> list[list]:
    rows = []
    for name, stats in result.methods.items():
        rows.append(
            [
                name,
                stats.n_defined,
                stats.mean_r1,
                stats.mean_r2,
                stats.mean_rt,
                stats.feasible_fraction,
                stats.rt_feasible_part,
                stats.rt_infeasible_part,
                stats.r1_feasible_part,
                stats.r1_infeasible_part,
                stats.r2_feasible_part,
                stats.r2_infeasible_part,
            ]
        )
    return rows


def write_fig2_csv(trials_path, summary_path, result: Fig2Result) -> None:
    meta = {"experiment": "fig2", **_metadata(result)}
    _write_csv(
        trials_path,
        meta,
        TRIAL_COLUMNS + BASELINE_COLUMNS,
        (_trial_row(r, with_baseline=True) for r in result.records),
    )
    _write_csv(summary_path, meta, METHOD_COLUMNS, _method_rows(result))


def write_fig2_json(path, result: Fig2Result) -> None:
    payload = {
        "metadata": {"experiment": "fig2", **_metadata(result)},
        "trials": [
            dict(zip(TRIAL_COLUMNS + BASELINE_COLUMNS, _trial_row(r, True)))
            for r in result.records
        ],
        "methods": {
            name: dict(zip(METHOD_COLUMNS[1:], row[1:]))
            for name, row in zip(result.methods, _method_rows(result))
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _schedule_columns(er_ids: list[int]) -> list[str]:
    cols = ["round", "er_a", "er_b", "acute", "theta_star", "level"]
    cols += [f"delivered_{i}" for i in er_ids]
    cols += [f"deficit_{i}" for i in er_ids]
    return cols


def _schedule_row(rnd: ScheduleRound, er_ids: list[int]) -> list:
    row = [rnd.index, rnd.er_a, rnd.er_b, rnd.acute, rnd.theta_star, rnd.level.value]
    row += [rnd.delivered[i] for i in er_ids]
    row += [rnd.deficits[i] for i in er_ids]
    return row


def write_schedule_csv(path, rounds: list[ScheduleRound], metadata: dict) -> None:
    er_ids = sorted(rounds[0].delivered) if rounds else []
    _write_csv(
        path,
        {"experiment": "schedule", **metadata},
        _schedule_columns(er_ids),
        (_schedule_row(r, er_ids) for r in rounds),
    )


def write_schedule_json(path, rounds: list[ScheduleRound], metadata: dict) -> None:
    er_ids = sorted(rounds[0].delivered) if rounds else []
    payload = {
        "metadata": {"experiment": "schedule", **metadata},
        "rounds": [
            dict(zip(_schedule_columns(er_ids), _schedule_row(r, er_ids)))
            for r in rounds
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# Fixed PNG metadata keeps rendered figures byte-stable across reruns.
_PNG_METADATA = {"Software": "wetbeam"}


def render_fig1_figure(path, result: Fig1Result) -> None:
    """Gap-vs-phase-difference curves: per-bin max and mean oracle gap."""
    plt = _pyplot()
    centers = [0.5 * (b.lo + b.hi) for b in result.bins]
    max_gaps = [b.max_gap for b in result.bins]
    mean_gaps = [b.mean_gap for b in result.bins]
    tolerances = [b.max_tolerance for b in result.bins]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(centers, max_gaps, "o-", label="max gap")
    ax.plot(centers, mean_gaps, "s--", label="mean gap")
    ax.plot(centers, tolerances, ":", color="gray", label="grid tolerance")
    ax.axvline(math.pi / 2.0, color="black", linewidth=0.8, alpha=0.6)
    ax.text(math.pi / 2.0, ax.get_ylim()[1], " pi/2", va="top", fontsize=9)
    ax.set_xlabel("circular phase difference |phi1 - phi2| (rad)")
    ax.set_ylabel("oracle total energy - achieved")
    ax.set_title("Single-beam optimality gap vs phase difference")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def render_fig2_figure(path, result: Fig2Result) -> None:
    """Mean harvested energy by method, split into feasible/infeasible parts."""
    plt = _pyplot()
    methods = list(result.methods)
    groups = [
        ("ER 1", "r1_feasible_part", "r1_infeasible_part"),
        ("ER 2", "r2_feasible_part", "r2_infeasible_part"),
        ("total", "rt_feasible_part", "rt_infeasible_part"),
    ]
    width = 0.8 / len(methods)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = ["C0", "C1", "C2"]
    for m_idx, name in enumerate(methods):
        stats = result.methods[name]
        xs = [g_idx + m_idx * width for g_idx in range(len(groups))]
        feas = [getattr(stats, g[1]) for g in groups]
        infeas = [getattr(stats, g[2]) for g in groups]
        ax.bar(xs, feas, width=width * 0.9, color=colors[m_idx % 3], label=name)
        ax.bar(
            xs,
            infeas,
            width=width * 0.9,
            bottom=feas,
            color=colors[m_idx % 3],
            alpha=0.45,
            hatch="//",
        )
    ax.set_xticks([g_idx + width * (len(methods) - 1) / 2 for g_idx in range(len(groups))])
    ax.set_xticklabels([g[0] for g in groups])
    ax.set_ylabel("mean harvested energy")
    ax.set_title("Harvested energy by method (hatched = constraint not met)")
    ax.legend()
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
