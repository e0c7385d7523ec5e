"""Command line front end: scenario generation, cutoff tables, simulation,
trace fitting and cohort reports.

Exit codes: 0 success, 1 usage error, 2 data error. Output files are
written atomically (temp file + rename) so an aborted run never leaves a
partial experiment artifact behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .errors import UndefinedFitError, ValidationError
from . import fitting
from .fitting import (
    FitResult,
    WindowFitter,
    cohort_report,
    parse_window_key,
    read_traces_csv,
    window_key,
)
from .market import (
    default_generation,
    generate_scenario,
    load_distribution,
    load_scenario,
    default_price_distribution,
)
from .models import UNBOUNDED, cutoff_schedule
from .simulate import AgentSpec, run_population

USAGE_EXIT = 1
DATA_EXIT = 2


class CliParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _load_dist(path: str | None):
    return load_distribution(path) if path else default_price_distribution()


def _json_dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen_scenario(args) -> int:
    scenario = generate_scenario(
        _load_dist(args.distribution),
        default_generation(),
        horizon=args.days,
        seed=args.seed,
        weekend_offset=args.offset,
        initial_units=args.initial_units,
        start_weekday=args.start_weekday,
    )
    _emit(_json_dumps(scenario.to_json()), args.out)
    return 0


def _banded_table(schedule) -> str:
    """Cutoff bands as `cutoff,days_remaining` rows, highest cutoff first."""
    bands: list[tuple[int, int, int]] = []  # (cutoff, first index, last index)
    for k, c in enumerate(schedule.cutoffs):
        if bands and bands[-1][0] == c:
            bands[-1] = (c, bands[-1][1], k)
        else:
            bands.append((c, k, k))
    lines = ["cutoff,days_remaining"]
    for i, (c, lo, hi) in enumerate(reversed(bands)):
        if i == 0 and lo != hi:
            label = f">={lo}"
        elif lo == hi:
            label = str(lo)
        else:
            label = f"{lo}-{hi}"
        lines.append(f"{c},{label}")
    return "\n".join(lines) + "\n"


def cmd_cutoffs(args) -> int:
    schedule = cutoff_schedule(_load_dist(args.distribution), args.max_index)
    if args.banded:
        _emit(_banded_table(schedule), args.out)
    else:
        _emit(schedule.to_csv(), args.out)
    return 0


def _load_agents(args) -> list[AgentSpec]:
    if args.agents:
        with open(args.agents, encoding="utf-8") as f:
            doc = json.load(f)
        if not isinstance(doc, list):
            raise ValidationError("agents file must be a JSON array")
        try:
            return [
                AgentSpec(
                    agent_id=str(a["id"]),
                    window=parse_window_key(a.get("window", "unbounded")),
                    noise=float(a.get("noise", 0.0)),
                )
                for a in doc
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed agents file: {exc}") from exc
    if args.windows:
        agents = []
        for i, token in enumerate(args.windows.split(","), start=1):
            w = parse_window_key(token.strip())
            agents.append(
                AgentSpec(agent_id=f"agent{i:03d}-{window_key(w)}", window=w, noise=args.noise)
            )
        return agents
    raise ValidationError("simulate needs --agents or --windows")


def cmd_simulate(args) -> int:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = generate_scenario(
            _load_dist(args.distribution),
            default_generation(),
            horizon=args.days,
            seed=args.seed,
            initial_units=args.initial_units,
        )
    agents = _load_agents(args)
    outcome = run_population(agents, scenario, seed=args.sim_seed)
    if args.traces:
        atomic_write(args.traces, fitting.traces_to_csv(outcome.traces))
    summary = outcome.summary_json()
    summary["scenario_seed"] = scenario.seed
    _emit(_json_dumps(summary), args.summary)
    return 0


def cmd_fit(args) -> int:
    scenario = load_scenario(args.scenario)
    traces = read_traces_csv(args.traces)
    if not traces:
        raise ValidationError(f"no traces found in {args.traces}")
    fitter = WindowFitter(scenario, dist=_load_dist(args.distribution), mode=args.mode)
    fits = [fitter.fit(t, args.metric) for t in traces]
    doc = [f.to_json() for f in fits]
    _emit(_json_dumps(doc), args.out)
    report = cohort_report(fits)
    if args.report:
        atomic_write(args.report, _json_dumps(report))
    if args.histogram_csv:
        hist = report["histogram"]
        rows = ["bin,count"] + [f"{b},{c}" for b, c in zip(hist["labels"], hist["counts"])]
        atomic_write(args.histogram_csv, "\n".join(rows) + "\n")
    return 0


def cmd_report(args) -> int:
    with open(args.fits, encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, list):
        raise ValidationError("fits file must be a JSON array")
    fits = [FitResult.from_json(d) for d in doc]
    report = cohort_report(fits)
    _emit(_json_dumps(report), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> CliParser:
    parser = CliParser(prog="gridgame", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", help="sample a market scenario to JSON")
    p.add_argument("--days", type=int, default=68)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--offset", type=float, default=0.0, help="weekend price offset fraction")
    p.add_argument("--initial-units", type=int, default=5)
    p.add_argument("--start-weekday", type=int, default=0, help="weekday of day 1 (0=Monday)")
    p.add_argument("--distribution", help="JSON array of price probabilities")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("cutoffs", help="print the cutoff price schedule")
    p.add_argument("--distribution", help="JSON array of price probabilities")
    p.add_argument("--max-index", type=int, default=67)
    p.add_argument(
        "--banded",
        "--table2",  # legacy spelling
        dest="banded",
        action="store_true",
        help="banded days-remaining format",
    )
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_cutoffs)

    p = sub.add_parser("simulate", help="run synthetic agents through a scenario")
    p.add_argument("--scenario", help="scenario JSON (generated fresh when omitted)")
    p.add_argument("--days", type=int, default=68)
    p.add_argument("--seed", type=int, default=0, help="scenario seed when generating")
    p.add_argument("--initial-units", type=int, default=5)
    p.add_argument("--distribution", help="JSON array of price probabilities")
    p.add_argument("--agents", help="JSON array of {id, window, noise}")
    p.add_argument("--windows", help="comma list of windows, e.g. '5,5,unbounded'")
    p.add_argument("--noise", type=float, default=0.0, help="flip probability for --windows agents")
    p.add_argument("--sim-seed", type=int, default=0, help="seed for agent noise streams")
    p.add_argument("--traces", help="write traces CSV here")
    p.add_argument("--summary", help="summary JSON path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit time windows to participant traces")
    p.add_argument("--traces", required=True, help="trace CSV")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--metric", choices=[fitting.MD, fitting.PD], default=fitting.MD)
    p.add_argument(
        "--mode",
        choices=[fitting.SELF_CONSISTENT, fitting.COUNTERFACTUAL_DAILY],
        default=fitting.SELF_CONSISTENT,
    )
    p.add_argument("--distribution", help="JSON array of price probabilities")
    p.add_argument("--out", help="per-participant fits JSON (default stdout)")
    p.add_argument("--report", help="cohort report JSON path")
    p.add_argument("--histogram-csv", help="histogram bins CSV path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="aggregate saved fits into a cohort report")
    p.add_argument("--fits", required=True, help="fits JSON from the fit command")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, UndefinedFitError, OSError, json.JSONDecodeError) as exc:
        print(f"gridgame: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
