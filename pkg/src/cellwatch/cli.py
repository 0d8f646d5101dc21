"""Command-line entry points: simulate, run, report, serve.

``simulate`` writes a scenario plus an observation stream (either the
bundled worked example or draws from a config's simulation block), ``run``
replays a stream through the engine and writes the event log, snapshot,
indicator CSV, and a text summary, ``report`` reprints the summary from a
finished run directory, and ``serve`` hosts the HTTP service.  Errors exit
nonzero with a machine-readable JSON report on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .engine import (
    batches_from_records,
    canonical_json,
    commit_tick,
    new_scenario_state,
    records_from_csv,
    records_from_jsonl,
    snapshot_dict,
    state_from_snapshot,
)
from .indicators import CSV_HEADER
from .scenario import ScenarioConfig, SchemaError, load_scenario
from .simulate import (
    PairTrajectory,
    bundled_worked_example,
    simulate_entity_path,
    simulate_network_data,
    write_bundled_worked_example,
)

DATA_DIR_ENV = "CELLWATCH_DATA_DIR"


def _fail(kind: str, message: str, path: str | None = None) -> int:
    report = {"error": {"type": kind, "message": message}}
    if path is not None:
        report["error"]["path"] = path
    print(json.dumps(report), file=sys.stderr)
    return 2


def _default_out(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get(DATA_DIR_ENV, "."))


def _load_records(data_path: Path) -> list[dict]:
    if data_path.suffix == ".csv":
        return records_from_csv(data_path)
    return records_from_jsonl(data_path)


def cmd_simulate(args) -> int:
    out = _default_out(args.out)
    if args.bundled_example:
        scenario_path, data_path = write_bundled_worked_example(out)
        print(json.dumps({"scenario": scenario_path, "data": data_path}))
        return 0
    if not args.config:
        return _fail("usage", "simulate needs --config or --bundled-example")
    try:
        config = load_scenario(args.config)
    except SchemaError as exc:
        return _fail("schema", str(exc), path=exc.path)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("io", str(exc))

    sim = config.raw_document.get("simulation")
    if not sim:
        return _fail("schema", "scenario has no 'simulation' block to draw from",
                     path="$.simulation")
    seed = args.seed if args.seed is not None else config.seed
    n_ticks = args.weeks or int(sim.get("n_ticks", 10))

    records: list[dict] = []
    trajectories = [
        PairTrajectory(
            pair=tuple(spec["pair"]),
            kind=spec.get("kind", "constant"),
            value=float(spec.get("value", 1.0)),
            pieces=tuple((int(t), float(v)) for t, v in spec.get("pieces", [])),
            concentration=float(spec.get("concentration", 20.0)),
        )
        for spec in sim.get("pair_rates", [])
    ]
    per_tick, _ = simulate_network_data(trajectories, config.channels, seed, n_ticks)
    for tick_obs in per_tick:
        for obs in tick_obs:
            for cid, value in sorted(obs.channels.items()):
                records.append(
                    {
                        "type": "pair",
                        "tick": obs.tick,
                        "entity_a": obs.pair[0],
                        "entity_b": obs.pair[1],
                        "channel_id": cid,
                        "scaled_value": value,
                        "raw_value": value * config.channel(cid).r_max
                        / config.channel(cid).scale_target,
                        "monitored": True,
                    }
                )
    for ent in config.entities:
        prior = [ent.prior.get(name, 0.0) for name in config.space.states]
        _, signals = simulate_entity_path(
            config.transition, config.task_model, seed, n_ticks, prior,
            name=ent.entity_id,
        )
        for z in signals:
            present = {
                config.task_names[j]: float(z.values[j])
                for j in range(len(config.task_names))
                if not (z.values[j] != z.values[j])  # NaN check
            }
            if present:
                records.append(
                    {"type": "signals", "tick": z.tick, "entity": ent.entity_id,
                     "signals": present}
                )

    out.mkdir(parents=True, exist_ok=True)
    scenario_path = out / "scenario.json"
    data_path = out / "observations.jsonl"
    scenario_path.write_text(json.dumps(config.raw_document, indent=2) + "\n",
                             encoding="utf-8")
    records.sort(key=lambda r: (r["tick"], r.get("type", ""), str(sorted(r.items()))))
    with open(data_path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(json.dumps({"scenario": str(scenario_path), "data": str(data_path)}))
    return 0


def _replay(config: ScenarioConfig, records, snapshot_path=None, workers: int = 1):
    if snapshot_path:
        with open(snapshot_path, "r", encoding="utf-8") as fh:
            state = state_from_snapshot(json.load(fh))
    else:
        state = new_scenario_state(config)
    reports = []
    for batch in batches_from_records(records, config):
        if batch.tick <= state.tick:
            continue  # already covered by the snapshot
        state, report = commit_tick(state, batch, workers=workers)
        reports.append(report)
    return state, reports


def _write_outputs(out: Path, state, reports) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    events_path = out / "events.jsonl"
    with open(events_path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(canonical_json(report.to_json_dict()) + "\n")
    snapshot_path = out / "snapshot.json"
    snapshot_path.write_text(canonical_json(snapshot_dict(state)) + "\n",
                             encoding="utf-8")
    csv_path = out / "indicators.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for report in reports:
            for ind in report.indicators:
                writer.writerow(ind.csv_row())
    summary_path = out / "summary.txt"
    summary_path.write_text(render_summary(state, reports), encoding="utf-8")
    return {
        "events": str(events_path),
        "snapshot": str(snapshot_path),
        "indicators": str(csv_path),
        "summary": str(summary_path),
    }


def render_summary(state, reports) -> str:
    """Plain-text tables: per-pair (alpha, beta) by tick, and per-cell indicators."""
    lines = [f"cellwatch {__version__} run summary", ""]
    pairs = sorted(
        {pair for report in reports for pair in report.edges}
    )
    if pairs:
        lines.append("edge-rate parameters (alpha, beta) per tick")
        header = ["tick"] + [p for p in pairs]
        lines.append("  ".join(f"{h:>16}" for h in header))
        for report in reports:
            prior_row = [f"t{report.tick} prior"]
            post_row = [f"t{report.tick} post"]
            for pair in pairs:
                entry = report.edges.get(pair)
                if entry is None:
                    prior_row.append("-")
                    post_row.append("-")
                else:
                    prior_row.append(f"({entry['prior'][0]:.2f}, {entry['prior'][1]:.2f})")
                    post_row.append(
                        f"({entry['posterior'][0]:.2f}, {entry['posterior'][1]:.2f})"
                    )
            lines.append("  ".join(f"{v:>16}" for v in prior_row))
            lines.append("  ".join(f"{v:>16}" for v in post_row))
        lines.append("")
    for cid in sorted(state.graph.cells):
        series = [
            ind
            for report in reports
            for ind in report.indicators
            if ind.cell_id == cid
        ]
        if not series:
            continue
        lines.append(f"indicators for cell {cid}")
        ticks = [f"t{ind.tick}" for ind in series]
        lines.append("  ".join(f"{h:>6}" for h in ["", *ticks]))
        for row, label in enumerate(["m1", "m2", "m3", "m4", "m5"]):
            values = [f"{ind.measures[row]:.2f}" for ind in series]
            lines.append("  ".join(f"{v:>6}" for v in [label, *values]))
        for row in range(5):
            values = [f"{ind.indicators[row]:.2f}" for ind in series]
            lines.append("  ".join(f"{v:>6}" for v in [f"phi{row}", *values]))
        lines.append("")
    lines.append(f"final tick: {state.tick}")
    lines.append(f"network log marginal likelihood: {state.cum_log_marginal:.6f}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        config = load_scenario(args.config)
    except SchemaError as exc:
        return _fail("schema", str(exc), path=exc.path)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("io", str(exc))
    try:
        records = _load_records(Path(args.data)) if args.data else []
    except (OSError, ValueError) as exc:
        return _fail("data", str(exc))
    started = time.perf_counter()
    try:
        state, reports = _replay(config, records, args.snapshot, workers=args.workers)
    except (KeyError, ValueError) as exc:
        return _fail("replay", str(exc))
    paths = _write_outputs(_default_out(args.out), state, reports)
    paths["elapsed_seconds"] = round(time.perf_counter() - started, 3)
    print(json.dumps(paths))
    return 0


def cmd_report(args) -> int:
    out = _default_out(args.out)
    snapshot_path = Path(args.snapshot) if args.snapshot else out / "snapshot.json"
    events_path = Path(args.events) if args.events else out / "events.jsonl"
    try:
        with open(snapshot_path, "r", encoding="utf-8") as fh:
            state = state_from_snapshot(json.load(fh))
        from .engine import TickReport
        from .indicators import IndicatorReport

        reports = []
        with open(events_path, "r", encoding="utf-8") as fh:
            for line in fh:
                doc = json.loads(line)
                reports.append(
                    TickReport(
                        tick=doc["tick"],
                        edges=doc["edges"],
                        entities=doc["entities"],
                        cells=doc["cells"],
                        indicators=tuple(
                            IndicatorReport(
                                cell_id=i["cell_id"],
                                tick=i["tick"],
                                measures=tuple(i["m"]),
                                indicators=tuple(i["phi"]),
                                inputs=i.get("inputs", {}),
                            )
                            for i in doc["indicators"]
                        ),
                        added=tuple(doc["added"]),
                        removed=tuple(doc["removed"]),
                        created_edges=tuple(doc["created_edges"]),
                        log_marginal_increment=doc["log_marginal_increment"],
                        cum_log_marginal=doc["cum_log_marginal"],
                    )
                )
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _fail("io", str(exc))
    sys.stdout.write(render_summary(state, reports))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ScenarioHost, create_app

    if args.snapshot:
        try:
            with open(args.snapshot, "r", encoding="utf-8") as fh:
                state = state_from_snapshot(json.load(fh))
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            return _fail("io", str(exc))
    elif args.config:
        try:
            config = load_scenario(args.config)
            records = _load_records(Path(args.data)) if args.data else []
            state, _ = _replay(config, records)
        except SchemaError as exc:
            return _fail("schema", str(exc), path=exc.path)
        except (OSError, ValueError) as exc:
            return _fail("io", str(exc))
    else:
        return _fail("usage", "serve needs --snapshot or --config")

    event_log = Path(args.out) / "events.jsonl" if args.out else None
    console = _find_console_dir()
    app = create_app(ScenarioHost(state, event_log_path=event_log), console_dir=console)
    uvicorn.run(app, host="127.0.0.1", port=args.port)
    return 0


def _find_console_dir() -> Path | None:
    here = Path(__file__).resolve()
    for base in [Path.cwd(), *here.parents]:
        candidate = base / "frontend" / "dist"
        if (candidate / "index.html").exists():
            return candidate
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellwatch",
        description="streaming Bayesian threat monitoring over dynamic networks",
    )
    parser.add_argument("--version", action="version", version=f"cellwatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a scenario and observation stream")
    sim.add_argument("--config", help="scenario JSON with a simulation block")
    sim.add_argument("--weeks", type=int, help="number of ticks to draw")
    sim.add_argument("--seed", type=int, help="master seed (defaults to scenario seed)")
    sim.add_argument("--out", help=f"output directory (default ${DATA_DIR_ENV} or .)")
    sim.add_argument("--bundled-example", action="store_true",
                     help="emit the bundled ten-tick worked example")
    sim.set_defaults(fn=cmd_simulate)

    run = sub.add_parser("run", help="replay a stream through the engine")
    run.add_argument("--config", required=True)
    run.add_argument("--data", help="observation stream (.jsonl or .csv)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--snapshot", help="resume from a snapshot file")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(fn=cmd_run)

    rep = sub.add_parser("report", help="print the summary for a finished run")
    rep.add_argument("--out", help="run directory holding snapshot.json/events.jsonl")
    rep.add_argument("--snapshot")
    rep.add_argument("--events")
    rep.set_defaults(fn=cmd_report)

    srv = sub.add_parser("serve", help="host the HTTP service for the console")
    srv.add_argument("--config")
    srv.add_argument("--data")
    srv.add_argument("--snapshot")
    srv.add_argument("--out", help="directory for the appended event log")
    srv.add_argument("--port", type=int, default=8130)
    srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
