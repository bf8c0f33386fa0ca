"""Command-line front door.

Subcommands:

* ``simulate``  — run a strategy grid against real or synthetic marks
* ``report``    — rankings + reliability artifacts from a judgement log
* ``rank``      — just the ranking from a judgement log
* ``reliability`` — just the agreement matrix from a judgement log
* ``weights``   — emit low-discrepancy criterion-weight vectors
* ``gen-marks`` — emit a synthetic marks CSV
* ``serve``     — run the HTTP session service

Exit codes: 0 success, 2 usage or validation failure, 3 runtime failure.
Every randomised command takes ``--seed`` (default 0) and echoes it, so
any output can be regenerated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    GRID_STRATEGIES,
    PROFILES,
    ExperimentGrid,
    generate_marks,
    ingest_marks,
    marks_to_csv,
    run_experiment_grid,
)
from .posteriors import Criterion, Item
from .qmc import halton_simplex_weights
from .ranking import (
    expected_ranking,
    mcp_ranking,
    mcr_ranking,
    ranking_to_csv,
    ranking_to_json,
    ranking_to_rows,
)
from .reliability import (
    moderation_queue,
    reliability_csv,
    reliability_json,
    reliability_report,
)
from .selection import replay_log

DEFAULT_SEED = 0

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class UsageFailure(Exception):
    pass


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageFailure(f"expected comma-separated integers, got {text!r}") from None


def _parse_criteria(text: str | None, n_fallback: int | None = None) -> list[Criterion]:
    """Parse 'name:weight,name:weight' (or bare names, weighted equally)."""
    if text is None:
        if n_fallback is None:
            raise UsageFailure("criteria are required (use --criteria)")
        return [
            Criterion(d, f"criterion-{d}", 1.0 / n_fallback) for d in range(n_fallback)
        ]
    parts = [part.strip() for part in text.split(",") if part.strip()]
    if not parts:
        raise UsageFailure("no criteria given")
    if all(":" in part for part in parts):
        names = [part.split(":", 1)[0] for part in parts]
        try:
            weights = [float(part.split(":", 1)[1]) for part in parts]
        except ValueError:
            raise UsageFailure(f"bad criterion weight in {text!r}") from None
    else:
        names = parts
        weights = [1.0 / len(parts)] * len(parts)
    return [Criterion(d, name, weight) for d, (name, weight) in enumerate(zip(names, weights))]


def _load_log(path: str) -> list[dict]:
    """Judgement log lines; service-log bookkeeping lines are skipped."""
    source = Path(path)
    if not source.exists():
        raise UsageFailure(f"log file not found: {path}")
    entries = []
    for line_no, line in enumerate(source.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise UsageFailure(f"{path}:{line_no}: malformed log line ({exc.msg})") from None
        if entry.get("type") in ("served", "status"):
            continue
        if "pair" not in entry or "winner" not in entry or "criterion" not in entry:
            raise UsageFailure(
                f"{path}:{line_no}: log entry missing pair/criterion/winner"
            )
        pair = entry["pair"]
        if not (isinstance(pair, list) and len(pair) == 2):
            raise UsageFailure(f"{path}:{line_no}: pair must be a two-item list")
        if entry["winner"] not in pair:
            raise UsageFailure(
                f"{path}:{line_no}: winner {entry['winner']} is not in pair "
                f"({pair[0]}, {pair[1]})"
            )
        entries.append(entry)
    return entries


def _matrix_from_log(args) -> "tuple":
    log = _load_log(args.log)
    if args.items is not None:
        n = args.items
    elif log:
        n = 1 + max(max(int(e["pair"][0]), int(e["pair"][1])) for e in log)
    else:
        raise UsageFailure("empty log: pass --items to size the assessment")
    if args.criteria is not None:
        criteria = _parse_criteria(args.criteria)
    elif log:
        criteria = _parse_criteria(None, 1 + max(int(e["criterion"]) for e in log))
    else:
        criteria = [Criterion(0, "overall", 1.0)]
    items = [Item(i) for i in range(n)]
    return replay_log(items, criteria, log), items, criteria


def _echo_seed(seed: int) -> None:
    print(f"# seed={seed}", file=sys.stderr)


# -- subcommand handlers ------------------------------------------------


def _cmd_simulate(args) -> int:
    if args.marks is not None:
        marks = ingest_marks(args.marks, args.profile)
    else:
        criteria = _parse_criteria(args.criteria) if args.criteria else _parse_criteria(None, 3)
        marks = generate_marks(
            args.synthetic, [c.name for c in criteria], args.profile,
            args.distribution, seed=args.seed,
        )
    weight_vectors = None
    if args.weights is not None:
        weight_vectors = np.array([[float(x) for x in args.weights.split(",")]])
    grid = ExperimentGrid(
        n_values=_parse_int_list(args.n),
        k_values=_parse_int_list(args.k),
        strategies=tuple(args.strategy.split(",")),
        trials=args.trials,
        base_seed=args.seed,
        weight_vectors=weight_vectors,
        qmc_weight_count=args.qmc_weights,
    )
    if args.emit_logs and args.out is None:
        raise UsageFailure("--emit-logs requires --out")
    _echo_seed(args.seed)
    store = run_experiment_grid(grid, marks, out_dir=args.out, emit_logs=args.emit_logs)
    print(store.summary_csv(), end="")
    return EXIT_OK


def _ranking_for(args, matrix):
    if args.aggregation == "mcp":
        return mcp_ranking(matrix)
    if args.aggregation == "mcr":
        return mcr_ranking(matrix)
    try:
        criterion = int(args.aggregation)
    except ValueError:
        raise UsageFailure(
            f"--aggregation must be mcp, mcr, or a criterion index, got {args.aggregation!r}"
        ) from None
    if not 0 <= criterion < matrix.n_criteria:
        raise UsageFailure(f"criterion {criterion} out of range")
    return expected_ranking(matrix, criterion)


def _cmd_rank(args) -> int:
    matrix, _, _ = _matrix_from_log(args)
    ranking = _ranking_for(args, matrix)
    print(ranking_to_json(ranking) if args.format == "json" else ranking_to_csv(ranking), end="")
    if args.format == "json":
        print()
    return EXIT_OK


def _cmd_reliability(args) -> int:
    matrix, _, _ = _matrix_from_log(args)
    if args.format == "json":
        print(reliability_json(matrix, args.threshold))
    else:
        print(reliability_csv(matrix, args.threshold), end="")
    return EXIT_OK


def _cmd_report(args) -> int:
    matrix, _, criteria = _matrix_from_log(args)
    holistic = mcp_ranking(matrix) if matrix.n_criteria > 1 else expected_ranking(matrix, 0)
    if args.format == "json":
        document = {
            "rankings": {
                "holistic": ranking_to_rows(holistic),
                "per_criterion": {
                    str(d): ranking_to_rows(expected_ranking(matrix, d))
                    for d in range(matrix.n_criteria)
                },
            },
            "reliability": reliability_report(matrix, args.threshold),
            "flagged": moderation_queue(matrix, args.threshold),
        }
        print(json.dumps(document, indent=2))
        return EXIT_OK
    out = Path(args.out if args.out is not None else ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "ranking_holistic.csv").write_text(ranking_to_csv(holistic))
    for d in range(matrix.n_criteria):
        (out / f"ranking_criterion_{d}.csv").write_text(
            ranking_to_csv(expected_ranking(matrix, d))
        )
    (out / "reliability.csv").write_text(reliability_csv(matrix, args.threshold))
    print(f"wrote reports to {out}")
    return EXIT_OK


def _cmd_weights(args) -> int:
    vectors = halton_simplex_weights(args.criteria, args.count, args.skip)
    if args.format == "json":
        print(json.dumps({"skip": args.skip, "weights": vectors.tolist()}))
    else:
        for row in vectors:
            print(",".join(repr(float(x)) for x in row))
    return EXIT_OK


def _cmd_gen_marks(args) -> int:
    criteria = [c.strip() for c in args.criteria.split(",")] if args.criteria else [
        "content", "organisation", "language",
    ]
    marks = generate_marks(args.items, criteria, args.profile, args.distribution, args.seed)
    _echo_seed(args.seed)
    text = marks_to_csv(marks)
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote {args.items} items to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayescj")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a strategy grid over marks")
    source = sim.add_mutually_exclusive_group(required=True)
    source.add_argument("--marks", help="CSV of true marks")
    source.add_argument("--synthetic", type=int, metavar="ITEMS", help="generate marks instead")
    sim.add_argument("--criteria", help="criterion names (name[:weight],...)")
    sim.add_argument("--profile", choices=sorted(PROFILES), default="relaxed")
    sim.add_argument("--distribution", choices=("uniform", "normal"), default="uniform")
    sim.add_argument("--n", default="10", help="item counts, comma separated")
    sim.add_argument("--k", default="10", help="budget multipliers, comma separated")
    sim.add_argument("--strategy", default=",".join(GRID_STRATEGIES), help="strategies, comma separated")
    sim.add_argument("--trials", type=int, default=50)
    sim.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sim.add_argument("--weights", help="fixed weight vector, comma separated")
    sim.add_argument("--qmc-weights", type=int, default=0, metavar="COUNT",
                     help="sweep this many low-discrepancy weight vectors per cell")
    sim.add_argument("--out", help="results directory")
    sim.add_argument("--emit-logs", action="store_true",
                     help="also write each trial's judgement log under <out>/logs/")
    sim.set_defaults(handler=_cmd_simulate)

    for name, handler in (("rank", _cmd_rank), ("reliability", _cmd_reliability), ("report", _cmd_report)):
        cmd = sub.add_parser(name, help=f"{name} from a judgement log")
        cmd.add_argument("--log", required=True, help="judgement log (JSON lines)")
        cmd.add_argument("--items", type=int, help="item count (inferred from the log if omitted)")
        cmd.add_argument("--criteria", help="criterion names (name[:weight],...)")
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "rank":
            cmd.add_argument("--aggregation", default="mcp",
                            help="mcp, mcr, or a criterion index")
        else:
            cmd.add_argument("--threshold", type=float, default=50.0,
                            help="flagging threshold for expected agreement")
        if name == "report":
            cmd.add_argument("--out", help="directory for CSV outputs")
        cmd.set_defaults(handler=handler)

    weights = sub.add_parser("weights", help="emit simplex weight vectors")
    weights.add_argument("--criteria", type=int, required=True)
    weights.add_argument("--count", type=int, default=50)
    weights.add_argument("--skip", type=int, default=0)
    weights.add_argument("--format", choices=("json", "csv"), default="csv")
    weights.set_defaults(handler=_cmd_weights)

    gen = sub.add_parser("gen-marks", help="emit a synthetic marks CSV")
    gen.add_argument("--items", type=int, required=True)
    gen.add_argument("--criteria", help="criterion names, comma separated")
    gen.add_argument("--profile", choices=sorted(PROFILES), default="relaxed")
    gen.add_argument("--distribution", choices=("uniform", "normal"), default="uniform")
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--out", help="output CSV path")
    gen.set_defaults(handler=_cmd_gen_marks)

    serve = sub.add_parser("serve", help="run the HTTP session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8440)
    serve.add_argument("--data-dir", help="persistence root")
    serve.set_defaults(handler=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - deliberate catch-all at the boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
