"""Command-line front end: ``clvm run`` and ``clvm bench``."""

from __future__ import annotations

import argparse
import json
import re
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from clvm.ir import ParseError, load_program
from clvm.search import SearchBudget, SolutionStream, Strategy, collect_all
from clvm.tree import export_dot
from clvm.vm import Solution

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TRUNCATED = 2

DEFAULT_MAX_STEPS = 1_000_000
_BUDGET_LINE = re.compile(r"^\s*;\s*budget:\s*(.*)$")
_BUDGET_KEYS = {"max_steps", "max_solutions", "time_limit_ms"}


def read_budget_annotations(text: str) -> dict[str, int]:
    """Collect ``; budget: key=value ...`` lines of a program file."""
    out: dict[str, int] = {}
    for line in text.splitlines():
        m = _BUDGET_LINE.match(line)
        if not m:
            continue
        for item in m.group(1).split():
            key, _, value = item.partition("=")
            if key not in _BUDGET_KEYS:
                raise ValueError(f"unknown budget key {key!r}")
            out[key] = int(value.replace("_", ""))
    return out


@dataclass
class RunConfig:
    program: str
    strategy: str = "dfs"
    max_solutions: int | None = None
    max_steps: int | None = None
    time_limit_ms: int | None = None
    iddfs_start: int = 3
    iddfs_increment: int = 2
    dot_output: str | None = None
    format: str = "text"
    strict_revert: bool = False

    def __post_init__(self) -> None:
        Strategy(self.strategy)
        for name in ("max_solutions", "max_steps", "time_limit_ms", "iddfs_start", "iddfs_increment"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RunReport:
    program: str
    strategy: str
    solutions: list[dict] = field(default_factory=list)
    steps: int = 0
    choices: int = 0
    nodes: dict[str, int] = field(default_factory=dict)
    wall_time_ms: float = 0.0
    truncated: bool = False
    exhausted: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


def solution_record(s: Solution) -> dict:
    return {"kind": s.kind, "payload": s.payload, "binding": s.binding_by_name(),
            "grounded": s.grounded}


def execute(config: RunConfig) -> tuple[RunReport, SolutionStream]:
    """Run one program under `config`; raises on unreadable or invalid input."""
    path = Path(config.program)
    text = path.read_text()
    program = load_program(path)
    annotated = read_budget_annotations(text)
    max_steps = config.max_steps or annotated.get("max_steps", DEFAULT_MAX_STEPS)
    max_solutions = config.max_solutions or annotated.get("max_solutions")
    time_limit = config.time_limit_ms or annotated.get("time_limit_ms")
    budget = SearchBudget(max_steps=max_steps, max_solutions=max_solutions,
                          wall_time=time_limit / 1000 if time_limit else None)
    stream = SolutionStream(program, config.strategy, budget,
                            (config.iddfs_start, config.iddfs_increment),
                            strict_revert=config.strict_revert)
    solutions, truncated = collect_all(stream)
    counts = stream.tree.counts()
    report = RunReport(
        program=str(path),
        strategy=config.strategy,
        solutions=[solution_record(s) for s in solutions],
        steps=stream.steps,
        choices=counts["choice"],
        nodes=counts,
        wall_time_ms=round(stream.elapsed * 1000, 3),
        truncated=truncated,
        exhausted=stream.exhausted,
    )
    return report, stream


def format_report(r: RunReport) -> str:
    lines = [f"program: {r.program}  strategy: {r.strategy}"]
    for i, s in enumerate(r.solutions, 1):
        binding = ", ".join(f"{k}={v}" for k, v in s["binding"].items())
        tag = "" if s["grounded"] else "  (labeling budget exhausted)"
        lines.append(f"solution {i}: {s['kind']} {s['payload']}  {{{binding}}}{tag}")
    nodes = " ".join(f"{k}={v}" for k, v in r.nodes.items())
    status = "truncated" if r.truncated else ("exhausted" if r.exhausted else "limit reached")
    lines.append(
        f"{len(r.solutions)} solutions, {r.steps} steps, {r.choices} choices, "
        f"nodes: {nodes}, {r.wall_time_ms:.1f} ms, {status}"
    )
    return "\n".join(lines)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = RunConfig(
            program=args.program, strategy=args.strategy, max_solutions=args.max_solutions,
            max_steps=args.max_steps, time_limit_ms=args.time_limit,
            iddfs_start=args.iddfs_start, iddfs_increment=args.iddfs_inc,
            dot_output=args.dump_tree, format=args.format, strict_revert=args.strict_revert,
        )
        report, stream = execute(config)
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if config.dot_output:
        Path(config.dot_output).write_text(export_dot(stream.tree))
    print(report.to_json() if config.format == "json" else format_report(report))
    return EXIT_TRUNCATED if report.truncated else EXIT_OK


# ---------------------------------------------------------------------------
# bench


@dataclass
class BenchRow:
    program: str
    strategy: str
    samples: int
    mean_ms: float | None = None
    median_ms: float | None = None
    solutions: int | None = None
    steps: int | None = None
    choices: int | None = None
    truncated: bool | None = None
    error: str | None = None


def bench(suite: Path, repetitions: int = 20, warmup_drop: int = 15,
          strategies: list[str] | None = None, max_steps: int | None = None) -> list[BenchRow]:
    """Time every program x strategy; the first `warmup_drop` runs are discarded."""
    if repetitions <= warmup_drop:
        raise ValueError("repetitions must exceed the number of dropped warm-up runs")
    rows = []
    for path in sorted(suite.glob("*.mas")):
        for strategy in strategies or [s.value for s in Strategy]:
            row = BenchRow(program=path.stem, strategy=strategy, samples=repetitions - warmup_drop)
            try:
                times = []
                for _ in range(repetitions):
                    report, _ = execute(RunConfig(str(path), strategy, max_steps=max_steps))
                    times.append(report.wall_time_ms)
                kept = times[warmup_drop:]
                row.mean_ms = round(statistics.fmean(kept), 3)
                row.median_ms = round(statistics.median(kept), 3)
                row.solutions = len(report.solutions)
                row.steps = report.steps
                row.choices = report.choices
                row.truncated = report.truncated
            except (OSError, ParseError, ValueError) as e:
                row.error = str(e)
            rows.append(row)
    return rows


def format_bench(rows: list[BenchRow]) -> str:
    head = f"{'program':<22}{'strategy':<8}{'n':>3}{'mean ms':>11}{'median ms':>11}{'solutions':>11}{'steps':>10}{'choices':>9}  note"
    out = [head, "-" * len(head)]
    for r in rows:
        if r.error:
            out.append(f"{r.program:<22}{r.strategy:<8}{'':>3}  error: {r.error}")
            continue
        note = "budget" if r.truncated else ""
        out.append(f"{r.program:<22}{r.strategy:<8}{r.samples:>3}{r.mean_ms:>11.2f}{r.median_ms:>11.2f}"
                   f"{r.solutions:>11}{r.steps:>10}{r.choices:>9}  {note}")
    return "\n".join(out)


def cmd_bench(args: argparse.Namespace) -> int:
    suite = Path(args.suite)
    if not suite.is_dir():
        print(f"error: {suite} is not a directory", file=sys.stderr)
        return EXIT_ERROR
    try:
        rows = bench(suite, args.reps, args.drop, args.strategy, args.max_steps)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.format == "json":
        print(json.dumps([asdict(r) for r in rows], indent=2))
    else:
        print(format_bench(rows))
    return EXIT_ERROR if any(r.error for r in rows) else EXIT_OK


# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    strategies = [s.value for s in Strategy]

    run = sub.add_parser("run", help="search one program for solutions")
    run.add_argument("program")
    run.add_argument("--strategy", choices=strategies, default="dfs")
    run.add_argument("--max-solutions", type=_positive)
    run.add_argument("--max-steps", type=_positive,
                     help=f"step budget (default: file annotation or {DEFAULT_MAX_STEPS})")
    run.add_argument("--time-limit", type=_positive, metavar="MS")
    run.add_argument("--iddfs-start", type=_positive, default=3)
    run.add_argument("--iddfs-inc", type=_positive, default=2)
    run.add_argument("--dump-tree", metavar="PATH", help="write the search tree as Graphviz DOT")
    run.add_argument("--format", choices=["text", "json"], default="text")
    run.add_argument("--strict-revert", action="store_true",
                     help="return the VM to the root after every solution")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="time every corpus program under each strategy")
    b.add_argument("suite")
    b.add_argument("--reps", type=_positive, default=20)
    b.add_argument("--drop", type=_non_negative, default=15)
    b.add_argument("--strategy", action="append", choices=strategies,
                   help="repeatable; default all")
    b.add_argument("--max-steps", type=_positive, help="override the per-file step budgets")
    b.add_argument("--format", choices=["text", "json"], default="text")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
