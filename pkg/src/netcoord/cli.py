"""Command line entry point: gen, run, eval, report, plot, oracle."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import NetCoordError
from .harness.config import load_config
from .harness.runner import iter_experiment, labelled, load_records, reevaluate
from .harness.stats import build_reports, expected_cells
from .protocol import RunTranscript, answers_from_transcript
from .tasks import ORACLE_MAX_NODES, TaskKind, TaskSpec, oracle_check
from .topology import BENCHMARK_SIZES, SCALING_SIZES, GraphFamily, Topology, iter_suite, metrics

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2
EXIT_EMPTY = 3

log = logging.getLogger("netcoord")


def cmd_gen(args) -> int:
    sizes = args.sizes or (SCALING_SIZES if args.preset == "scaling" else BENCHMARK_SIZES)
    families = [GraphFamily.parse(f) for f in args.families] if args.families else list(GraphFamily)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for e in iter_suite(sizes, families, args.per_cell, args.seed):
        e.topology.save(out / f"{e.topology.ref}.txt")
        m = metrics(e.topology)
        print(f"{e.topology.ref}\tn={e.size}\tedges={len(e.topology.edges)}"
              f"\tmax_degree={m.max_degree}\tdiameter={m.diameter}")
        count += 1
    print(f"wrote {count} topologies to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    failures = total = 0
    for rec in iter_experiment(cfg, resume=not args.fresh):
        total += 1
        failures += rec.failed
        status = "FAILED" if rec.failed else f"solved={rec.solved} soft={rec.soft_score:.3f}"
        print(f"{rec.run_id}\tT={rec.rounds}\t{status}", flush=True)
    print(f"{total} runs executed ({failures} failed); results in {cfg.out_dir}")
    return EXIT_OK


def _records_and_cells(dirs):
    records, expected = [], set()
    for d in dirs:
        records.extend(load_records(d))
        cfg_path = Path(d) / "config.yaml"
        if cfg_path.exists():
            cfg = load_config(cfg_path)
            expected |= expected_cells(cfg.suite.sizes, cfg.tasks, cfg.suite.families)
    return records, expected or None


def cmd_eval(args) -> int:
    stored = {r.run_id: r for r in load_records(args.dir)}
    fresh = reevaluate(args.dir)
    changed = [r for r in fresh if (r.solved, r.soft_score) !=
               (stored[r.run_id].solved, stored[r.run_id].soft_score)]
    for r in changed:
        old = stored[r.run_id]
        print(f"{r.run_id}: stored solved={old.solved} soft={old.soft_score} "
              f"recomputed solved={r.solved} soft={r.soft_score}")
    print(f"re-evaluated {len(fresh)} runs; {len(changed)} differ from the records file")
    return EXIT_MISMATCH if changed else EXIT_OK


def cmd_report(args) -> int:
    from .harness.report import emit_full_report, emit_report

    records, expected = _records_and_cells(args.dirs)
    reports = build_reports(records, expected, args.allow_partial)
    emit = emit_full_report if args.full else emit_report
    if not reports:
        if not args.allow_partial:
            print("error: no records found", file=sys.stderr)
            return EXIT_ERROR
        print(emit_report([], args.format), end="")
        return EXIT_EMPTY
    text = emit(reports, args.format, args.digits)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    for r in reports:
        if r.partial:
            print(f"warning: {r.model} is missing {len(r.missing)} cells", file=sys.stderr)
    return EXIT_OK


def cmd_plot(args) -> int:
    from .harness.plots import emit_plots

    records, expected = _records_and_cells(args.dirs)
    reports = build_reports(records, expected, allow_partial=True)
    if not reports:
        print("no records found", file=sys.stderr)
        return EXIT_EMPTY
    for path in emit_plots(reports, args.out):
        print(path)
    return EXIT_OK


def cmd_oracle(args) -> int:
    out = Path(args.dir)
    checked = mismatched = skipped = 0
    for rec in load_records(out):
        if rec.failed or (args.run and rec.run_id != args.run):
            continue
        t = labelled(Topology.load(out / "topologies" / f"{rec.topology_ref}.txt"))
        if t.n > ORACLE_MAX_NODES:
            skipped += 1
            continue
        kind = TaskKind.parse(rec.task)
        spec = TaskSpec.for_topology(kind, t)
        tr = RunTranscript.from_jsonl((out / "transcripts" / f"{rec.run_id}.jsonl").read_text())
        verdict = oracle_check(kind, t, answers_from_transcript(tr, spec, t.names()))
        checked += 1
        if int(verdict) != rec.solved:
            mismatched += 1
            print(f"{rec.run_id}: record solved={rec.solved}, oracle says {int(verdict)}")
    print(f"oracle checked {checked} runs, {mismatched} mismatches, "
          f"{skipped} skipped (more than {ORACLE_MAX_NODES} nodes)")
    return EXIT_MISMATCH if mismatched else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netcoord", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write suite topologies to a directory")
    p.add_argument("--out", required=True)
    p.add_argument("--preset", choices=["benchmark", "scaling"], default="benchmark")
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--families", nargs="+")
    p.add_argument("--per-cell", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("run", help="execute (or resume) an experiment from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", help="override the config's out_dir")
    p.add_argument("--fresh", action="store_true", help="discard earlier records instead of resuming")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("eval", help="recompute scores from stored transcripts")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("report", help="print result tables")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--format", choices=["text", "delimited", "markdown"], default="text")
    p.add_argument("--digits", type=int, default=2)
    p.add_argument("--full", action="store_true", help="add size, soft-score and usage tables")
    p.add_argument("--allow-partial", action="store_true",
                   help="aggregate even if configured cells have no runs")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("plot", help="write figures and their data files")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("oracle", help="check stored answers with brute-force validators")
    p.add_argument("dir")
    p.add_argument("--run", help="only this run id")
    p.set_defaults(fn=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except NetCoordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
