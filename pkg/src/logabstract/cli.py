"""Command-line interface.

Exit codes: 0 success, 1 bad input or configuration, 2 infeasible
constraints (the original log is written unchanged), 3 time limit reached
before any grouping was found.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
from pathlib import Path

from .abstraction import AbstractionStrategy
from .candidates import DEFAULT_TIMEOUT, CandidateSet, Provenance, compute_candidates, group_key
from .constraints import ConstraintSet, load_constraints, validate_against_log
from .dfg import compute_dfg, export_dot, to_dot
from .errors import Infeasible, LogAbstractionError, SolverTimeout
from .events import EventLog, load_log, write_log
from .groups import GroupEvaluator
from .metrics import class_distances, quality_report
from .optimizer import CoverProblem, diagnose, solve_exact
from .pipeline import AbstractionResult, finish, run, select_grouping

logger = logging.getLogger("logabstract")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TIMEOUT = 0, 1, 2, 3

ENGINES = {"exh": "exhaustive", "dfg": "dfg", "dfg-k": "dfg-k"}
STRATEGIES = {"complete": AbstractionStrategy.COMPLETION_ONLY,
              "start-complete": AbstractionStrategy.START_AND_COMPLETE}


def _dump_json(obj, path: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value
    return conv


def _add_log_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("log", type=Path, help="event log (CSV or JSONL)")
    p.add_argument("--format", choices=["csv", "jsonl"], help="log format (default: from suffix)")
    p.add_argument("--case-col", default="case")
    p.add_argument("--class-col", default="class")
    p.add_argument("--time-col", default="time")


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--constraints", type=Path, help="constraint document (default: none)")
    p.add_argument("--engine", choices=sorted(ENGINES), default="exh")
    p.add_argument("--beam", type=_positive(int), help="beam width for dfg-k (default: 5 x number of classes)")
    p.add_argument("--timeout", type=_positive(float), default=DEFAULT_TIMEOUT, help="seconds per stage")
    p.add_argument("--threads", type=_positive(int), default=os.cpu_count() or 1)


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=sorted(STRATEGIES), default="complete")
    p.add_argument("--name-attr", help="class attribute whose shared value prefixes activity names")
    p.add_argument("--keep-fraction", type=float, default=1.0, help="fraction of DFG edges drawn in DOT output")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logabstract", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("abstract", help="full pipeline: candidates, grouping, abstracted log")
    _add_log_args(p)
    _add_search_args(p)
    _add_output_args(p)

    p = sub.add_parser("candidates", help="write candidate groups as JSONL")
    _add_log_args(p)
    _add_search_args(p)
    p.add_argument("--no-merge", action="store_true", help="skip merging of exclusive alternatives")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("solve", help="select a grouping from a candidates JSONL file and abstract")
    _add_log_args(p)
    p.add_argument("--candidates", type=Path, required=True)
    p.add_argument("--constraints", type=Path)
    p.add_argument("--timeout", type=_positive(float), default=DEFAULT_TIMEOUT)
    _add_output_args(p)

    p = sub.add_parser("dfg", help="write the directly-follows graph as DOT")
    _add_log_args(p)
    p.add_argument("--keep-fraction", type=float, default=1.0)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("metrics", help="quality measures of an abstraction")
    _add_log_args(p)
    p.add_argument("abstracted", type=Path, help="abstracted event log")
    p.add_argument("--grouping", type=Path,
                   help="grouping.json of the run (default: identity, if class sets agree)")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")

    p = sub.add_parser("diagnose", help="explain why no grouping satisfies the constraints")
    _add_log_args(p)
    _add_search_args(p)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    return parser


def _load(args) -> EventLog:
    cols = {"case": args.case_col, "class": args.class_col, "timestamp": args.time_col}
    return load_log(args.log, args.format, cols)


def _constraints(args, log: EventLog) -> ConstraintSet:
    rs = load_constraints(args.constraints) if args.constraints else ConstraintSet()
    validate_against_log(rs, log)
    return rs


def _log_suffix(args) -> str:
    fmt = args.format or ("jsonl" if args.log.suffix.lower() in (".jsonl", ".ndjson", ".json") else "csv")
    return ".jsonl" if fmt == "jsonl" else ".csv"


def _candidates(args, log, rs) -> CandidateSet:
    return compute_candidates(log, rs, ENGINES[args.engine], args.beam, args.timeout,
                              threads=args.threads, merge=not getattr(args, "no_merge", False))


def _write_result(args, result: AbstractionResult, rs: ConstraintSet) -> int:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    suffix = _log_suffix(args)
    export_dot(compute_dfg(result.log), out / "dfg_original.dot", args.keep_fraction)
    if not result.feasible:
        shutil.copyfile(args.log, out / f"abstracted{suffix}")
        _dump_json(result.infeasibility.to_dict(), out / "infeasibility.json")
        logger.error("constraints cannot be satisfied; original log written unchanged")
        return EXIT_INFEASIBLE
    write_log(result.abstracted, out / f"abstracted{suffix}")
    export_dot(compute_dfg(result.abstracted), out / "dfg_abstracted.dot", args.keep_fraction)
    grouping = result.grouping
    names = result.names
    _dump_json([{"activity": names[g], "classes": sorted(g)} for g in sorted(grouping.groups, key=lambda g: names[g])],
               out / "activity_names.json")
    doc = grouping.to_dict()
    for entry in doc["groups"]:
        entry["activity"] = names[frozenset(entry["classes"])]
    doc["candidates_truncated"] = bool(result.candidates and result.candidates.truncated)
    doc["constraints"] = [str(c) for c in rs]
    _dump_json(doc, out / "grouping.json")
    _dump_json(result.quality.to_dict(), out / "quality.json")
    if not args.no_figures:
        from .plotting import plot_class_distances, plot_group_distances

        plot_group_distances({names[g]: grouping.distances[g] for g in grouping.groups},
                             out / "group_distances.png")
        classes, matrix = class_distances(result.log)
        owner = {c: names[g] for g in grouping.groups for c in g}
        plot_class_distances(classes, matrix, owner, out / "class_distances.png")
    return EXIT_OK


def cmd_abstract(args) -> int:
    log = _load(args)
    rs = _constraints(args, log)
    result = run(log, rs, ENGINES[args.engine], args.beam, STRATEGIES[args.strategy], args.timeout,
                 threads=args.threads, name_attr=args.name_attr)
    return _write_result(args, result, rs)


def candidates_to_jsonl(cands: CandidateSet, evaluator: GroupEvaluator) -> str:
    lines = []
    for g in sorted(cands.groups, key=group_key):
        obj = {"classes": sorted(g), "distance": evaluator.distance(g), "provenance": cands.groups[g].value}
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def read_candidates(path: Path) -> CandidateSet:
    cands = CandidateSet()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                cands.add(obj["classes"], Provenance(obj.get("provenance", "exhaustive")))
            except (ValueError, KeyError, TypeError) as exc:
                raise LogAbstractionError(f"{path}:{lineno}: bad candidate record ({exc})") from None
    return cands


def cmd_candidates(args) -> int:
    log = _load(args)
    rs = _constraints(args, log)
    cands = _candidates(args, log, rs)
    text = candidates_to_jsonl(cands, GroupEvaluator(log, rs.max_per_class))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
    if cands.truncated:
        logger.warning("candidate search hit the time limit; output is partial")
    return EXIT_OK


def cmd_solve(args) -> int:
    log = _load(args)
    rs = _constraints(args, log)
    cands = read_candidates(args.candidates)
    unknown = sorted({c for g in cands.groups for c in g} - log.classes)
    if unknown:
        raise LogAbstractionError(f"candidates mention classes not in the log: {unknown}")
    try:
        grouping = select_grouping(log, rs, cands, args.timeout)
    except Infeasible as exc:
        result = AbstractionResult(log, log, cands, None, {}, None, exc.report)
    else:
        result = finish(log, rs, grouping, STRATEGIES[args.strategy], args.name_attr, cands)
    return _write_result(args, result, rs)


def cmd_dfg(args) -> int:
    log = _load(args)
    text = to_dot(compute_dfg(log), args.keep_fraction)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_metrics(args) -> int:
    log = _load(args)
    abstracted = load_log(args.abstracted)
    if args.grouping is not None:
        doc = json.loads(args.grouping.read_text(encoding="utf-8"))
        groups = [frozenset(e["classes"]) for e in doc["groups"]]
    elif abstracted.classes == log.classes:
        groups = [frozenset([c]) for c in sorted(log.classes)]
    else:
        raise LogAbstractionError("--grouping is required unless the abstraction is the identity")
    report = quality_report(groups, log, abstracted)
    _dump_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    log = _load(args)
    rs = _constraints(args, log)
    cands = _candidates(args, log, rs)
    problem = CoverProblem.from_candidates(cands, log, rs)
    try:
        solve_exact(problem, args.timeout)
    except Infeasible:
        _dump_json({"feasible": False, **diagnose(problem, rs, log).to_dict()}, args.out)
        return EXIT_INFEASIBLE
    _dump_json({"feasible": True}, args.out)
    return EXIT_OK


COMMANDS = {
    "abstract": cmd_abstract,
    "candidates": cmd_candidates,
    "solve": cmd_solve,
    "dfg": cmd_dfg,
    "metrics": cmd_metrics,
    "diagnose": cmd_diagnose,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    if getattr(args, "keep_fraction", 1.0) is not None and not 0 < getattr(args, "keep_fraction", 1.0) <= 1:
        parser.error("--keep-fraction must lie in (0, 1]")
    try:
        return COMMANDS[args.command](args)
    except SolverTimeout as exc:
        logger.error("%s", exc)
        return EXIT_TIMEOUT
    except Infeasible as exc:
        logger.error("%s", exc)
        return EXIT_INFEASIBLE
    except (LogAbstractionError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
