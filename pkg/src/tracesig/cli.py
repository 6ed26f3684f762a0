"""Command line front end.

Subcommands mirror the library pipeline:

    traces    reduce capture logs to the trace names present in every run
    derive    turn recorded observation runs into a signature file
    match     evaluate signature files against a timestamp snapshot
    simulate  execute a scenario file and write its evidence tree
    inspect   dump an observation directory's update matrix as CSV

Exit codes: 0 success (for ``match``: at least one Detected), 1 clean negative
(no signature detected), 2 usage or file format error.  Reports go to the
output stream, diagnostics to the error stream.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

logger = logging.getLogger(__name__)

from . import __version__
from .capture import filter_by_process, intersect_runs, parse_capture, unique_traces
from .capture import TraceNameSet
from .categorize import UpdateMatrix, build_update_matrix, read_observations
from .evidence import format_timestamp, parse_snapshot, parse_timestamp
from .matching import DetectionResult, Verdict, match_signature
from .signatures import (
    Signature,
    bundled_signature,
    derive_signature,
    load_signature,
    save_signature,
)
from .simulate import load_scenario, run_scenario, write_scenario_outputs

__all__ = ["main", "run"]


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_text(path: str) -> str:
    # utf-8-sig tolerates the BOM that Windows tools put on CSV exports
    return Path(path).read_text(encoding="utf-8-sig")


def _load_signatures(args: argparse.Namespace) -> list[Signature]:
    sigs = [bundled_signature(name) for name in args.bundled]
    for path in args.signature:
        sigs.append(load_signature(_read_text(path)))
    return sigs


def _union_names(observations) -> TraceNameSet:
    names = []
    for obs in observations:
        for snap in (obs.before, obs.after):
            names.extend(rec.path for rec in snap)
    return TraceNameSet.of(names)


def _names_from_file(path: str) -> TraceNameSet:
    lines = _read_text(path).splitlines()
    return TraceNameSet.of([line.strip() for line in lines if line.strip()])


# --- traces -----------------------------------------------------------------


def cmd_traces(args: argparse.Namespace) -> int:
    processes = [p.strip() for p in args.process.split(",") if p.strip()] if args.process else []
    runs = []
    for path in args.capture:
        log = parse_capture(_read_text(path))
        if processes:
            log = filter_by_process(log, processes)
        runs.append(unique_traces(log))
    names = intersect_runs(runs)
    _write_output("".join(f"{name}\n" for name in names), args.output)
    return 0


# --- derive -----------------------------------------------------------------


def cmd_derive(args: argparse.Namespace) -> int:
    observations = read_observations(args.obs)
    names = _names_from_file(args.traces) if args.traces else _union_names(observations)
    matrix = build_update_matrix(observations, names)
    if args.background:
        background = build_update_matrix(read_observations(args.background), names)
    else:
        background = UpdateMatrix.empty()
    sig = derive_signature(
        args.action, matrix, background, observations, observations[0].before,
        platform=args.platform,
    )
    _write_output(save_signature(sig), args.output)
    return 0


# --- match ------------------------------------------------------------------

_VERDICT_TEXT = {
    Verdict.DETECTED: "Detected",
    Verdict.INCONSISTENT: "Inconsistent",
    Verdict.MISSING: "Missing",
    Verdict.INAPPLICABLE: "Inapplicable",
}


def _supporting_totals(sig: Signature) -> dict[str, int]:
    totals: dict[str, set[str]] = {}
    for entry in sig.supporting:
        totals.setdefault(entry.category.label.value, set()).add(entry.template.text.lower())
    return {label: len(seen) for label, seen in totals.items()}


def _point_text(tp) -> str:
    text = tp.iso()
    if tp.precision_s > 1:
        text += f" (precision {tp.precision_s}s)"
    return text


def _render_text(sig: Signature, result: DetectionResult, now: int | None) -> str:
    lines = [f"action: {result.action}", f"platform: {sig.platform}"]
    if now is not None:
        lines.append(f"report time: {format_timestamp(now)}")
    lines.append(f"verdict: {_VERDICT_TEXT[result.verdict]}")
    lines.append(f"window: {result.window_s}s")
    lines.append(f"weak: {'yes' if result.weak else 'no'}")
    if result.sid is not None:
        lines.append(f"sid: {result.sid}")

    if result.verdict is Verdict.DETECTED:
        lo, hi = result.event_interval
        lines.append(f"event interval: [{format_timestamp(lo)}, {format_timestamp(hi)}]")
        lines.append(f"core span: {result.core_span_s}s")
        lines.append("core evidence:")
        for rc in result.resolved_core:
            lines.append(
                f"  {rc.record.kind.value:<6}  {rc.trace.field:<8}  "
                f"{_point_text(rc.timestamp):<37}  {rc.record.path}"
            )
        totals = _supporting_totals(sig)
        if totals:
            counts = result.supporting_counts()
            tally = ", ".join(
                f"{label} {counts.get(label, 0)}/{totals[label]}" for label in sorted(totals)
            )
            lines.append(f"supporting: {tally}")
        if result.launch_hint is not None:
            lines.append(f"launch hint: {result.launch_hint}")
    elif result.verdict is Verdict.INCONSISTENT:
        lines.append(
            f"core span: {result.core_span_s}s exceeds the {result.window_s}s window"
        )
        lines.append("core evidence:")
        for rc in result.resolved_core:
            lines.append(
                f"  {rc.record.kind.value:<6}  {rc.trace.field:<8}  "
                f"{_point_text(rc.timestamp):<37}  {rc.record.path}"
            )
    elif result.verdict is Verdict.MISSING:
        lines.append("missing evidence:")
        for text in result.missing:
            lines.append(f"  {text}")
    else:
        lines.append(
            "note: core relies on accessed times, which the source system did not maintain"
        )
    return "\n".join(lines) + "\n"


def _render_structured(sig: Signature, result: DetectionResult) -> dict:
    interval = None
    if result.event_interval is not None:
        lo, hi = result.event_interval
        interval = {
            "lo": lo,
            "hi": hi,
            "lo_iso": format_timestamp(lo),
            "hi_iso": format_timestamp(hi),
        }
    totals = _supporting_totals(sig)
    counts = result.supporting_counts()
    return {
        "action": result.action,
        "platform": sig.platform,
        "verdict": result.verdict.value,
        "event_interval": interval,
        "core_span_s": result.core_span_s,
        "window_s": result.window_s,
        "weak": result.weak,
        "sid": result.sid,
        "core": [
            {
                "template": rc.trace.template.text,
                "field": rc.trace.field,
                "path": rc.record.path,
                "timestamp": rc.timestamp.iso(),
                "precision_s": rc.timestamp.precision_s,
            }
            for rc in result.resolved_core
        ],
        "missing": list(result.missing),
        "supporting": {
            label: {"hits": counts.get(label, 0), "total": totals[label]}
            for label in sorted(totals)
        },
        "launch_hint": result.launch_hint,
    }


def cmd_match(args: argparse.Namespace) -> int:
    if not args.signature and not args.bundled:
        print("error: at least one --signature or --bundled is required", file=sys.stderr)
        return 2
    now = parse_timestamp(args.now) if args.now else None
    sigs = _load_signatures(args)
    snap = parse_snapshot(_read_text(args.snapshot))
    for sig in sigs:
        if sig.weak:
            logger.warning(
                "signature for %r carries %d core trace(s); corroborate any detection",
                sig.action,
                len(sig.core),
            )
    results = [match_signature(sig, snap, window_s=args.window) for sig in sigs]
    if args.format == "structured":
        payload = [_render_structured(sig, res) for sig, res in zip(sigs, results)]
        _write_output(json.dumps(payload, indent=2) + "\n", args.output)
    else:
        blocks = [_render_text(sig, res, now) for sig, res in zip(sigs, results)]
        _write_output("\n".join(blocks), args.output)
    return 0 if any(r.verdict is Verdict.DETECTED for r in results) else 1


# --- simulate ---------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(_read_text(args.scenario))
    result = run_scenario(scenario)
    write_scenario_outputs(result, args.output)
    print(
        f"wrote {len(result.snapshots)} step snapshot(s) covering "
        f"{len(result.observations)} action(s) to {args.output}"
    )
    return 0


# --- inspect ----------------------------------------------------------------


def cmd_inspect(args: argparse.Namespace) -> int:
    observations = read_observations(args.obs)
    names = _names_from_file(args.traces) if args.traces else _union_names(observations)
    matrix = build_update_matrix(observations, names)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trace", "field"] + [f"run{i}" for i in range(matrix.run_count)])
    for trace in matrix.traces():
        for field in matrix.fields_of(trace):
            vec = matrix.vector(trace, field)
            writer.writerow([matrix.display[trace], field] + ["1" if v else "0" for v in vec])
    _write_output(buf.getvalue(), args.output)
    return 0


# --- wiring -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracesig",
        description="Derive and match timestamp-update signatures of user actions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("traces", help="trace names present in every capture run")
    p.add_argument("--capture", action="append", required=True, metavar="FILE",
                   help="capture CSV; repeat for one file per run")
    p.add_argument("--process", metavar="LIST",
                   help="comma-separated process names to keep (default: all)")
    p.add_argument("-o", "--output", metavar="FILE", help="default: standard output")
    p.set_defaults(func=cmd_traces)

    p = sub.add_parser("derive", help="derive a signature from observation runs")
    p.add_argument("--obs", required=True, metavar="DIR",
                   help="runNNN_before/after.csv pairs plus sessions.csv")
    p.add_argument("--background", metavar="DIR",
                   help="observation runs of ambient activity without the action")
    p.add_argument("--action", required=True, metavar="NAME")
    p.add_argument("--platform", default="unknown", metavar="NAME")
    p.add_argument("--traces", metavar="FILE",
                   help="restrict to these trace names, one per line")
    p.add_argument("-o", "--output", metavar="FILE", help="default: standard output")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("match", help="evaluate signatures against a snapshot")
    p.add_argument("--signature", action="append", default=[], metavar="FILE")
    p.add_argument("--bundled", action="append", default=[], metavar="NAME",
                   help="use a signature shipped with the package")
    p.add_argument("--snapshot", required=True, metavar="FILE")
    p.add_argument("--window", type=int, metavar="SECONDS",
                   help="override each signature's consistency window")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--now", metavar="TIMESTAMP",
                   help="report timestamp to display; never affects verdicts")
    p.add_argument("-o", "--output", metavar="FILE", help="default: standard output")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("--scenario", required=True, metavar="FILE")
    p.add_argument("-o", "--output", required=True, metavar="DIR")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inspect", help="dump an observation update matrix as CSV")
    p.add_argument("--obs", required=True, metavar="DIR")
    p.add_argument("--traces", metavar="FILE",
                   help="restrict to these trace names, one per line")
    p.add_argument("-o", "--output", metavar="FILE", help="default: standard output")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        return int(exc.code or 0)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    pkg_logger = logging.getLogger("tracesig")
    pkg_logger.addHandler(handler)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 2
    finally:
        pkg_logger.removeHandler(handler)


def run() -> None:
    sys.exit(main(sys.argv[1:]))
