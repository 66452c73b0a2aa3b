"""Command-line front end.

Subcommands: count (size statistics), skeleton (hole structure dump),
enumerate (write variant files + manifest), test (differential
campaign), stats (aggregate an outcome log).

Exit codes, shared by all subcommands: 0 success / no findings,
1 findings produced, 2 configuration or parse error, 3 enumeration
refused because the variant count exceeds the threshold.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .combinat import Mode, count_plan
from .enumerator import canonical_signature, plan, variants
from .harness import (
    DEFAULT_THRESHOLD,
    ConfigError,
    ToolchainConfig,
    read_log,
    run_campaign,
)
from .minilang.parser import ParseError, parse
from .skeleton import Granularity, extract, to_json

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_CONFIG = 2
EXIT_THRESHOLD = 3


def _mode_option(f):
    return click.option(
        "--mode",
        type=click.Choice(["paper", "complete"]),
        default="complete",
        show_default=True,
        help="Partition semantics: the flat two-level procedure or the full scoped solution.",
    )(f)


def _granularity_option(f):
    return click.option(
        "--granularity",
        type=click.Choice(["intra", "inter"]),
        default="intra",
        show_default=True,
        help="Combine per-function streams by product, or solve one program-wide problem.",
    )(f)


def _decl_holes_option(f):
    return click.option(
        "--decl-holes",
        is_flag=True,
        help="Treat declaration names as holes too.",
    )(f)


def _budget_options(f):
    f = click.option(
        "--threshold",
        type=int,
        default=None,
        help=f"Refuse files whose variant count exceeds this [default: {DEFAULT_THRESHOLD}].",
    )(f)
    f = click.option(
        "--cap",
        type=int,
        default=None,
        help="Take the first N variants of the stream instead of refusing.",
    )(f)
    return f


def _resolve_budget(threshold: Optional[int], cap: Optional[int]) -> tuple[int, Optional[int]]:
    if threshold is not None and cap is not None:
        raise click.UsageError("--threshold and --cap are mutually exclusive")
    return (threshold if threshold is not None else DEFAULT_THRESHOLD), cap


def _parse_corpus(paths: tuple[str, ...]) -> tuple[list[tuple[Path, object]], bool]:
    """Parse every path; diagnostics go to stderr. Returns (parsed list,
    had_errors)."""
    parsed = []
    bad = False
    for p in paths:
        path = Path(p)
        try:
            parsed.append((path, parse(path.read_text())))
        except (OSError, ParseError) as e:
            click.echo(f"{path}: {e}", err=True)
            bad = True
    return parsed, bad


@click.group()
@click.version_option(package_name="spe")
def main() -> None:
    """Skeletal program enumeration for compiler testing."""


# ---------------------------------------------------------------------------
# count

@main.command("count")
@click.argument("paths", nargs=-1, type=click.Path())
@_mode_option
@_granularity_option
@_decl_holes_option
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "json"]),
    default="table",
    show_default=True,
)
def cmd_count(paths, mode, granularity, decl_holes, fmt) -> None:
    """Per-file and corpus-wide variant counts with the size reduction
    relative to naive enumeration."""
    parsed, bad = _parse_corpus(paths)
    if bad:
        sys.exit(EXIT_CONFIG)

    gran = Granularity(granularity)
    rows = []
    for path, program in parsed:
        skel = extract(program, decl_holes=decl_holes)
        report = count_plan(skel, gran)
        selected = (
            report.paper_mode_count if mode == "paper" else report.complete_mode_count
        )
        rows.append(
            {
                "file": str(path),
                "holes": skel.n,
                "naive": report.naive_count,
                "paper": report.paper_mode_count,
                "complete": report.complete_mode_count,
                "enumerated": selected,
                "reduction": (report.naive_count / selected) if selected else None,
            }
        )

    total_naive = sum(r["naive"] for r in rows)
    enum_known = [r["enumerated"] for r in rows if r["enumerated"] is not None]
    total_enum = sum(enum_known) if len(enum_known) == len(rows) else None
    totals = {
        "files": len(rows),
        "naive": total_naive,
        "enumerated": total_enum,
        "reduction": (total_naive / total_enum) if total_enum else None,
    }

    if fmt == "json":
        click.echo(json.dumps({"schema": 1, "files": rows, "totals": totals}, indent=2))
        return

    header = f"{'file':<40} {'holes':>5} {'naive':>12} {'paper':>12} {'complete':>12} {'reduction':>9}"
    click.echo(header)
    click.echo("-" * len(header))
    for r in rows:
        paper = "-" if r["paper"] is None else str(r["paper"])
        red = "-" if r["reduction"] is None else f"{r['reduction']:.1f}x"
        click.echo(
            f"{r['file']:<40} {r['holes']:>5} {r['naive']:>12} {paper:>12} {r['complete']:>12} {red:>9}"
        )
    if rows:
        click.echo("-" * len(header))
        red = "-" if totals["reduction"] is None else f"{totals['reduction']:.1f}x"
        enum_s = "-" if total_enum is None else str(total_enum)
        click.echo(
            f"{'total':<40} {'':>5} {total_naive:>12} {'':>12} {enum_s:>12} {red:>9}"
        )


# ---------------------------------------------------------------------------
# skeleton

@main.command("skeleton")
@click.argument("paths", nargs=-1, type=click.Path())
@_decl_holes_option
def cmd_skeleton(paths, decl_holes) -> None:
    """Dump each file's skeleton (holes, variable sets, scopes) as JSON."""
    parsed, bad = _parse_corpus(paths)
    if bad:
        sys.exit(EXIT_CONFIG)
    docs = []
    for path, program in parsed:
        doc = to_json(extract(program, decl_holes=decl_holes))
        doc["file"] = str(path)
        docs.append(doc)
    click.echo(json.dumps({"schema": 1, "skeletons": docs}, indent=2))


# ---------------------------------------------------------------------------
# enumerate

def _signature_doc(sig) -> list:
    return [
        {"unit": unit, "type": type_, "config": list(config), "rgs": [list(r) for r in rgs]}
        for unit, type_, config, rgs in sig.parts
    ]


@main.command("enumerate")
@click.argument("paths", nargs=-1, type=click.Path())
@_mode_option
@_granularity_option
@_decl_holes_option
@_budget_options
@click.option(
    "--out",
    type=click.Path(file_okay=False),
    required=True,
    help="Directory to write variant files and manifests into.",
)
def cmd_enumerate(paths, mode, granularity, decl_holes, threshold, cap, out) -> None:
    """Write every variant as <stem>__v<seq>.c plus a manifest mapping
    stream positions to canonical signatures."""
    try:
        threshold, cap = _resolve_budget(threshold, cap)
    except click.UsageError:
        raise
    parsed, bad = _parse_corpus(paths)
    if bad:
        sys.exit(EXIT_CONFIG)

    m = Mode(mode)
    gran = Granularity(granularity)
    out_dir = Path(out)

    for path, program in parsed:
        skel = extract(program, decl_holes=decl_holes)
        pl = plan(skel, m, gran, threshold, cap)
        if not pl.supported:
            click.echo(
                f"{path}: paper mode unsupported here (nested local scopes)", err=True
            )
            sys.exit(EXIT_CONFIG)
        if cap is None and pl.selected_count > threshold:
            click.echo(
                f"{path}: {pl.selected_count} variants exceeds threshold {threshold}; "
                "pass --cap to take a prefix",
                err=True,
            )
            sys.exit(EXIT_THRESHOLD)

        stem = path.stem
        vdir = out_dir / stem
        vdir.mkdir(parents=True, exist_ok=True)
        emitted = min(pl.selected_count, cap) if cap is not None else pl.selected_count
        width = len(str(max(emitted, 1)))
        entries = []
        written = 0
        for v in variants(skel, m, gran, limit=cap):
            sig = canonical_signature(skel, v.assignment, gran)
            entry = {
                "seq": v.seq,
                "valid": v.ok,
                "assignment": list(v.assignment.values),
                "signature": _signature_doc(sig),
            }
            if v.ok:
                fname = f"{stem}__v{v.seq:0{width}d}.c"
                (vdir / fname).write_text(v.source)
                entry["file"] = fname
                written += 1
            else:
                entry["error"] = v.error
            entries.append(entry)
        manifest = {
            "schema": 1,
            "stem": stem,
            "source": str(path),
            "mode": m.value,
            "granularity": gran.value,
            "decl_holes": decl_holes,
            "count": pl.selected_count,
            "emitted": len(entries),
            "written": written,
            "invalid": len(entries) - written,
            "variants": entries,
        }
        (vdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )
        click.echo(f"{path}: wrote {written} variants to {vdir}")


# ---------------------------------------------------------------------------
# test

@main.command("test")
@click.argument("paths", nargs=-1, type=click.Path())
@_mode_option
@_granularity_option
@_decl_holes_option
@_budget_options
@click.option("--config", type=click.Path(dir_okay=False), default=None,
              help="Toolchain JSON; defaults to gcc/clang found on PATH.")
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Campaign output directory (variants, reports, outcome log).")
def cmd_test(paths, mode, granularity, decl_holes, threshold, cap, config, out) -> None:
    """Run a differential-testing campaign over the corpus."""
    try:
        threshold, cap = _resolve_budget(threshold, cap)
    except click.UsageError:
        raise
    try:
        cfg = ToolchainConfig.from_file(config) if config else ToolchainConfig.detect()
        summary = run_campaign(
            corpus=list(paths),
            cfg=cfg,
            out_dir=out,
            threshold=threshold,
            cap=cap,
            mode=Mode(mode),
            granularity=Granularity(granularity),
            decl_holes=decl_holes,
        )
    except ConfigError as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    t = summary["totals"]
    click.echo(
        f"files: {t['files']} tested: {t['tested']} skipped: {t['skipped']} "
        f"unparseable: {t['unparseable']}"
    )
    red = t["reduction"]
    red_s = f"{red:.1f}x" if red else "-"
    click.echo(f"naive: {t['naive']} enumerated: {t['enumerated']} reduction: {red_s}")
    click.echo(f"reports: {len(summary['reports'])} (see {Path(out) / 'reports'})")
    for name in summary["reports"]:
        click.echo(f"  {name}")
    sys.exit(EXIT_FINDINGS if summary["reports"] else EXIT_OK)


# ---------------------------------------------------------------------------
# stats

@main.command("stats")
@click.argument("log", type=click.Path(exists=True, dir_okay=False))
def cmd_stats(log) -> None:
    """Aggregate an outcome log (outcomes.jsonl) into per-compiler and
    per-status totals."""
    rows = list(read_log(log).values())
    by_compiler: dict[str, dict[str, int]] = {}
    signatures: set[str] = set()
    for row in rows:
        status = row["compile"]["status"]
        agg = by_compiler.setdefault(row["compiler"], {})
        agg[status] = agg.get(status, 0) + 1
        if status == "crash":
            signatures.add(row["compile"]["signature"])
    doc = {
        "schema": 1,
        "rows": len(rows),
        "variants": len({row["variant"] for row in rows}),
        "compilers": {k: dict(sorted(v.items())) for k, v in sorted(by_compiler.items())},
        "distinct_crash_signatures": sorted(signatures),
    }
    click.echo(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
