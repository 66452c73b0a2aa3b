"""Differential-testing harness over enumerated variants.

A campaign walks a corpus of source files, enumerates each file's
variants, and evaluates every variant under every (compiler, flags)
cell of the toolchain matrix, with the reference interpreter as ground
truth. Compile crashes are deduplicated by normalized diagnostic
signature; output disagreements on UB-free variants become wrong-code
candidates. All outcomes land in an append-only JSONL log keyed by
(variant id, compiler, flags), so re-running a campaign is idempotent
and worker scheduling cannot change the persisted result.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
import re
import shlex
import shutil
import stat
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .combinat import Mode
from .enumerator import plan, variants
from .minilang.interp import Status, interpret
from .minilang.parser import ParseError, parse
from .skeleton import Granularity, extract

__all__ = [
    "SCHEMA_VERSION",
    "DEFAULT_THRESHOLD",
    "DEFAULT_FLAG_MATRIX",
    "ConfigError",
    "CompilerSpec",
    "ToolchainConfig",
    "normalize_signature",
    "differential_verdict",
    "run_campaign",
    "read_log",
]

SCHEMA_VERSION = 1
DEFAULT_THRESHOLD = 10_000
DEFAULT_FLAG_MATRIX: tuple[tuple[str, ...], ...] = (("-O0",), ("-O3",))
DEFAULT_TIMEOUT_S = 30
DEFAULT_WORKERS = 4

# compile output that marks a crash even when the process exits normally
_ICE_MARKERS = (
    "internal compiler error",
    "Segmentation fault",
    "Assertion",
    "UNREACHABLE executed",
    "PLEASE submit a bug report",
)


class ConfigError(Exception):
    """Toolchain configuration is unusable; raised before any work."""


@dataclass(frozen=True)
class CompilerSpec:
    """One compiler entry: a display name and a command template using
    the placeholders {input}, {output} and {flags}."""

    name: str
    cmd: str

    def binary(self) -> str:
        return shlex.split(self.cmd)[0]

    def argv(self, input_path: str, output_path: str, flags: Sequence[str]) -> list[str]:
        out: list[str] = []
        for tok in shlex.split(self.cmd):
            if tok == "{flags}":
                out.extend(flags)
            else:
                out.append(tok.replace("{input}", input_path).replace("{output}", output_path))
        return out


@dataclass(frozen=True)
class ToolchainConfig:
    compilers: tuple[CompilerSpec, ...]
    flags: tuple[tuple[str, ...], ...] = DEFAULT_FLAG_MATRIX
    timeout_s: int = DEFAULT_TIMEOUT_S
    workers: int = DEFAULT_WORKERS

    def validate(self) -> None:
        """Shape and executability checks; ConfigError on the first
        problem so a bad setup never reaches enumeration."""
        if not self.compilers:
            raise ConfigError("no compilers configured")
        if self.timeout_s < 1:
            raise ConfigError(f"timeout_s must be >= 1, got {self.timeout_s}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.flags:
            raise ConfigError("flag matrix is empty")
        for spec in self.compilers:
            if spec.cmd.count("{input}") != 1:
                raise ConfigError(
                    f"compiler {spec.name!r}: template must contain {{input}} exactly once"
                )
            if "{output}" not in spec.cmd:
                raise ConfigError(f"compiler {spec.name!r}: template lacks {{output}}")
            binary = spec.binary()
            if "{" in binary:
                raise ConfigError(f"compiler {spec.name!r}: first token may not be a placeholder")
            if os.sep in binary:
                found = os.path.isfile(binary) and os.access(binary, os.X_OK)
            else:
                found = shutil.which(binary) is not None
            if not found:
                raise ConfigError(f"compiler {spec.name!r}: binary {binary!r} not found")

    def cells(self) -> Iterator[tuple[CompilerSpec, tuple[str, ...]]]:
        for spec in self.compilers:
            for flags in self.flags:
                yield spec, flags

    @classmethod
    def from_dict(cls, data: dict) -> "ToolchainConfig":
        try:
            compilers = tuple(
                CompilerSpec(name=str(c["name"]), cmd=str(c["cmd"]))
                for c in data["compilers"]
            )
        except (KeyError, TypeError) as e:
            raise ConfigError(f"malformed compilers list: {e}") from e
        flags = tuple(tuple(str(f) for f in row) for row in data.get("flags", DEFAULT_FLAG_MATRIX))
        return cls(
            compilers=compilers,
            flags=flags,
            timeout_s=int(data.get("timeout_s", DEFAULT_TIMEOUT_S)),
            workers=int(data.get("workers", DEFAULT_WORKERS)),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ToolchainConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot load toolchain config {path}: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def detect(cls) -> "ToolchainConfig":
        """Default matrix from whatever system compilers are on PATH."""
        compilers = tuple(
            CompilerSpec(name=name, cmd=f"{name} -std=c89 {{flags}} -o {{output}} {{input}}")
            for name in ("gcc", "clang")
            if shutil.which(name)
        )
        if not compilers:
            raise ConfigError("no system compiler found (looked for gcc, clang)")
        return cls(compilers=compilers)


# ---------------------------------------------------------------------------
# Signatures and verdicts

_DIAG_LINE = re.compile(
    r"internal compiler error|Assertion|assert|Segmentation fault|fatal error|UNREACHABLE|error:"
)
_PATH_PREFIX = re.compile(r"(?:/[\w.+-]+)+/")
_NUMBER = re.compile(r"\d+")


def normalize_signature(stderr: str, exit_status: int) -> str:
    """Collapse a crash's diagnostics to a stable signature.

    First diagnostic-looking line wins; directory prefixes are dropped
    (temp paths differ per run), numbers become '#' (positions drift
    across inputs), whitespace is collapsed. No usable line at all
    degrades to "signal:<code>".
    """
    line = ""
    fallback = ""
    for cand in stderr.splitlines():
        if not cand.strip():
            continue
        if not fallback:
            fallback = cand
        if _DIAG_LINE.search(cand):
            line = cand
            break
    line = line or fallback
    if not line:
        # subprocess reports signal deaths as negative return codes
        return f"signal:{-exit_status if exit_status < 0 else exit_status}"
    line = _PATH_PREFIX.sub("", line)
    line = _NUMBER.sub("#", line)
    return " ".join(line.split())


def differential_verdict(rows: Sequence[dict]) -> dict:
    """Judge one variant's outcome rows: {"status": "ok"} or a
    wrong-code candidate naming every cell whose (exit, stdout digest)
    differs from the interpreter's.

    Needs at least two successfully compiled-and-run cells; variants
    the interpreter flags as UB or budget-exhausted are excluded.
    """
    if not rows:
        return {"status": "ok"}
    interp = rows[0].get("interp") or {}
    if interp.get("verdict") != "ok":
        return {"status": "ok"}
    ran = [
        r
        for r in rows
        if r["compile"]["status"] == "ok"
        and r.get("run")
        and not r["run"].get("timeout")
    ]
    if len(ran) < 2:
        return {"status": "ok"}
    expected = (interp["exit"], interp["stdout_sha256"])
    bad = sorted(
        f"{r['compiler']}:{' '.join(r['flags'])}"
        for r in ran
        if (r["run"]["exit"], r["run"]["stdout_sha256"]) != expected
    )
    if not bad:
        return {"status": "ok"}
    return {
        "status": "wrong-code",
        "cells": bad,
        "expected": {"exit": expected[0], "stdout_sha256": expected[1]},
    }


# ---------------------------------------------------------------------------
# Cell execution

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _run_env() -> dict[str, str]:
    # reproducible signatures: nothing from the caller's environment
    # leaks into compiler invocations except the search path
    return {"PATH": os.environ.get("PATH", "")}


def _tmp_root() -> Optional[str]:
    root = os.environ.get("SPE_TMPDIR")
    if root:
        Path(root).mkdir(parents=True, exist_ok=True)
    return root or None


def _interp_record(program) -> dict:
    res = interpret(program)
    if res.status is Status.OK:
        verdict = "ok"
    elif res.status is Status.STEP_BUDGET_EXHAUSTED:
        verdict = "budget"
    else:
        verdict = "ub"
    rec = {
        "verdict": verdict,
        "exit": res.exit_code,
        "stdout_sha256": _sha256(res.stdout.encode()),
    }
    if res.ub_kind is not None:
        rec["kind"] = res.ub_kind.name.lower()
    return rec


def _evaluate_cell(
    spec: CompilerSpec,
    flags: tuple[str, ...],
    variant_id: str,
    source_path: Path,
    interp_rec: dict,
    timeout_s: int,
) -> dict:
    """Compile and (on success) run one variant under one cell, inside
    a fresh temp dir with a scrubbed environment."""
    row: dict = {
        "schema": SCHEMA_VERSION,
        "variant": variant_id,
        "compiler": spec.name,
        "flags": list(flags),
        "interp": interp_rec,
        "run": None,
    }
    workdir = tempfile.mkdtemp(prefix="spe-cell-", dir=_tmp_root())
    try:
        output = os.path.join(workdir, "a.out")
        # the subprocess cwd is the scratch dir, so the input must be absolute
        argv = spec.argv(str(Path(source_path).resolve()), output, flags)
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                timeout=timeout_s,
                env=_run_env(),
                cwd=workdir,
            )
        except subprocess.TimeoutExpired:
            row["compile"] = {"status": "timeout"}
            return row
        blob = (proc.stderr or "") + (proc.stdout or "")
        crashed = proc.returncode < 0 or any(m in blob for m in _ICE_MARKERS)
        if crashed:
            row["compile"] = {
                "status": "crash",
                "exit": proc.returncode,
                "signature": normalize_signature(proc.stderr or proc.stdout or "", proc.returncode),
                "stderr": (proc.stderr or "")[-2000:],
            }
            return row
        if proc.returncode != 0 or not os.path.isfile(output):
            row["compile"] = {
                "status": "reject",
                "exit": proc.returncode,
                "stderr": (proc.stderr or "")[-2000:],
            }
            return row
        row["compile"] = {"status": "ok", "exit": 0}
        os.chmod(output, os.stat(output).st_mode | stat.S_IXUSR)
        try:
            run = subprocess.run(
                [output],
                capture_output=True,
                timeout=timeout_s,
                env=_run_env(),
                cwd=workdir,
            )
        except subprocess.TimeoutExpired:
            row["run"] = {"timeout": True}
            return row
        row["run"] = {
            "exit": run.returncode,
            "stdout_sha256": _sha256(run.stdout or b""),
        }
        return row
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


# ---------------------------------------------------------------------------
# Outcome log

def _row_key(row: dict) -> tuple[str, str, str]:
    return (row["variant"], row["compiler"], " ".join(row["flags"]))


def read_log(path: str | Path) -> dict[tuple[str, str, str], dict]:
    """Outcome rows keyed by (variant id, compiler, flags)."""
    rows: dict[tuple[str, str, str], dict] = {}
    p = Path(path)
    if not p.exists():
        return rows
    with p.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            rows[_row_key(row)] = row
    return rows


def _append_rows(path: Path, rows: list[dict]) -> None:
    rows = sorted(rows, key=_row_key)
    with path.open("a") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Bug reports

def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_report(
    reports_dir: Path,
    dirname: str,
    witness_source: str,
    metadata: dict,
    repro_lines: list[str],
) -> bool:
    """Create one report directory; an existing one is left untouched
    so first-seen data survives re-runs. Returns True when new."""
    d = reports_dir / dirname
    if d.exists():
        return False
    d.mkdir(parents=True)
    (d / "witness.c").write_text(witness_source)
    (d / "metadata.json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    script = "#!/bin/sh\nset -x\n" + "\n".join(repro_lines) + "\n"
    repro = d / "repro.sh"
    repro.write_text(script)
    repro.chmod(repro.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return True


def _crash_report(
    reports_dir: Path, row: dict, spec: CompilerSpec, witness_source: str
) -> bool:
    sig = row["compile"]["signature"]
    slug = hashlib.sha1(sig.encode()).hexdigest()[:12]
    argv = spec.argv("witness.c", "repro.out", tuple(row["flags"]))
    meta = {
        "kind": "crash",
        "signature": sig,
        "variant": row["variant"],
        "compiler": row["compiler"],
        "flags": row["flags"],
        "first_seen": _now(),
    }
    lines = [
        'cd "$(dirname "$0")"',
        " ".join(shlex.quote(a) for a in argv),
    ]
    return _write_report(reports_dir, f"crash-{slug}", witness_source, meta, lines)


def _wrong_code_report(
    reports_dir: Path,
    variant_id: str,
    verdict: dict,
    rows: list[dict],
    cfg: ToolchainConfig,
    witness_source: str,
) -> bool:
    blob = variant_id + "|" + ",".join(verdict["cells"])
    slug = hashlib.sha1(blob.encode()).hexdigest()[:12]
    meta = {
        "kind": "wrong-code",
        "variant": variant_id,
        "cells": verdict["cells"],
        "expected": verdict["expected"],
        "observed": [
            {
                "cell": f"{r['compiler']}:{' '.join(r['flags'])}",
                "exit": r["run"]["exit"],
                "stdout_sha256": r["run"]["stdout_sha256"],
            }
            for r in rows
            if r["compile"]["status"] == "ok" and r.get("run") and not r["run"].get("timeout")
        ],
        "first_seen": _now(),
    }
    by_name = {c.name: c for c in cfg.compilers}
    lines = ['cd "$(dirname "$0")"']
    for cell in verdict["cells"]:
        comp, _, flagstr = cell.partition(":")
        spec = by_name[comp]
        flags = tuple(flagstr.split()) if flagstr else ()
        argv = spec.argv("witness.c", "repro.out", flags)
        lines.append(" ".join(shlex.quote(a) for a in argv))
        lines.append("./repro.out; echo \"exit: $?\"")
    return _write_report(reports_dir, f"wrong-code-{slug}", witness_source, meta, lines)


# ---------------------------------------------------------------------------
# Campaign driver

def run_campaign(
    corpus: Sequence[str | Path],
    cfg: ToolchainConfig,
    out_dir: str | Path,
    threshold: int = DEFAULT_THRESHOLD,
    cap: Optional[int] = None,
    mode: Mode = Mode.COMPLETE,
    granularity: Granularity = Granularity.INTRA,
    decl_holes: bool = False,
) -> dict:
    """Enumerate, realize, and differentially test a corpus.

    Per file: parse (unparseable entries recorded and skipped), count,
    and either skip (selected-mode count above threshold, recorded) or
    evaluate every variant under every toolchain cell. Returns the
    summary, which is also written to <out>/summary.json.
    """
    if threshold < 1:
        raise ConfigError(f"threshold must be >= 1, got {threshold}")
    cfg.validate()

    out = Path(out_dir)
    variants_dir = out / "variants"
    reports_dir = out / "reports"
    variants_dir.mkdir(parents=True, exist_ok=True)
    reports_dir.mkdir(parents=True, exist_ok=True)
    log_path = out / "outcomes.jsonl"
    log = read_log(log_path)

    files: list[dict] = []
    new_rows: list[dict] = []
    crash_new = 0
    wrong_new = 0
    total_naive = 0
    total_enumerated = 0

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for path in corpus:
            path = Path(path)
            stem = path.stem
            entry: dict = {"path": str(path), "stem": stem}
            try:
                program = parse(path.read_text())
            except (OSError, ParseError) as e:
                entry.update(status="unparseable", error=str(e))
                files.append(entry)
                continue

            skel = extract(program, decl_holes=decl_holes)
            pl = plan(skel, mode, granularity, threshold, cap)
            entry["n"] = skel.n
            entry["naive"] = pl.report.naive_count
            total_naive += pl.report.naive_count
            if not pl.supported:
                entry.update(status="unsupported")
                files.append(entry)
                continue
            entry["selected"] = pl.selected_count
            if cap is None and pl.selected_count > threshold:
                entry.update(status="skipped", threshold=threshold)
                files.append(entry)
                continue

            emitted = min(pl.selected_count, cap) if cap is not None else pl.selected_count
            width = len(str(max(emitted, 1)))
            vdir = variants_dir / stem
            vdir.mkdir(parents=True, exist_ok=True)

            ok_variants: list[tuple[str, Path, dict]] = []
            invalid = 0
            for v in variants(skel, mode, granularity, limit=cap):
                if not v.ok:
                    invalid += 1
                    continue
                vid = f"{stem}__v{v.seq:0{width}d}"
                vpath = vdir / f"{vid}.c"
                vpath.write_text(v.source)
                ok_variants.append((vid, vpath, _interp_record(v.program)))

            futures = {}
            rows_by_variant: dict[str, list[dict]] = {vid: [] for vid, _, _ in ok_variants}
            for vid, vpath, interp_rec in ok_variants:
                for spec, flags in cfg.cells():
                    key = (vid, spec.name, " ".join(flags))
                    if key in log:
                        rows_by_variant[vid].append(log[key])
                        continue
                    fut = pool.submit(
                        _evaluate_cell, spec, flags, vid, vpath, interp_rec, cfg.timeout_s
                    )
                    futures[fut] = vid
            for fut, vid in futures.items():
                row = fut.result()
                rows_by_variant[vid].append(row)
                new_rows.append(row)
                log[_row_key(row)] = row

            by_name = {c.name: c for c in cfg.compilers}
            sources = {vid: vpath.read_text() for vid, vpath, _ in ok_variants}
            file_crashes = 0
            file_wrong = 0
            for vid, _, _ in ok_variants:
                rows = sorted(rows_by_variant[vid], key=_row_key)
                for row in rows:
                    if row["compile"]["status"] == "crash":
                        if _crash_report(reports_dir, row, by_name[row["compiler"]], sources[vid]):
                            crash_new += 1
                        file_crashes += 1
                verdict = differential_verdict(rows)
                if verdict["status"] == "wrong-code":
                    if _wrong_code_report(reports_dir, vid, verdict, rows, cfg, sources[vid]):
                        wrong_new += 1
                    file_wrong += 1

            entry.update(
                status="tested",
                enumerated=len(ok_variants),
                invalid=invalid,
                crash_cells=file_crashes,
                wrong_code_variants=file_wrong,
            )
            total_enumerated += len(ok_variants)
            files.append(entry)

    _append_rows(log_path, new_rows)

    report_dirs = sorted(p.name for p in reports_dir.iterdir() if p.is_dir())
    summary = {
        "schema": SCHEMA_VERSION,
        "mode": mode.value,
        "granularity": granularity.value,
        "threshold": threshold,
        "cap": cap,
        "files": files,
        "totals": {
            "files": len(files),
            "tested": sum(1 for f in files if f["status"] == "tested"),
            "skipped": sum(1 for f in files if f["status"] == "skipped"),
            "unparseable": sum(1 for f in files if f["status"] == "unparseable"),
            "unsupported": sum(1 for f in files if f["status"] == "unsupported"),
            "naive": total_naive,
            "enumerated": total_enumerated,
            "reduction": (total_naive / total_enumerated) if total_enumerated else None,
        },
        "log_rows_appended": len(new_rows),
        "reports": report_dirs,
        "new_reports": {"crash": crash_new, "wrong_code": wrong_new},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
