"""Command line behaviour: counts, deterministic enumeration output,
budget handling, campaign exit codes, and log statistics."""

import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from conftest import CRASH_STUB, LOOP_SRC, BRANCH_SRC, OK_STUB, write_stub
from spe.cli import EXIT_CONFIG, EXIT_FINDINGS, EXIT_OK, EXIT_THRESHOLD, main
from spe.minilang import parse, render

# nested declaring blocks: rejected by paper mode, fine in complete mode
NESTED_SRC = """\
int main(void) {
    int a = 1;
    if (a) {
        int b = 2;
        if (b) {
            int c = 3;
            c = a + b;
        }
    }
    return 0;
}
"""

STRAIGHT_SRC = """\
int main(void) {
    int a;
    int b;
    a = 3;
    b = a;
    return b;
}
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def corpus(tmp_path):
    files = {}
    for stem, src in (
        ("loop", LOOP_SRC),
        ("branch", BRANCH_SRC),
        ("nested", NESTED_SRC),
        ("straight", STRAIGHT_SRC),
    ):
        path = tmp_path / f"{stem}.c"
        path.write_text(src)
        files[stem] = path
    return files


def stub_config_file(tmp_path, *stubs, workers=2):
    compilers = []
    for name, body in stubs:
        path = write_stub(tmp_path, name, body)
        compilers.append({"name": name, "cmd": f"{path} {{flags}} -o {{output}} {{input}}"})
    cfg = {
        "compilers": compilers,
        "flags": [["-O0"], ["-O3"]],
        "timeout_s": 5,
        "workers": workers,
    }
    path = tmp_path / "toolchain.json"
    path.write_text(json.dumps(cfg))
    return path


class TestCount:
    def test_table_rows_and_totals(self, runner, corpus):
        res = runner.invoke(main, ["count", str(corpus["loop"]), str(corpus["branch"])])
        assert res.exit_code == EXIT_OK
        lines = res.output.splitlines()
        loop_row = next(l for l in lines if "loop.c" in l)
        assert loop_row.split()[1:] == ["6", "64", "32", "32", "2.0x"]
        branch_row = next(l for l in lines if "branch.c" in l)
        assert branch_row.split()[1:] == ["5", "128", "36", "40", "3.2x"]
        total_row = next(l for l in lines if l.startswith("total"))
        assert total_row.split()[1:] == ["192", "72", "2.7x"]

    def test_json_format(self, runner, corpus):
        res = runner.invoke(
            main, ["count", "--format", "json", str(corpus["loop"])]
        )
        assert res.exit_code == EXIT_OK
        doc = json.loads(res.output)
        (row,) = doc["files"]
        assert row["holes"] == 6
        assert row["naive"] == 64
        assert row["paper"] == 32
        assert row["complete"] == 32
        assert row["enumerated"] == 32
        assert row["reduction"] == 2.0
        assert doc["totals"] == {
            "files": 1,
            "naive": 64,
            "enumerated": 32,
            "reduction": 2.0,
        }

    def test_paper_mode_selects_paper_count(self, runner, corpus):
        res = runner.invoke(
            main,
            ["count", "--format", "json", "--mode", "paper", str(corpus["branch"])],
        )
        doc = json.loads(res.output)
        assert doc["files"][0]["enumerated"] == 36

    def test_paper_count_dash_when_unsupported(self, runner, corpus):
        res = runner.invoke(main, ["count", str(corpus["nested"])])
        assert res.exit_code == EXIT_OK
        row = next(l for l in res.output.splitlines() if "nested.c" in l)
        # paper column shows a dash, complete-mode reduction still computed
        assert row.split()[2:4] == ["54", "-"]
        assert row.split()[5].endswith("x")

    def test_unparseable_file_exits_config(self, runner, tmp_path):
        bad = tmp_path / "bad.c"
        bad.write_text("int main(void) { return 0 ")
        res = runner.invoke(main, ["count", str(bad)])
        assert res.exit_code == EXIT_CONFIG

    def test_missing_file_exits_config(self, runner, tmp_path):
        res = runner.invoke(main, ["count", str(tmp_path / "nope.c")])
        assert res.exit_code == EXIT_CONFIG


class TestSkeleton:
    def test_json_document(self, runner, corpus):
        res = runner.invoke(main, ["skeleton", str(corpus["loop"])])
        assert res.exit_code == EXIT_OK
        doc = json.loads(res.output)
        assert doc["schema"] == 1
        (skel,) = doc["skeletons"]
        assert skel["file"].endswith("loop.c")
        assert skel["n"] == 6
        assert [h["index"] for h in skel["holes"]] == [1, 2, 3, 4, 5, 6]
        assert skel["origin_vector"] == ["a", "b", "a", "a", "a", "b"]

    def test_decl_holes_flag(self, runner, corpus):
        res = runner.invoke(
            main, ["skeleton", "--decl-holes", str(corpus["straight"])]
        )
        doc = json.loads(res.output)
        # four use holes plus the two declaration holes
        assert doc["skeletons"][0]["n"] == 6
        assert doc["skeletons"][0]["decl_holes"] is True


class TestEnumerate:
    def test_writes_variants_and_manifest(self, runner, corpus, tmp_path):
        out = tmp_path / "variants"
        res = runner.invoke(main, ["enumerate", str(corpus["loop"]), "--out", str(out)])
        assert res.exit_code == EXIT_OK
        vdir = out / "loop"
        files = sorted(p.name for p in vdir.glob("*.c"))
        assert len(files) == 32
        assert files[0] == "loop__v01.c" and files[-1] == "loop__v32.c"
        manifest = json.loads((vdir / "manifest.json").read_text())
        assert manifest["count"] == 32
        assert manifest["written"] == 32
        assert manifest["invalid"] == 0
        assert manifest["mode"] == "complete"
        first = manifest["variants"][0]
        assert first["seq"] == 1 and first["valid"]
        assert first["assignment"] == ["a", "a", "a", "a", "a", "a"]
        # the origin program is among the written variants, byte for byte
        sources = {(vdir / f).read_text() for f in files}
        assert render(parse(LOOP_SRC)) in sources

    def test_rerun_is_byte_identical(self, runner, corpus, tmp_path):
        outs = []
        for name in ("first", "second"):
            out = tmp_path / name
            res = runner.invoke(
                main, ["enumerate", str(corpus["loop"]), "--out", str(out)]
            )
            assert res.exit_code == EXIT_OK
            outs.append(out / "loop")
        a, b = outs
        names_a = sorted(p.name for p in a.iterdir())
        assert names_a == sorted(p.name for p in b.iterdir())
        for name in names_a:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_threshold_refusal(self, runner, corpus, tmp_path):
        out = tmp_path / "variants"
        res = runner.invoke(
            main,
            ["enumerate", str(corpus["loop"]), "--threshold", "10", "--out", str(out)],
        )
        assert res.exit_code == EXIT_THRESHOLD
        assert not (out / "loop").exists()

    def test_cap_takes_prefix(self, runner, corpus, tmp_path):
        out = tmp_path / "variants"
        res = runner.invoke(
            main, ["enumerate", str(corpus["loop"]), "--cap", "5", "--out", str(out)]
        )
        assert res.exit_code == EXIT_OK
        vdir = out / "loop"
        assert sorted(p.name for p in vdir.glob("*.c")) == [
            f"loop__v{i}.c" for i in range(1, 6)
        ]
        manifest = json.loads((vdir / "manifest.json").read_text())
        assert manifest["count"] == 32 and manifest["emitted"] == 5

    def test_threshold_and_cap_conflict(self, runner, corpus, tmp_path):
        res = runner.invoke(
            main,
            [
                "enumerate",
                str(corpus["loop"]),
                "--threshold",
                "10",
                "--cap",
                "5",
                "--out",
                str(tmp_path / "v"),
            ],
        )
        assert res.exit_code == 2

    def test_paper_mode_unsupported_exits_config(self, runner, corpus, tmp_path):
        res = runner.invoke(
            main,
            [
                "enumerate",
                str(corpus["nested"]),
                "--mode",
                "paper",
                "--out",
                str(tmp_path / "v"),
            ],
        )
        assert res.exit_code == EXIT_CONFIG


class TestTestCommand:
    def test_clean_campaign_exits_zero(self, runner, corpus, tmp_path):
        cfg = stub_config_file(tmp_path, ("okcc", OK_STUB))
        out = tmp_path / "campaign"
        res = runner.invoke(
            main,
            ["test", str(corpus["loop"]), "--config", str(cfg), "--out", str(out)],
        )
        assert res.exit_code == EXIT_OK
        assert "reports: 0" in res.output
        assert (out / "outcomes.jsonl").exists()
        assert (out / "summary.json").exists()

    def test_findings_exit_one_and_are_listed(self, runner, corpus, tmp_path):
        cfg = stub_config_file(tmp_path, ("crashcc", CRASH_STUB))
        out = tmp_path / "campaign"
        res = runner.invoke(
            main,
            ["test", str(corpus["straight"]), "--config", str(cfg), "--out", str(out)],
        )
        assert res.exit_code == EXIT_FINDINGS
        assert any(l.strip().startswith("crash-") for l in res.output.splitlines())

    def test_bad_config_exits_config(self, runner, corpus, tmp_path):
        cfg = tmp_path / "toolchain.json"
        cfg.write_text(
            json.dumps(
                {
                    "compilers": [{"name": "ghost", "cmd": "/nonexistent/cc {flags} -o {output} {input}"}],
                    "flags": [["-O0"]],
                    "timeout_s": 5,
                    "workers": 1,
                }
            )
        )
        res = runner.invoke(
            main,
            ["test", str(corpus["loop"]), "--config", str(cfg), "--out", str(tmp_path / "o")],
        )
        assert res.exit_code == EXIT_CONFIG
        assert not (tmp_path / "o").exists()


class TestStats:
    def test_aggregates_log(self, runner, corpus, tmp_path):
        cfg = stub_config_file(tmp_path, ("crashcc", CRASH_STUB))
        out = tmp_path / "campaign"
        runner.invoke(
            main,
            ["test", str(corpus["straight"]), "--config", str(cfg), "--out", str(out)],
        )
        res = runner.invoke(main, ["stats", str(out / "outcomes.jsonl")])
        assert res.exit_code == EXIT_OK
        doc = json.loads(res.output)
        assert doc["rows"] == 16
        assert doc["variants"] == 8
        assert doc["compilers"] == {"crashcc": {"crash": 4, "ok": 12}}
        assert len(doc["distinct_crash_signatures"]) == 1


class TestEntryPoint:
    def test_module_invocation(self, corpus):
        proc = subprocess.run(
            [sys.executable, "-m", "spe.cli", "count", str(corpus["loop"])],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert "loop.c" in proc.stdout

    def test_version(self):
        proc = subprocess.run(
            [sys.executable, "-m", "spe.cli", "--version"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert "0.1.0" in proc.stdout
