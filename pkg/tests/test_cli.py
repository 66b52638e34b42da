import json
import random
import subprocess
import sys
import time

import pytest

from patgen.cli import main


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "patgen", *map(str, args)], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture
def base(fixtures):
    return ["--log", fixtures / "running.csv", "--model", fixtures / "running.pnml"]


def test_json_interleavings(base, local_oracle_path):
    code, out, _ = run_cli(*base, "--oracle", f"explicit:{local_oracle_path}", "--matching", "interleavings",
                           "--output", "json")
    assert code == 0
    data = json.loads(out)
    assert data["g_pattern"] == "0.860606"
    assert data["weights"]["total"] == 5500


def test_partial_matching_rows(base, local_oracle_path, capsys):
    argv = [str(a) for a in base] + ["--oracle", f"explicit:{local_oracle_path}", "--matching", "partial",
                                     "--output", "json", "--breakdown"]
    assert main(argv) == 0
    rows = [r for r in json.loads(capsys.readouterr().out)["patterns"] if r["type"] == "concurrent"]
    assert sorted(r["pf_exact"] for r in rows) == ["1", "7/9"]  # 4/4 and 14/18


def test_alpha_plus_pairs_in_diagnostics(base, capsys):
    argv = [str(a) for a in base] + ["--oracle", "alpha-plus", "--df-filter", "0", "--output", "json"]
    assert main(argv) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["diagnostics"]["concurrency_pairs"] == [["A", "B"], ["A", "C"], ["B", "C"]]


def test_output_is_stable_across_threads(base, monkeypatch, capsys):
    argv = [str(a) for a in base] + ["--output", "json", "--breakdown"]
    main(argv)
    first = capsys.readouterr().out
    monkeypatch.setenv("PATGEN_THREADS", "3")
    main(argv)
    assert capsys.readouterr().out == first


def test_text_and_csv(base, capsys):
    assert main([str(a) for a in base] + ["--output", "text"]) == 0
    assert capsys.readouterr().out.startswith("G_pattern")
    assert main([str(a) for a in base] + ["--output", "csv", "--breakdown"]) == 0
    assert capsys.readouterr().out.startswith("type,")


def test_bad_log_exit_2(tmp_path, fixtures):
    bad = tmp_path / "bad.csv"
    bad.write_text("0;A\n")
    code, _, err = run_cli("--log", bad, "--model", fixtures / "running.pnml")
    assert code == 2 and "load-log" in err and "line 1" in err


def test_invalid_model_exit_2(tmp_path, fixtures):
    model = tmp_path / "m.pnml"
    model.write_text('<pnml><net id="n"><place id="i"/><place id="o"/>'
                     '<transition id="a"><name><text>A</text></name></transition>'
                     '<transition id="b"><name><text>B</text></name></transition>'
                     '<arc id="1" source="i" target="a"/><arc id="2" source="a" target="o"/>'
                     '<arc id="3" source="i" target="b"/></net></pnml>')
    code, _, err = run_cli("--log", fixtures / "running.csv", "--model", model)
    assert code == 2 and "validate-model" in err


def test_bad_flags_exit_2(base):
    code, _, _ = run_cli(*base, "--df-filter", "1.5")
    assert code == 2
    code, _, _ = run_cli(*base, "--oracle", "nonsense")
    assert code == 2
    code, _, err = run_cli(*base, "--oracle", "explicit:/does/not/exist.json")
    assert code == 2 and "oracle" in err


def test_timeout_exit_3(tmp_path, fixtures):
    rng = random.Random(0)
    lines = {",".join(rng.choice("XABC") for _ in range(120)) for _ in range(4000)}
    log = tmp_path / "big.csv"
    log.write_text("".join(f"1;{t}\n" for t in lines))
    start = time.monotonic()
    code, out, _ = run_cli("--log", log, "--model", fixtures / "running.pnml", "--timeout", "1")
    elapsed = time.monotonic() - start
    assert code == 3
    data = json.loads(out)
    assert data["status"] == "timeout"
    assert isinstance(data["completed_phases"], list)
    assert elapsed < 6  # interpreter start-up plus load, the run itself stops within ~1 s
