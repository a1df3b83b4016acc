import json
import subprocess
import sys

import pytest

from dmpo_bench.cli import main
from dmpo_bench.core import load_instance


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def tsp_dir(tmp_path, capsys):
    out = tmp_path / "d"
    assert run(["gen", "--task", "tsp", "--n", 6, "--count", 5, "--seed", 42, "--out", out], capsys)[0] == 0
    return out


def test_gen_writes_files_and_manifest(tmp_path, capsys):
    out = tmp_path / "d"
    code, _, _ = run(["gen", "--task", "tsp", "--n", 10, "--count", 100, "--seed", 42, "--out", out], capsys)
    assert code == 0
    assert len(list((out / "tsp").glob("*.npi.json"))) == 100
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["instances"]) == 100 and manifest["master_seed"] == 42


def test_npb_seed_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("NPB_SEED", "7")
    run(["gen", "--task", "mis", "--n", 5, "--out", tmp_path / "a"], capsys)
    monkeypatch.delenv("NPB_SEED")
    run(["gen", "--task", "mis", "--n", 5, "--seed", 7, "--out", tmp_path / "b"], capsys)
    run(["gen", "--task", "mis", "--n", 5, "--out", tmp_path / "c"], capsys)
    a = sorted(p.name for p in (tmp_path / "a").rglob("*.npi.json"))
    assert a == sorted(p.name for p in (tmp_path / "b").rglob("*.npi.json"))
    assert a != sorted(p.name for p in (tmp_path / "c").rglob("*.npi.json"))


def test_verify_exit_codes(tsp_dir, tmp_path, capsys):
    f = sorted((tsp_dir / "tsp").glob("*.npi.json"))[0]
    code, out, _ = run(["verify", "--instance", f], capsys)
    assert code == 0 and json.loads(out)["valid"] is True
    bad = tmp_path / "bad.sol.json"
    bad.write_text('{"kind":"tour","data":[0,1,2]}')
    code, out, _ = run(["verify", "--instance", f, "--solution", bad], capsys)
    assert code == 1 and json.loads(out)["valid"] is False
    wrong = tmp_path / "wrong.sol.json"
    wrong.write_text('{"kind":"subset","data":[0]}')
    code, out, _ = run(["verify", "--instance", f, "--solution", wrong], capsys)
    assert code == 2 and "structural" in json.loads(out)["reason"]
    assert len(out.strip().splitlines()) == 1


def test_solve_and_size_guard(tsp_dir, tmp_path, capsys):
    f = sorted((tsp_dir / "tsp").glob("*.npi.json"))[0]
    code, out, _ = run(["solve", "--exact", "--instance", f], capsys)
    assert code == 0 and json.loads(out)["algorithm"] == "held_karp"
    run(["gen", "--task", "tsp", "--n", 11, "--out", tmp_path / "big"], capsys)
    big = next((tmp_path / "big").rglob("*.npi.json"))
    assert run(["solve", "--exact", "--instance", big], capsys)[0] == 1
    assert run(["solve", "--heuristic", "--instance", big], capsys)[0] == 0
    assert run(["solve", "--instance", big], capsys)[0] == 2


def test_eval_empty_directory(tmp_path, capsys):
    (tmp_path / "e").mkdir()
    code, out, err = run(["eval", "--instances", tmp_path / "e", "--solutions", tmp_path / "e"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["overall"]["count"] == 0 and rep["warnings"]
    assert "warning" in err


def test_eval_with_solution_files(tsp_dir, tmp_path, capsys):
    sols = tmp_path / "sols"
    sols.mkdir()
    files = sorted((tsp_dir / "tsp").glob("*.npi.json"))
    for f in files[:3]:
        inst = load_instance(f)
        (sols / f"{inst.id}.sol.json").write_text(json.dumps(inst.reference.solution.to_json()))
    csv_path = tmp_path / "r.csv"
    code, out, _ = run(["eval", "--instances", tsp_dir, "--solutions", sols, "--csv", csv_path], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["tasks"]["tsp"] == {"count": 5, "valid": 3, "sr": 0.6, "qr": 0.6}
    assert csv_path.read_text().splitlines()[1].endswith("60.0,60.0")


def test_train_then_eval(tsp_dir, tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(f"dataset = {tsp_dir}\niterations = 8\ngroup_size = 4\nseed = 2\n"
                   f"log_path = {tmp_path / 'log.csv'}\npolicy_path = {tmp_path / 'p.policy.json'}\n")
    assert run(["train", "--config", cfg], capsys)[0] == 0
    assert len((tmp_path / "log.csv").read_text().splitlines()) == 9
    code, out, _ = run(["eval", "--instances", tsp_dir, "--policy", tmp_path / "p.policy.json"], capsys)
    assert code == 0 and json.loads(out)["overall"]["count"] == 5


def test_render_command(tsp_dir, tmp_path, capsys):
    f = sorted((tsp_dir / "tsp").glob("*.npi.json"))[0]
    out = tmp_path / "x.svg"
    assert run(["render", "--instance", f, "--out", out], capsys)[0] == 0
    assert out.read_text().startswith("<svg")


def test_usage_errors(tmp_path, capsys):
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["gen", "--out", tmp_path], capsys)[0] == 2
    assert run(["gen", "--task", "nope", "--n", 5, "--out", tmp_path], capsys)[0] == 2
    assert run(["verify", "--instance", tmp_path / "missing.npi.json"], capsys)[0] == 2
    assert run(["eval", "--instances", tmp_path], capsys)[0] == 2
    bad = tmp_path / "bad.npi.json"
    bad.write_text("{")
    assert run(["verify", "--instance", bad], capsys)[0] == 2


def test_selfcheck(capsys):
    code, out, _ = run(["selfcheck", "--per-task", 2, "--grad-seeds", 1], capsys)
    assert code == 0 and out.count("PASS") == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dmpo_bench", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "selfcheck" in res.stdout
