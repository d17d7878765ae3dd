import json

import pytest

from artifact.cli import EXIT_BREACH, EXIT_BUDGET, EXIT_PARSE, admissible_shift, run
from artifact.poly import Poly

from conftest import INSTANCES, T


def _run(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_hensel_exit_zero(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "hensel", INSTANCES / "quadric3.json")
    assert code == 0
    assert "# failed=0" in out
    assert "864" in out


@pytest.mark.parametrize("suite", ["orthogonality", "snorlax", "mobius", "shrinking"])
def test_verify_suites_pass(capsys, suite):
    code, out, _ = _run(capsys, "verify", "--suite", suite, "--format", "json",
                        INSTANCES / "conic3.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["header"]["failed"] == 0
    assert all(r["pass"] for r in doc["rows"])


def test_census_quadric5(capsys):
    code, out, _ = _run(capsys, "census", "-e", "1", INSTANCES / "quadric5.json")
    assert code == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert lines[0] == "q,e,b,N_qe,M_count,dim_estimate,expected_dim"
    assert lines[1].split(",")[4] == "12"


def test_census_with_point_and_lines(capsys):
    code, out, _ = _run(capsys, "census", "-e", "1", "--point", "0:1,1,1,1", "--format", "json",
                        INSTANCES / "quadric3.json")
    assert code == 0
    assert json.loads(out)["rows"][0]["M_count"] == 12
    code, out, _ = _run(capsys, "census", "-e", "1", "--lines", INSTANCES / "quadric3.json")
    assert code == 0 and "# line_oracle=8" in out


def test_profile_json(capsys):
    code, out, _ = _run(capsys, "profile", "-d", "2", "-R", "1", "-n", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["n_bound_ok"] is False
    assert doc["n_threshold"] == 33
    assert doc["header"]["artifact_version"]


def test_local_and_predict(capsys):
    code, out, _ = _run(capsys, "local", "--trunc-series", "1", "--trunc-integral", "2",
                        INSTANCES / "quadric3.json")
    assert code == 0
    assert "S,1,5/3" in out and "I,2,11/3" in out and "A,\"0,1\",2/9" in out
    code, out, _ = _run(capsys, "predict", "-P", "2", INSTANCES / "quadric3.json")
    assert code == 0
    assert "2,513,1177/1,513/1177" in out


def test_smooth(capsys):
    code, out, _ = _run(capsys, "smooth", "--format", "json", INSTANCES / "conic3.json")
    assert code == 0
    assert json.loads(out)["rows"][0]["smooth"] is True


def test_header_fields(capsys):
    _, out, _ = _run(capsys, "local", "--trunc-series", "0", "--trunc-integral", "0", "--seed", "7",
                     INSTANCES / "quadric3.json")
    head = {ln[2:].split("=")[0] for ln in out.splitlines() if ln.startswith("# ")}
    assert {"field", "modulus", "budget", "trunc_series", "trunc_integral", "artifact_version",
            "seed"} <= head


def test_output_is_deterministic_across_workers(capsys, tmp_path):
    outs = []
    for w in (1, 2):
        path = tmp_path / f"c{w}.csv"
        code, _, _ = _run(capsys, "census", "-e", "1", "--workers", w, "--out", path,
                          INSTANCES / "quadric3.json")
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"\r\n" not in outs[0]


def test_exit_codes(capsys, tmp_path):
    assert _run(capsys, "verify", "--budget", "10", "--suite", "orthogonality",
                INSTANCES / "quadric3.json")[0] == EXIT_BUDGET
    assert _run(capsys, "verify", tmp_path / "missing.json")[0] == EXIT_PARSE
    bad = tmp_path / "bad.json"
    bad.write_text('{"field": "4^1"}')
    assert _run(capsys, "smooth", bad)[0] == EXIT_PARSE
    with pytest.raises(SystemExit) as exc:
        run(["verify", "--suite", "nonsense", str(INSTANCES / "quadric3.json")])
    assert exc.value.code == EXIT_PARSE
    assert _run(capsys, "census", "-e", "1", "--point", "0:1,1,0,0",
                INSTANCES / "quadric3.json")[0] == EXIT_PARSE
    assert _run(capsys, "local", "--budget", "0", INSTANCES / "quadric3.json")[0] == EXIT_PARSE


def test_invariant_breach_exit(capsys, monkeypatch):
    import artifact.cli as cli
    monkeypatch.setattr(cli, "suite_mobius", lambda sys_, cfg, P_max: [
        cli._row("mobius", "forced mismatch", 1, 2)])
    code, _, err = _run(capsys, "verify", "--suite", "mobius", INSTANCES / "conic3.json")
    assert code == EXIT_BREACH
    assert "forced mismatch" in err


def test_admissible_shift(conic3):
    fd = conic3.fd
    sh = admissible_shift(conic3, T(fd, 0, 1))
    assert sh.m == T(fd, 0, 1)
    assert all((v % sh.m).is_zero() for v in conic3.evaluate(sh.b))
    assert admissible_shift(conic3, Poly.one(fd)).is_trivial()
