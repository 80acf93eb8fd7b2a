import json

import pytest

from boundfind.cli import main
from boundfind.rational import rat_parse


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_foo_file(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "foo.lisp")
    assert code == 0
    assert out.splitlines() == ["foo-bounds: [-8, 10]", "foo-better-bounds: [-4, 4]"]


def test_solve_cases_file(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "foo_cases.lisp")
    assert "foo-split-128: [-131/64, 259/64]" in out.splitlines()
    assert "foo-better-split-128: [-129/64, 4]" in out.splitlines()


def test_unconstrained(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "unconstrained.lisp")
    assert code == 0 and out.strip() == "free-square-sum: [-inf, +inf]"


def test_json_report(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "foo_cases.lisp", "--json")
    doc = json.loads(out)
    first = doc["problems"][0]
    assert first["name"] == "foo-split-2"
    assert [c["bounds"] for c in first["per_case"]] == [{"lo": "-5", "hi": "3"}, {"lo": "-3", "hi": "7"}]
    assert rat_parse(doc["problems"][1]["bounds"]["lo"]) == rat_parse("-131/64")
    assert set(doc["timings"]) == {p["name"] for p in doc["problems"]}


def test_json_is_deterministic(capsys, data_dir):
    _, a, _ = run(capsys, "solve", data_dir / "foo.lisp", "--json", "--no-timings")
    _, b, _ = run(capsys, "solve", data_dir / "foo.lisp", "--json", "--no-timings")
    assert a == b and "timings" not in json.loads(a)


def test_explain(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "foo.lisp", "--explain")
    assert "(* x x): [4, 16]" in out
    assert "phase 1: rule my-factor" in out


def test_cert_round_trip_and_tamper(capsys, data_dir, tmp_path):
    cert = tmp_path / "foo.json"
    code, _, _ = run(capsys, "solve", data_dir / "foo.lisp", "--cert", cert)
    assert code == 0
    code, out, _ = run(capsys, "check", data_dir / "foo.lisp", cert)
    assert code == 0 and out.splitlines() == ["ok: foo-bounds", "ok: foo-better-bounds"]

    doc = json.loads(cert.read_text())
    doc["certificates"][0]["claim"]["lo"] = "-7"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check", data_dir / "foo.lisp", bad)
    assert code == 1 and "fail: foo-bounds: at claim" in out


def test_cert_for_other_file(capsys, data_dir, tmp_path):
    cert = tmp_path / "u.json"
    run(capsys, "solve", data_dir / "unconstrained.lisp", "--cert", cert)
    other = tmp_path / "other.lisp"
    other.write_text("(def-bounds free-square-sum (+ (* a a) b b) :hyp (and (rationalp a) (rationalp b)))")
    code, out, _ = run(capsys, "check", other, cert)
    assert code == 1 and "digest" in out


def test_load_error_exit(capsys, tmp_path):
    f = tmp_path / "bad.lisp"
    f.write_text("(def-bounds q (foo x))")
    code, _, err = run(capsys, "solve", f)
    assert code != 0 and "1:" in err and "foo" in err
    code, _, _ = run(capsys, "solve", tmp_path / "missing.lisp")
    assert code != 0


def test_case_cap_flag(capsys, data_dir):
    code, _, err = run(capsys, "solve", data_dir / "foo_cases.lisp", "--case-cap", "64")
    assert code != 0 and "case cap" in err


def test_problem_keyword_beats_flag(capsys, tmp_path):
    f = tmp_path / "p.lisp"
    f.write_text("(def-bounds q x :hyp (and (rationalp x) (<= 0 x) (<= x 1))"
                 " :cases ((:ranges-from-to-by x 0 1 1/8)) :case-cap 8)")
    code, out, _ = run(capsys, "solve", f, "--case-cap", "4")
    assert code == 0 and out.strip() == "q: [0, 1]"


def test_bad_flag_value(capsys, data_dir):
    with pytest.raises(SystemExit):
        main(["solve", str(data_dir / "foo.lisp"), "--case-cap", "0"])
