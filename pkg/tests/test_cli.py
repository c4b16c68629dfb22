from __future__ import annotations

import json

import pytest

from jetflat.cli import InputError, ParseError, main, parse, render_report, run
from jetflat.cli.report import Report, Witness
from jetflat.jetspace import JetContext

CTX = JetContext(2)
x1, y, p1 = CTX.x(1), CTX.y, CTX.p(1)

WORKED_SYSTEM = "n = 2\nsystem:\nF[1][1] = -2*dy[1]/(1+x[1])\n"
WORKED_TRANSFORM = "n = 2\ntransform:\nX[1]=x[1]\nX[2]=x[2]\nY=y*(1+x[1])\n"
SHIFT = "n = 2\ntransform:\nX[1] = x[1]\nX[2] = x[2]\nY = y + x[1]^2\n"


def _system(f11: str) -> str:
    return f"n = 2\nsystem:\nF[1][1] = {f11}\nF[1][2] = 0\nF[2][2] = 0\n"


def test_parse_examples():
    doc = parse(WORKED_SYSTEM)
    f = doc.table("system", "F")
    assert f[(1, 1)] == -2 * p1 / (1 + x1)
    assert run("check", doc).outputs["cubic"] == {"H[1][1][1]": "-2/(x[1] + 1)"}
    assert run("check", doc).verdict == "flat"
    doc = parse(WORKED_TRANSFORM)
    assert doc.table("transform", "Y")[()] == y * (1 + x1)


@pytest.mark.parametrize(
    "text, code",
    [
        ("n = 1\nsystem:\nF[1][1] = 0\n", "NRequiresAtLeastTwo"),
        ("system:\nF[1][1] = 0\n", "MissingN"),
        ("n = 2\nsystem:\nF[1][3] = 0\n", "IndexOutOfRange"),
        ("n = 2\nsystem:\nF[1][1] = 0\nF[1][1] = y\n", "DuplicateAssignment"),
        ("n = 2\nsystem:\nF[1][1] = z\n", "UnknownVariable"),
        ("n = 2\nsystem:\nF[1][1] = 1/(x[1]-x[1])\n", "DivisionByZero"),
        ("n = 2\nfoo:\n", "UnknownBlock"),
        ("n = 2\nsystem:\nG[1][1] = 0\n", "UnknownTarget"),
        ("n = 2\ntransform:\nX[1] = dy[1]\nX[2] = x[2]\nY = y\n", "JetVariableNotAllowed"),
        ("n = 2\ntransform:\nX[1] = x[1]\nY = y\n", "MissingEntry"),
        ("n = 2\nsystem:\nF[2][1] = 0\n", "IndexOrder"),
    ],
)
def test_semantic_errors(text, code):
    with pytest.raises(InputError) as exc:
        parse(text)
    assert exc.value.code == code


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse("n = 2\nsystem:\nF[1][1] = (x[1] +\n")
    assert exc.value.code == "SyntaxError"
    assert exc.value.line == 3


def test_comments_and_blank_lines():
    doc = parse("# header\nn = 2\n\nsystem:  # block\nF[1][2] = y  # entry\n")
    assert doc.table("system", "F")[(1, 2)] == y


def test_check_zero_system():
    r = run("check", parse(_system("0")))
    assert r.verdict == "flat"
    assert r.nonzero_total() == 0


def test_check_not_integrable_names_witness():
    r = run("check", parse(_system("y")))
    assert r.verdict == "cubic_but_not_integrable"
    w = next(w for w in r.witnesses if w.family == "II'")
    assert len(w.index) == 4
    out = json.loads(render_report(r))
    assert any(w["family"] == "II'" and w["expr"] for w in out["witnesses"])


def test_check_not_cubic():
    r = run("check", parse(_system("dy[1]^4")))
    assert r.verdict == "not_cubic"
    assert r.residual_summary["chern"]["nonzero"] > 0
    json.loads(render_report(r))


def test_synthesize_shift():
    r = run("synthesize", parse(SHIFT))
    assert r.verdict == "round-trip ok"
    assert r.outputs["system"]["F[1][1]"] == "-2"
    assert r.outputs["cubic"] == {"G[1][1]": "-2"}


def test_prolong_and_chern_and_pi_check():
    r = run("prolong", parse("n = 2\nvectorfield:\nXI[1] = x[1]*y\n"))
    assert r.outputs["Y2"]["Y2[1][1]"] == "-2*dy[1]^2"
    cubic = "n = 2\nsystem:\nF[1][1] = dy[1]^3\nF[1][2] = dy[1]^2*dy[2]\nF[2][2] = dy[1]*dy[2]^2\n"
    assert run("chern", parse(cubic)).verdict == "zero"
    assert run("chern", parse(_system("dy[1]^4"))).verdict == "nonzero"
    assert run("pi-check", parse(SHIFT)).verdict == "compatible"
    r = run("pi-check", parse("n = 2\npi:\nPi[3][1][1] = x[2]\n"))
    assert r.verdict == "incompatible"
    assert r.witnesses[0].index == (1, 1, 2, 3)


def test_render_json_flat():
    r = run("check", parse(_system("0")))
    data = render_report(r, "json")
    assert b'"verdict": "flat"' in data
    assert list(json.loads(data)) == ["command", "n", "verdict", "residual_summary", "witnesses", "outputs"]
    assert "timings" in json.loads(render_report(r, "json", timings=True))


def test_render_text():
    r = Report("check", 2, "cubic_but_not_integrable")
    r.add_count("II'", 3, 1)
    r.witnesses.append(Witness("II'", (1, 1, 2, 2), "1"))
    text = render_report(r, "text").decode()
    assert "verdict: cubic_but_not_integrable" in text
    assert "witness II' [1, 1, 2, 2]: 1" in text


def test_selftest_text_lines():
    r = run("selftest", count=2)
    assert r.verdict == "ok"
    lines = render_report(r, "text").decode().splitlines()
    anchors = [line for line in lines if line.startswith(("ok", "FAIL"))]
    assert len(anchors) == len(r.residual_summary)
    assert all(line.startswith("ok ") for line in anchors)


def test_main_exit_codes(tmp_path, capsys):
    flat = tmp_path / "flat.txt"
    flat.write_text(WORKED_SYSTEM)
    bad = tmp_path / "bad.txt"
    bad.write_text(_system("y"))
    broken = tmp_path / "broken.txt"
    broken.write_text("n = 1\n")
    assert main(["check", str(flat)]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "flat"
    assert main(["check", str(bad), "--format", "text"]) == 1
    assert "verdict: cubic_but_not_integrable" in capsys.readouterr().out
    assert main(["check", str(broken)]) == 2
    assert "NRequiresAtLeastTwo" in capsys.readouterr().err
    assert main(["check"]) == 2
