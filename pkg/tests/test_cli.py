import io
import json
import subprocess
import sys

import pytest

from chandiv import serialize as ser
from chandiv.channel import minimal_determinant_channel
from chandiv.cli import EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, Command, UsageError, build_parser, main, run_command


def run(argv, stdin_text=""):
    stdin = io.TextIOWrapper(io.BytesIO(stdin_text.encode("utf-8")), encoding="utf-8")
    out = io.StringIO()
    code = main(argv, stdin=stdin, stdout=out)
    text = out.getvalue()
    return code, (json.loads(text) if text else None)


def test_classify_fixture(fixtures):
    code, rep = run(["classify", str(fixtures / "example1_d2.json")])
    assert code == EXIT_OK
    assert rep["divisibility"] == "Indivisible"
    assert rep["infinitesimal"] == "NotInfinitesimalDivisible"
    assert rep["positive_divisible"] is False


def test_analyze_identity_fixture(fixtures):
    code, rep = run(["analyze", str(fixtures / "identity_d2.json")])
    assert code == EXIT_OK and rep["det"] == 1.0 and rep["kraus_rank"] == 1


def test_sample_pipes_into_classify():
    code, chans = run(["sample", "--dim", "2", "--rank", "4", "--seed", "9", "--count", "3"])
    assert code == EXIT_OK and len(chans) == 3
    code, reps = run(["classify"], json.dumps(chans))
    assert code == EXIT_OK
    assert [r["divisibility"] for r in reps] == ["Divisible"] * 3


def test_sample_is_deterministic():
    a = run(["sample", "--dim", "3", "--seed", "4", "--count", "2"])
    b = run(["sample", "--dim", "3", "--seed", "4", "--count", "2"])
    assert a == b


def test_verify_exit_codes(capsys):
    code, rep = run(["verify", "--suite", "det_monotone", "--samples", "500", "--seed", "1"])
    assert code == EXIT_OK
    assert rep["violations"] == [] and rep["samples"] == 500
    code, reps = run(["verify", "--suite", "det_range", "--suite", "purity_bound", "--samples", "10", "--seed", "2"])
    assert code == EXIT_OK and [r["suite"] for r in reps] == ["det_range", "purity_bound"]


def test_verify_reports_violations(monkeypatch):
    from chandiv import sampling

    def failing(spec, rec):
        rec.check(7, -1.0, "forced")

    monkeypatch.setitem(sampling.SUITES, "forced", failing)
    code, rep = run(["verify", "--suite", "forced", "--samples", "3", "--seed", "1"])
    assert code == EXIT_VIOLATION
    assert rep["violations"] == [{"seed": 7, "description": "forced", "magnitude": 1.0}]


def test_convert_roundtrip_and_inline_input():
    src = ser.write_channel_json(minimal_determinant_channel(2), "choi")
    code, obj = run(["convert", "--to", "transfer", "--basis", "gellmann", src])
    assert code == EXIT_OK and obj["basis"] == "gellmann"
    code, rep = run(["analyze"], json.dumps(obj))
    assert rep["det"] == pytest.approx(-1 / 27)
    code, obj = run(["convert", "--to", "kraus"], json.dumps(obj))
    assert obj["representation"] == "kraus" and len(obj["data"]) == 3


def test_normal_form_and_markov_and_decompose():
    code, chans = run(["sample", "--dim", "2", "--rank", "2", "--seed", "3"])
    ch = json.dumps(chans[0])
    code, nf = run(["normal-form", ch])
    assert code == EXIT_OK and nf["tag"] in ("Diagonal", "NonDiagonal")
    code, mk = run(["markov-approx", "--time", "0.25", ch])
    assert code == EXIT_OK and mk["time"] == 0.25
    assert mk["channel"]["format"] == "chandiv/1"
    code, dec = run(["decompose", "--markov-steps", "32", ch])
    assert code == EXIT_OK and dec["kind"] == "rank_two"
    assert dec["schedule"]["duration"] > 0 and dec["markov_product"]["distance"] < 0.05


def test_decompose_nondiagonal_factors():
    from chandiv.qubit import nondiagonal_channel

    code, dec = run(["decompose", ser.write_channel_json(nondiagonal_channel(0.4))])
    assert code == EXIT_OK and dec["kind"] == "nondiagonal_factors"
    assert len(dec["factors"]) == 2


@pytest.mark.parametrize("argv,stdin", [
    (["analyze"], '{"format": "chandiv/1", "dim'),
    (["analyze"], '{"format": "chandiv/7"}'),
    (["classify", "/nonexistent/file.json"], ""),
    (["sample", "--dim", "2", "--count", "2"], ""),
    (["verify", "--suite", "nope", "--seed", "1"], ""),
    (["verify", "--suite", "det_range"], ""),
    (["frobnicate"], ""),
    (["analyze", "--bogus"], ""),
    (["decompose"], None),
    (["markov-approx", "--time", "-1"], None),
])
def test_input_errors(argv, stdin, capsys):
    if stdin is None:
        stdin = ser.write_channel_json(minimal_determinant_channel(2), "choi")
    code, out = run(argv, stdin)
    assert code == EXIT_INPUT
    assert out is None
    assert capsys.readouterr().err


def test_classify_rejects_qutrit(capsys):
    code, chans = run(["sample", "--dim", "3", "--seed", "1"])
    code, _ = run(["classify"], json.dumps(chans))
    assert code == EXIT_INPUT
    assert "d = 2" in capsys.readouterr().err


def test_parse_error_mentions_position(capsys):
    run(["analyze"], '{\n  "format": ')
    assert "line 2" in capsys.readouterr().err


def test_help_lists_every_verb():
    text = build_parser().format_help()
    for verb in ("analyze", "classify", "normal-form", "markov-approx", "decompose", "sample", "verify", "convert"):
        assert verb in text


def test_command_validates_verb():
    with pytest.raises(UsageError):
        Command("explode")
    out = io.StringIO()
    assert run_command(Command("sample", options={"dim": 2, "seed": 1, "count": 1}), stdout=out) == 0


def test_module_entry_point(fixtures):
    proc = subprocess.run([sys.executable, "-m", "chandiv.cli", "analyze", str(fixtures / "example1_d2.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["det"] == pytest.approx(-1 / 27)
