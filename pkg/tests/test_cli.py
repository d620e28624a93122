import json

import pytest

from algebroid_index.cli import UsageError, main, parse_w
from algebroid_index.report import strip_elapsed


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.mark.parametrize("text, k", [("u^3", 3), ("u^(-1)", -1), ("u", 1), ("1", 1), ("0", 0), (None, None)])
def test_parse_w(text, k):
    assert parse_w(text) == k


def test_parse_w_rejects_garbage():
    with pytest.raises(UsageError):
        parse_w("v^2")


def test_validate_good_and_broken(capsys):
    code, out, _ = run(capsys, "validate", "--presentation", "derxy_curved")
    assert code == 0 and records(out)[0]["valid"]
    code, out, _ = run(capsys, "validate", "--presentation", "broken_jacobi")
    assert code == 1 and not records(out)[0]["valid"]


def test_missing_flag_and_missing_file_exit_2(capsys):
    assert run(capsys, "validate")[0] == 2
    assert run(capsys, "validate", "--presentation", "no/such/file.pres")[0] == 2
    assert run(capsys, "suite", "no-such-suite")[0] == 2
    assert run(capsys, "suite", "pbw", "--order", "1")[0] == 2


def test_pbw_flat_line(capsys):
    code, out, _ = run(capsys, "pbw", "--presentation", "derx", "--order", "3")
    rec = records(out)[0]
    assert code == 0 and rec["equal"]
    assert rec["A"]["e1"]["-1"] == "-p1"


def test_cocycle_on_a_weyl_chain(capsys):
    code, out, _ = run(capsys, "cocycle", "--chain", "w1_sample")
    assert code == 0
    assert all({"component", "u_exponent", "value"} <= set(r) for r in records(out))


def test_character_of_the_fundamental_cycle(capsys):
    code, out, _ = run(capsys, "character", "--presentation", "derx", "--chain", "c2_derx", "--w", "u^1")
    assert code == 0
    assert records(out)[0]["components"] == {"deg0,u^1": {"-": "1"}}


def test_index_and_hkr(capsys):
    assert run(capsys, "index-check", "--presentation", "derxy_curved")[0] == 0
    assert run(capsys, "hkr-check", "--presentation", "derxy_curved", "--chain", "base_xy")[0] == 0
    assert run(capsys, "hkr-check", "--presentation", "derx", "--chain", "c2_derx")[0] == 2


def test_config_file_and_report(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults\npresentation = derxy_curved\nmoyal-convention = literal\n")
    report = tmp_path / "out.jsonl"
    code, out, _ = run(capsys, "index-check", "--config", str(conf), "--report", str(report))
    assert code == 0 and out == ""
    assert records(report.read_text())[0]["equal"]


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n")
    assert run(capsys, "suite", "moyal", "--config", str(conf))[0] == 2


def test_suite_list(capsys):
    code, out, _ = run(capsys, "suite", "--list")
    assert code == 0
    assert "all" in {r["suite"] for r in records(out)}


def test_suite_output_is_reproducible(capsys):
    _, one, _ = run(capsys, "suite", "moyal", "--threads", "1")
    _, two, _ = run(capsys, "suite", "moyal", "--threads", "2")
    _, again, _ = run(capsys, "suite", "moyal")
    assert strip_elapsed(one) == strip_elapsed(two) == strip_elapsed(again)
    assert records(one)[-1]["pass"]
