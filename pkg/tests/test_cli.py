import json

import pytest

from randlab import cli


def ok(argv):
    res = cli.run(argv)
    assert res.ok, res.message
    return res.payload


def test_hitting_online():
    assert ok(["hitting", "--family", "online", "--n", "3"]) == {"p": ["1", "3/4", "39/64", "8463/16384"]}


def test_hitting_families():
    assert ok(["hitting", "--family", "survival", "--p", "2/3", "--n", "1"])["p"] == ["1", "8/9"]
    assert ok(["hitting", "--family", "geometric", "--p", "2/3", "--n", "2"])["p"] == ["1", "2/3", "4/9"]
    assert ok(["hitting", "--family", "cylinder", "--n", "1", "--depth", "1"])["p"] == ["1", "5/9"]


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["closed-form", "hit", "--r", "1/3"], "3/4"),
        (["closed-form", "domain", "--r", "1/4"], "0"),
        (["closed-form", "partial", "--r", "1/5"], "1"),
        (["closed-form", "fixed-point", "--p", "2/3"], "3/4"),
        (["closed-form", "limit", "--p", "2/3"], "1/3"),
        (["capacity", "--cylinders", "01"], "4/9"),
    ],
)
def test_exact_scalars(argv, expected):
    assert ok(argv) == expected


def test_functions_commands():
    assert ok(["eval", "--function", "delay:01002000000000", "--x", "100"])["output"] == "10"
    res = ok(["eval", "--function", "partial-online:020000", "--x", "10"])
    assert res["status"] == "UNDEFINED_AT(1)"
    assert ok(["range-tree", "--function", "online:00000000000000", "--depth", "2"])["nodes"] == ["", "0", "00"]
    assert ok(["preimage-tree", "--function", "online:011010", "--y", "0"])["nodes"] == ["", "0"]


def test_sampling_is_deterministic():
    a = ok(["sample-function", "--depth", "4", "--seed", "3"])
    assert a == ok(["sample-function", "--depth", "4", "--seed", "3"])
    assert len(a["labels"]) == 30
    c = ok(["sample-closed-set", "--depth", "3", "--seed", "3"])
    assert c["nodes"][0] == ""


def test_oracle_and_mc():
    res = ok(["oracle", "--measure", "online", "--event", "hits:00", "--semantics", "online", "--depth", "2"])
    assert res["probability"] == "39/64" and res["satisfying_labelings"] == 39
    mc = ok(["mc", "--event", "range-contains:0", "--depth", "3", "--samples", "2000", "--seed", "1"])
    assert mc["samples"] == 2000 and 0 < mc["point"] < 1


def test_invert_and_martingale():
    r = ok(["invert-capacity", "--p", "online", "--n", "3"])["r"]
    assert r == ["1/2"] * 3
    r = ok(["invert-capacity", "--p", "(2/3)^n", "--n", "2", "--decimals", "8"])["r"]
    assert r[0]["approx"].startswith("0.42264973")
    assert ok(["martingale", "--word", "0"])["d"] == "4/3"
    adj = ok(["martingale", "--adjudicate", "--depth", "2"])
    assert adj["node_conditionals"]["ε"] == ["1/4", "1/4", "1/2"]


def test_alternating_check():
    res = ok(["alternating-check", "--sets", "00,01;01,10"])
    assert res["ok"] is True


@pytest.mark.parametrize(
    "argv,code",
    [
        (["closed-form", "hit", "--r", "one third"], cli.EXIT_RATIONAL),
        (["oracle", "--event", "total", "--depth", "9"], cli.EXIT_DEPTH),
        (["hitting", "--n", "x"], cli.EXIT_USAGE),
        (["no-such-command"], cli.EXIT_USAGE),
        (["closed-form", "hit", "--r", "0"], cli.EXIT_ERROR),
        (["eval", "--function", "delay:012", "--x", "0"], cli.EXIT_ERROR),
    ],
)
def test_exit_codes(argv, code):
    res = cli.run(argv)
    assert res.code == code
    assert res.to_json()["status"] == "error"


def test_invalid_capacity_exit(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("n,p\n0,1\n1,1/2\n2,1/2\n")
    res = cli.run(["invert-capacity", "--p", str(path), "--n", "2"])
    assert res.code == cli.EXIT_INVALID_CAPACITY
    assert res.message.startswith("INVALID_CAPACITY")


def test_csv_and_main(capsys):
    res = cli.run(["hitting", "--n", "2", "--format", "csv"])
    assert cli.render(res, res.fmt).splitlines() == ["n,value", "0,1", "1,3/4", "2,39/64"]
    assert cli.main(["closed-form", "hit", "--r", "1/3"]) == 0
    assert json.loads(capsys.readouterr().out) == "3/4"
    assert cli.main(["closed-form", "hit", "--r", "x"]) == cli.EXIT_RATIONAL
    assert json.loads(capsys.readouterr().err)["code"] == cli.EXIT_RATIONAL


def test_verify_fast():
    res = cli.run(["verify", "--tier", "fast"])
    assert res.ok and res.payload["passed"]
