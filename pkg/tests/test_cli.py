"""Command-line interface: exit codes, determinism, schemas, round-trips."""

import json
import pathlib

import pytest

import gsp4bessel.bessel as bessel_module
from gsp4bessel.cli import main, read_report

SCHEMAS = pathlib.Path(__file__).resolve().parent.parent / "schemas"


def _validate(payload, schema_name):
    import jsonschema

    with open(SCHEMAS / schema_name) as fh:
        schema = json.load(fh)
    jsonschema.Draft202012Validator(schema).validate(payload)


def _run(argv, tmp_path, name):
    out = tmp_path / name
    rc = main(argv + ["--out", str(out)])
    return rc, out.read_bytes()


def test_chartab_json(tmp_path):
    rc, raw = _run(["chartab", "--q", "2", "--format", "json"], tmp_path, "ct.json")
    assert rc == 0
    payload = json.loads(raw)
    assert payload["q"] == 2
    assert payload["group_order"] == 720
    assert payload["n_characters"] == 11
    assert sorted(payload["degrees"]) == [1, 1, 5, 5, 5, 5, 9, 9, 10, 10, 16]
    _validate(payload, "chartab.schema.json")


def test_chartab_refuses_oversized_group(capsys):
    rc = main(["chartab", "--q", "9", "--format", "json"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "budget" in err or "memory" in err.lower()


def test_invalid_field_size(capsys):
    assert main(["chartab", "--q", "6"]) == 2
    assert main(["chartab", "--q", "121"]) == 2
    assert main(["table", "--model", "N", "--q", "2", "--threads", "0"]) == 2


def test_table_n_is_deterministic(tmp_path):
    rc1, a = _run(["table", "--model", "N", "--q", "3", "--format", "json"], tmp_path, "a.json")
    rc2, b = _run(["table", "--model", "N", "--q", "3", "--format", "json"], tmp_path, "b.json")
    assert rc1 == rc2 == 0
    assert a == b
    rc3, c = _run(["table", "--model", "N", "--q", "3", "--format", "csv"], tmp_path, "a.csv")
    rc4, d = _run(["table", "--model", "N", "--q", "3", "--format", "csv"], tmp_path, "b.csv")
    assert rc3 == rc4 == 0
    assert c == d
    assert b"\r" not in c
    _validate(json.loads(a), "table-n.schema.json")


def test_table_round_trip(tmp_path):
    _, js = _run(["table", "--model", "N", "--q", "2", "--format", "json"], tmp_path, "t.json")
    _, cs = _run(["table", "--model", "N", "--q", "2", "--format", "csv"], tmp_path, "t.csv")
    jrows = json.loads(js)["rows"]
    crows = read_report(cs.decode(), "csv")
    assert len(jrows) == len(crows) == 11
    jkey = {(r["index"], r["degree"]) for r in jrows}
    ckey = {(r["row"], r["degree"]) for r in crows}
    assert jkey == ckey
    for jr, cr in zip(sorted(jrows, key=lambda r: r["index"]),
                      sorted(crows, key=lambda r: r["row"])):
        for col, val in jr["dims"].items():
            assert cr[col] == val


def test_table_r_output(tmp_path):
    rc, raw = _run(
        ["table", "--model", "R", "--q", "2", "--a", "1", "--b", "1", "--c", "1",
         "--format", "json"],
        tmp_path,
        "r.json",
    )
    assert rc == 0
    payload = json.loads(raw)
    _validate(payload, "table-r.schema.json")
    assert len(payload["characters"]) == 3
    assert len(payload["rows"]) == 3 * 11
    dims = {(r["chi_index"], r["row"]): r["dim"] for r in payload["rows"]}
    total = sum(dims.values())
    # column sums reproduce the one-sided table for this datum
    assert total == sum(
        v for v in bessel_module._LITERAL_Q2_NONSPLIT.values() for v in v
    )

    rc2, raw2 = _run(
        ["table", "--model", "R", "--q", "2", "--a", "1", "--b", "1", "--c", "1",
         "--chi", "0", "--format", "json"],
        tmp_path,
        "r0.json",
    )
    assert rc2 == 0
    rows0 = json.loads(raw2)["rows"]
    assert len(rows0) == 11
    assert all(r["chi_index"] == 0 for r in rows0)


def test_table_r_degenerate_datum(capsys):
    rc = main(["table", "--model", "R", "--q", "3", "--a", "1", "--b", "0", "--c", "0"])
    assert rc == 2


def test_verify_all_q2(tmp_path):
    rc, raw = _run(["verify", "--q", "2", "--format", "json"], tmp_path, "v.json")
    assert rc == 0
    payload = json.loads(raw)
    assert payload["ok"] is True
    assert set(payload["suites"]) == {
        "lemmas", "canonical-forms", "types", "table-n", "table-r", "corollary"
    }
    assert all(entry["ok"] for entry in payload["suites"].values())
    _validate(payload, "verify.schema.json")


def test_verify_single_suite_without_group(tmp_path):
    rc, raw = _run(
        ["verify", "--q", "7", "--suite", "lemmas", "--format", "json"],
        tmp_path,
        "v7.json",
    )
    assert rc == 0
    payload = json.loads(raw)
    assert payload["ok"] is True
    _validate(payload, "verify.schema.json")


def test_verify_reports_failures(tmp_path, monkeypatch):
    def fake_brute(field, a, b, c):
        return {"cone": 10**6, "square": 0, "nonsquare": 0}

    monkeypatch.setattr(bessel_module, "brute_locus_sums", fake_brute)
    rc, raw = _run(
        ["verify", "--q", "3", "--suite", "lemmas", "--format", "json"],
        tmp_path,
        "vf.json",
    )
    assert rc == 1
    payload = json.loads(raw)
    assert payload["ok"] is False
    assert payload["failure"]["suite"] == "lemmas"
    assert payload["failure"]["counterexample"]["datum"] == [0, 0, 0]
    assert payload["failure"]["counterexample"]["brute"] == 10**6
    _validate(payload, "verify.schema.json")


def test_format_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GSP4B_FORMAT", "json")
    rc, raw = _run(["chartab", "--q", "2"], tmp_path, "env.json")
    assert rc == 0
    json.loads(raw)


def test_bench_runs_all_backends(tmp_path):
    from gsp4bessel import kernels

    rc, raw = _run(["bench", "--q", "2", "--format", "json"], tmp_path, "bench.json")
    assert rc == 0
    payload = json.loads(raw)
    _validate(payload, "bench.schema.json")
    names = {entry["backend"] for entry in payload["runs"]}
    assert names == set(kernels.available_backends())


def test_cache_reuse(tmp_path):
    cache = tmp_path / "cache"
    args = ["chartab", "--q", "3", "--format", "json", "--cache", str(cache)]
    rc1, a = _run(args, tmp_path, "c1.json")
    assert rc1 == 0
    files = list(cache.glob("*.json"))
    assert len(files) == 1
    rc2, b = _run(args, tmp_path, "c2.json")
    assert rc2 == 0
    assert a == b


def test_text_format_smoke(capsys):
    assert main(["chartab", "--q", "2"]) == 0
    out = capsys.readouterr().out
    assert "720" in out
    assert main(["verify", "--q", "2", "--suite", "table-n"]) == 0
    assert "ok" in capsys.readouterr().out.lower()
