import json
import textwrap

import pytest

from algebroidlab.cache import ResultCache, cache_key
from algebroidlab.cartan import parse_form
from algebroidlab.cli import main, run_manifest
from algebroidlab.manifest import Manifest, ParseError, ValidationError
from algebroidlab.ring import Context

DLOG = textwrap.dedent("""
    version: 1
    variables: [x1, x2]
    charts: [U, V, W]
    nerve:
      - [U, V]
      - [U, W]
      - [V, W]
      - [U, V, W]
    bundle:
      rank: 1
      cocycle:
        - {pair: [U, V], rows: [["x1"]]}
        - {pair: [V, W], rows: [["x2"]]}
        - {pair: [U, W], rows: [["x1*x2"]]}
    connections: flat
    tasks: [pontryagin]
    seed: 0
""")


def manifest_path(tmp_path, text, name="m.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------- schema


def test_manifest_requires_version():
    with pytest.raises(ValidationError):
        Manifest("tasks: [ch2]\ncharts: [U]\n")


def test_manifest_rejects_bad_yaml():
    with pytest.raises(ParseError):
        Manifest("tasks: [unterminated\n  - ] ::\n")


def test_manifest_rejects_scalar_document():
    with pytest.raises(ParseError):
        Manifest("just a string\n")


def test_manifest_rejects_unknown_task():
    with pytest.raises(ValidationError) as err:
        Manifest("version: 1\ntasks: [frobnicate]\n")
    assert "frobnicate" in str(err.value)


def test_manifest_rejects_unknown_field():
    with pytest.raises(ValidationError):
        Manifest("version: 1\ntasks: [verify-lemmas]\nextra: 3\n")


def test_manifest_rejects_missing_cover_fields():
    with pytest.raises(ValidationError):
        Manifest("version: 1\nvariables: [x1]\ntasks: [ch2]\n")


def test_manifest_rejects_bad_expression():
    text = DLOG.replace('[["x1"]]', '[["x1 +"]]')
    with pytest.raises(ParseError):
        run_manifest(Manifest(text), use_cache=False)


def test_manifest_cocycle_violation_names_triple():
    text = DLOG.replace('[["x1*x2"]]', '[["x1"]]')
    with pytest.raises(ValidationError) as err:
        run_manifest(Manifest(text), use_cache=False)
    assert "(0, 1, 2)" in str(err.value)


def test_manifest_frame_validation():
    text = textwrap.dedent("""
        version: 1
        variables: [x1, x2]
        charts: [U, V]
        nerve: [[U, V]]
        frames:
          U: [["x2", "0"], ["0", "1"]]
        tasks: [eva-class]
    """)
    with pytest.raises(ValidationError):
        run_manifest(Manifest(text), use_cache=False)


def test_manifest_rejects_wrong_primitive():
    text = textwrap.dedent("""
        version: 1
        variables: [x1, x2]
        charts: [U, V]
        nerve: [[U, V]]
        bundle:
          rank: 1
          cocycle:
            - {pair: [U, V], rows: [["1"]]}
        connections: flat
        primitives:
          U: "x1 * d(x1)^d(x2)"
          V: "0"
        tasks: [pontryagin]
    """)
    with pytest.raises(ValidationError) as err:
        run_manifest(Manifest(text), use_cache=False)
    assert "primitive" in str(err.value)


# ---------------------------------------------------------------- runs


def test_dlog_run_payload_frozen():
    report = run_manifest(Manifest(DLOG), use_cache=False)
    assert report.ok
    task = report.tasks[0]
    assert task["name"] == "pontryagin" and task["status"] == "pass"
    value = task["payload"]["cocycle"]["2,2"]["0,1,2"]
    ctx = Context(["x1", "x2"])
    x1, x2 = ctx.vars()
    expected = parse_form(ctx, "d(x1)^d(x2)") * (-ctx.one / (x1 * x2))
    assert parse_form(ctx, value) == expected


def test_machine_report_deterministic():
    a = run_manifest(Manifest(DLOG), use_cache=False).to_machine()
    b = run_manifest(Manifest(DLOG), use_cache=False).to_machine()
    assert a == b
    parsed = json.loads(a)
    assert parsed["status"] == "pass"
    assert parsed["tasks"][0]["timing"] is None


def test_seed_changes_report_but_not_outcome():
    text = textwrap.dedent("""
        version: 1
        variables: [x1, x2, x3]
        tasks: [check-axioms]
        samples: 5
    """)
    man = Manifest(text)
    r1 = run_manifest(man, seed=3, use_cache=False)
    r2 = run_manifest(man, seed=4, use_cache=False)
    assert r1.ok and r2.ok
    assert json.loads(r1.to_machine())["seed"] == 3


def test_cache_hit_preserves_bytes(tmp_path):
    man = Manifest(DLOG)
    first = run_manifest(man, cache_dir=str(tmp_path))
    assert any(tmp_path.iterdir())
    second = run_manifest(man, cache_dir=str(tmp_path))
    assert first.to_machine() == second.to_machine()
    assert second.tasks[0]["elapsed"] is None  # replayed, not recomputed


def test_cache_ignores_corruption(tmp_path):
    cache = ResultCache(str(tmp_path))
    key = cache_key({"a": 1})
    assert cache.get(key) is None
    cache.put(key, {"name": "x"})
    assert cache.get(key) == {"name": "x"}
    (tmp_path / (key + ".json")).write_text("{broken")
    assert cache.get(key) is None


def test_cache_key_varies_with_inputs():
    base = {"task": "ch2", "manifest": "aa", "seed": 0,
            "degree_bound": 6, "samples": 50, "version": "0.1.0"}
    assert cache_key(base) != cache_key(dict(base, seed=1))
    assert cache_key(base) != cache_key(dict(base, manifest="bb"))
    assert cache_key(base) == cache_key(dict(base))


# ---------------------------------------------------------------- main()


def test_main_dlog_text(tmp_path, capsys):
    path = manifest_path(tmp_path, DLOG)
    code = main(["run", path, "--no-cache"])
    out = capsys.readouterr().out
    assert code == 0
    assert "pontryagin" in out and "result: pass" in out


def test_main_bad_cocycle_exits_2(tmp_path, capsys):
    text = DLOG.replace('[["x1*x2"]]', '[["x2"]]')
    path = manifest_path(tmp_path, text)
    code = main(["run", path, "--no-cache"])
    err = capsys.readouterr().err
    assert code == 2
    assert "(0, 1, 2)" in err


def test_main_missing_file_exits_2(tmp_path, capsys):
    code = main(["run", str(tmp_path / "absent.yaml")])
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_main_machine_format_and_out(tmp_path, capsys):
    path = manifest_path(tmp_path, DLOG)
    out_path = tmp_path / "report.json"
    code = main(["run", path, "--no-cache", "--format", "machine",
                 "--out", str(out_path)])
    stdout = capsys.readouterr().out
    assert code == 0
    assert json.loads(stdout)["tool"] == "algebroidlab"
    assert out_path.read_text() == stdout


def test_main_seed_override_reflected(tmp_path, capsys):
    path = manifest_path(tmp_path, DLOG)
    code = main(["run", path, "--no-cache", "--format", "machine", "--seed", "9"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 9


# ---------------------------------------------------------------- cover tasks


SHEAR = textwrap.dedent("""
    version: 1
    variables: [x1, x2, x3]
    charts: [U0, U1, U2]
    transitions:
      - {from: U0, to: U1, images: {x2: "x2 + x1^2"}}
      - {from: U1, to: U0, images: {x2: "x2 - x1^2"}}
      - {from: U1, to: U2, images: {x1: "x1 + x2^2"}}
      - {from: U2, to: U1, images: {x1: "x1 - x2^2"}}
      - {from: U0, to: U2, images: {x1: "x1 + x2^2", x2: "x2 + x1^2 + 2*x1*x2^2 + x2^4"}}
      - {from: U2, to: U0, images: {x1: "x1 - x2^2 + 2*x1^2*x2 - x1^4", x2: "x2 - x1^2"}}
    nerve:
      - [U0, U1]
      - [U0, U2]
      - [U1, U2]
      - [U0, U1, U2]
    bundle: cotangent
    connections: flat
    tasks: [ch2, eva-class, compare-classes]
    degree_bound: 8
""")


def test_shear_compare_run():
    report = run_manifest(Manifest(SHEAR), use_cache=False)
    assert report.ok, report.tasks
    by_name = {t["name"]: t for t in report.tasks}
    ctx = Context(["x1", "x2", "x3"])
    ch2_payload = by_name["ch2"]["payload"]["cocycle"]
    assert parse_form(ctx, ch2_payload["2,2"]["0,1,2"]) == \
        parse_form(ctx, "(-2) * d(x1)^d(x2)")
    assert by_name["eva-class"]["payload"]["vanishes"]
    compare = by_name["compare-classes"]["payload"]
    assert compare["orientation"] == "difference"
    assert "primitive" in compare


def test_identity_cover_everything_vanishes():
    text = textwrap.dedent("""
        version: 1
        variables: [x1, x2]
        charts: [U, V, W]
        nerve:
          - [U, V]
          - [U, W]
          - [V, W]
          - [U, V, W]
        bundle: cotangent
        connections: flat
        tasks: [ch2, eva-class, compare-classes]
    """)
    report = run_manifest(Manifest(text), use_cache=False)
    assert report.ok
    by_name = {t["name"]: t for t in report.tasks}
    assert by_name["ch2"]["payload"]["cocycle"] == {}
    assert by_name["eva-class"]["payload"]["vanishes"]


def test_verify_lemmas_small():
    text = "version: 1\ntasks: [verify-lemmas]\nsamples: 4\nseed: 5\n"
    report = run_manifest(Manifest(text), use_cache=False)
    assert report.ok, [f for t in report.tasks for f in t["failures"]][:5]
    assert report.tasks[0]["checks"] > 300
