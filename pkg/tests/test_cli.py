"""CLI surface tests: flag grammar, exit codes, emitted documents against the
shipped schemas, byte determinism, custom matrices, and cache behavior."""

import json
from pathlib import Path

import jsonschema
import pytest

from qkflag.cli import CACHE_ENV_VAR, main

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "qkflag" / "schemas"
JFUN_SCHEMA = json.loads((SCHEMA_DIR / "jfun.schema.json").read_text())
STATS_SCHEMA = json.loads((SCHEMA_DIR / "stats.schema.json").read_text())
REPORT_SCHEMA = json.loads((SCHEMA_DIR / "report.schema.json").read_text())


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# jfun
# ---------------------------------------------------------------------------


def test_jfun_factored_a1(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "1", "--format", "factored"])
    assert code == 0
    assert "J[(1)] = (1) / [(1 - q) (1 - q z1)]" in out


def test_jfun_json_alpha_zero(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "0", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, JFUN_SCHEMA)
    assert doc["value"]["numerator"] == [[[0, 0], "1/1"]]
    assert doc["value"]["denominator"] == []


def test_jfun_up_to_entry_count(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A2", "--up-to", "1,1", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, JFUN_SCHEMA)
    assert len(doc["entries"]) == 4


def test_jfun_series_format(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "1", "--format", "series:3"])
    assert code == 0
    assert "grade 0: 1" in out
    assert "grade 3: 1 + z1 + z1^2 + z1^3" in out


def test_jfun_latex_balanced(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A2", "--alpha", "1,1", "--format", "latex"])
    assert code == 0
    assert out.count("{") == out.count("}")
    assert out.count("\\[") == out.count("\\]")
    assert out.startswith("\\documentclass")
    assert out.rstrip().endswith("\\end{document}")


def test_jfun_affine_series_uses_joint_grading(capsys):
    code, out, _ = run(capsys, ["jfun", "--type", "A1~", "--alpha", "1,1", "--format", "series:4"])
    assert code == 0
    assert "grading: joint" in out


def test_jfun_requires_exactly_one_target(capsys):
    with pytest.raises(SystemExit) as err:
        main(["jfun", "--type", "A1", "--alpha", "1", "--up-to", "2"])
    assert err.value.code == 2
    capsys.readouterr()


def test_jfun_bad_alpha_is_config_error(capsys):
    code, _, err = run(capsys, ["jfun", "--type", "A1", "--alpha", "x"])
    assert code == 2
    assert "error" in err


def test_jfun_negative_alpha_is_config_error(capsys):
    code, _, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "-1"])
    assert code == 2


def test_jfun_unknown_format(capsys):
    code, _, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "1", "--format", "csv"])
    assert code == 2


def test_unsupported_type_exit_code(capsys):
    code, _, _ = run(capsys, ["jfun", "--type", "Z9", "--alpha", "1"])
    assert code == 3
    code, _, _ = run(capsys, ["jfun", "--type", "B3~", "--alpha", "1,0,0,0"])
    assert code == 3


def test_byte_determinism(capsys):
    argv = ["jfun", "--type", "B2", "--up-to", "1,1", "--format", "json", "--seed", "4"]
    code1, out1, _ = run(capsys, argv)
    code2, out2, _ = run(capsys, argv)
    assert code1 == code2 == 0
    assert out1 == out2


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_recursion_cli(capsys):
    code, out, _ = run(capsys, ["verify", "recursion", "--type", "A2", "--height", "3"])
    assert code == 0
    assert "result: pass" in out


def test_verify_positivity_affine_cli(capsys):
    code, out, _ = run(
        capsys,
        ["verify", "positivity", "--type", "A1~", "--height", "2", "--grading", "joint", "--order", "8"],
    )
    assert code == 0


def test_verify_positivity_bad_grading_is_config_error(capsys):
    code, _, _ = run(
        capsys, ["verify", "positivity", "--type", "A1~", "--height", "1", "--grading", "q"]
    )
    assert code == 2


def test_verify_json_report_schema(capsys):
    code, out, _ = run(
        capsys, ["verify", "determinant", "--type", "G2", "--trials", "100", "--format", "json"]
    )
    assert code == 0
    jsonschema.validate(json.loads(out), REPORT_SCHEMA)


def test_verify_affine_chart_cli(capsys):
    code, out, _ = run(capsys, ["verify", "affine-chart", "--nodes", "3", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True


def test_verify_subdiagram_cli(capsys):
    code, _, _ = run(
        capsys,
        ["verify", "subdiagram", "--type", "A3", "--sub", "A2", "--indices", "0,1", "--alpha", "2,1,0"],
    )
    assert code == 0


def test_verify_unsupported_type(capsys):
    # works without --height thanks to the default, matching the flag grammar
    code, _, _ = run(capsys, ["verify", "recursion", "--type", "Z9"])
    assert code == 3


def test_verify_failure_exits_1(capsys, monkeypatch):
    import qkflag.cli as cli_mod
    from qkflag.verify import VerificationReport

    failed = VerificationReport(
        suite="recursion",
        datum_label="A2",
        params={"height_bound": 3},
        passed=False,
        witness={"alpha": [1, 0], "residual": {"rank": 2, "terms": [[[0, 0, 0], "1/1"]]}},
    )
    monkeypatch.setattr(cli_mod, "verify_recursion", lambda *a, **k: failed)
    code, out, _ = run(capsys, ["verify", "recursion", "--type", "A2", "--height", "3"])
    assert code == 1
    assert "FAIL" in out
    assert "witness" in out


def test_internal_invariant_exits_4(capsys, monkeypatch):
    import qkflag.cli as cli_mod
    from qkflag.errors import InternalInvariantError

    def boom(*a, **k):
        raise InternalInvariantError("conflicting table entries")

    monkeypatch.setattr(cli_mod, "verify_recursion", boom)
    code, _, err = run(capsys, ["verify", "recursion", "--type", "A2", "--height", "1"])
    assert code == 4
    assert "bug" in err


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def test_stats_record_a2(capsys):
    code, out, _ = run(capsys, ["stats", "--type", "A2", "--alpha", "1,1"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, STATS_SCHEMA)
    assert doc["height"] == 2
    assert doc["dim"] == 4
    assert doc["eigenchar"] == "q z1 z2"
    assert doc["discrepancy"] == 1
    assert doc["orders"] == [1, 1]


def test_stats_non_simply_laced_discrepancy_null(capsys):
    code, out, _ = run(capsys, ["stats", "--type", "G2", "--alpha", "1,1"])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, STATS_SCHEMA)
    assert doc["discrepancy"] is None
    assert "simply-laced" in doc["discrepancy_reason"]
    assert sorted(doc["orders"]) == [1, 3]


def test_stats_zero_alpha(capsys):
    code, out, _ = run(capsys, ["stats", "--type", "A1", "--alpha", "0"])
    assert code == 0
    doc = json.loads(out)
    assert doc["dim"] == 0
    assert doc["discrepancy"] is None


def test_stats_affine_orders_flagged(capsys):
    code, out, _ = run(capsys, ["stats", "--type", "A2~", "--alpha", "1,1,1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["orders_extrapolated"] is True


# ---------------------------------------------------------------------------
# custom matrices
# ---------------------------------------------------------------------------


def write_matrix(tmp_path, obj, name="matrix.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def test_custom_matrix_file(tmp_path, capsys):
    path = write_matrix(tmp_path, {"matrix": [[2, -1], [-3, 2]], "label": "my-g2"})
    code, out, _ = run(capsys, ["stats", "--matrix", path, "--alpha", "1,1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["type"] == "my-g2"
    assert doc["metadata"]["symmetrizers"] == [3, 1]


def test_custom_affine_needs_escape_hatch(tmp_path, capsys):
    obj = {"matrix": [[2, -2], [-2, 2]], "affine": True}
    path = write_matrix(tmp_path, obj)
    code, _, err = run(capsys, ["jfun", "--matrix", path, "--alpha", "1,0"])
    assert code == 3
    assert "unverified-affine" in err
    code, out, _ = run(
        capsys, ["jfun", "--matrix", path, "--alpha", "1,0", "--format", "json", "--unverified-affine"]
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["conjectural"] is True


def test_custom_matrix_bad_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{", encoding="utf-8")
    code, _, _ = run(capsys, ["stats", "--matrix", str(path), "--alpha", "1"])
    assert code == 2


def test_custom_matrix_not_symmetrizable(tmp_path, capsys):
    path = write_matrix(tmp_path, {"matrix": [[2, -1], [0, 2]]})
    code, _, _ = run(capsys, ["stats", "--matrix", path, "--alpha", "1,1"])
    assert code == 3


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------


def test_cache_roundtrip_cli(tmp_path, capsys):
    code, out, _ = run(
        capsys, ["cache-roundtrip", "--type", "A2", "--up-to", "2,2", "--cache-dir", str(tmp_path)]
    )
    assert code == 0
    assert "cache round-trip ok" in out


def test_cache_corrupted_file_exit_5(tmp_path, capsys):
    code, _, _ = run(
        capsys, ["cache-roundtrip", "--type", "A1", "--up-to", "2", "--cache-dir", str(tmp_path)]
    )
    assert code == 0
    cache_file = next(tmp_path.glob("*.json"))
    text = cache_file.read_text()
    cache_file.write_text(text.replace('"1/1"', '"zzz"', 1))
    # jfun against the damaged cache reports corruption
    code, _, err = run(
        capsys, ["jfun", "--type", "A1", "--alpha", "2", "--cache-dir", str(tmp_path)]
    )
    assert code == 5
    assert "corrupt" in err


def test_cache_roundtrip_detects_truncated_file(tmp_path, capsys):
    code, _, _ = run(
        capsys, ["cache-roundtrip", "--type", "A1", "--up-to", "1", "--cache-dir", str(tmp_path)]
    )
    assert code == 0
    cache_file = next(tmp_path.glob("*.json"))
    cache_file.write_text(cache_file.read_text()[:25])
    code, _, err = run(
        capsys, ["cache-roundtrip", "--type", "A1", "--up-to", "1", "--cache-dir", str(tmp_path)]
    )
    assert code == 5
    assert "unreadable" in err or "corrupt" in err or "entries" in err


def test_cache_version_mismatch_recomputed(tmp_path, capsys):
    code, _, _ = run(
        capsys, ["cache-roundtrip", "--type", "A1", "--up-to", "1", "--cache-dir", str(tmp_path)]
    )
    assert code == 0
    cache_file = next(tmp_path.glob("*.json"))
    renamed = cache_file.with_name(cache_file.name.replace("__v1", "__v0"))
    cache_file.rename(renamed)
    obj = json.loads(renamed.read_text())
    obj["engine_version"] = "0"
    renamed.write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    code, out, _ = run(
        capsys, ["jfun", "--type", "A1", "--alpha", "1", "--cache-dir", str(tmp_path)]
    )
    assert code == 0


def test_cache_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(CACHE_ENV_VAR, str(tmp_path))
    code, _, _ = run(capsys, ["jfun", "--type", "A1", "--alpha", "1"])
    assert code == 0
    assert list(tmp_path.glob("*.json"))


def test_cache_flag_overrides_env(tmp_path, capsys, monkeypatch):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    env_dir.mkdir()
    monkeypatch.setenv(CACHE_ENV_VAR, str(env_dir))
    code, _, _ = run(
        capsys, ["jfun", "--type", "A1", "--alpha", "1", "--cache-dir", str(flag_dir)]
    )
    assert code == 0
    assert list(flag_dir.glob("*.json"))
    assert not list(env_dir.glob("*.json"))
