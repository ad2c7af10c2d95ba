import csv
import io
import json

import pytest

from collar.cli import EXIT_HYPOTHESIS, EXIT_PASS, build_parser, dumps, main, render_text

FAST_TOML = """
[input]
family = "{family}"

[run]
resolution = 16
oracle = false

[audit]
multiplier = 1
"""


@pytest.fixture
def config(tmp_path):
    def make(family="sphere_circle_warped"):
        path = tmp_path / f"{family}.toml"
        path.write_text(FAST_TOML.format(family=family))
        return str(path)

    return make


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_extend_json_pass(capsys, config, tmp_path):
    code, out = run(capsys, ["extend", "--config", config(), "--out", str(tmp_path / "o")])
    assert code == EXIT_PASS
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["verdict"] == "pass"
    assert out.strip().endswith("report.json")


def test_json_is_deterministic(capsys, config):
    _, first = run(capsys, ["extend", "--config", config(), "--variant", "geodesic"])
    _, second = run(capsys, ["extend", "--config", config(), "--variant", "geodesic"])
    assert first == second
    assert json.loads(first)["conditions"] == {"I": True, "II": True, "III": True}


def test_flat_product_exit_code(capsys, config):
    code, out = run(capsys, ["extend", "--config", config("flat_product")])
    assert code == EXIT_HYPOTHESIS == 2
    err = json.loads(out)["error"]
    assert err["type"] == "MeanConvexityViolation" and err["exit_code"] == 2


def test_csv_rows(capsys, config):
    code, out = run(capsys, ["extend", "--config", config(), "--format", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    n_t = len({r[0] for r in rows[1:]})
    assert len(rows) - 1 == n_t * 16 * 16


def test_text_and_report_command(capsys, config, tmp_path):
    code, out = run(capsys, ["extend", "--config", config(), "--variant", "concave", "--format", "text"])
    assert code == 0 and out.startswith("variant concave: PASS")
    run(capsys, ["extend", "--config", config(), "--out", str(tmp_path)])
    code, out = run(capsys, ["report", "--input", str(tmp_path / "report.json")])
    assert code == 0 and "variant convex: PASS" in out
    code, out = run(capsys, ["report", "--input", str(tmp_path / "missing.json")])
    assert code == 1 and json.loads(out)["error"]["type"] == "ArgumentError"


def test_verify_examples_command(capsys):
    code, out = run(capsys, ["verify-examples", "--format", "text"])
    assert code == 0
    assert "totally_geodesic" in out and out.startswith("example catalog")


def test_curvature_oracle_refined(capsys, config):
    code, out = run(capsys, ["curvature-oracle", "--config", config(), "--refine"])
    doc = json.loads(out)
    assert code == 0
    assert [lv["resolution"] for lv in doc["levels"]] == [16, 32]
    assert doc["levels"][1]["max_discrepancy"] < doc["levels"][0]["max_discrepancy"]


def test_bad_variant_is_usage_error():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["extend", "--variant", "saddle"])
    assert info.value.code == 2


def test_dumps_and_render_error():
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')
    assert render_text({"error": {"type": "X", "message": "m"}}) == "X: m\n"
