"""CLI contract oracles, frozen before the implementation.

Exit-code contract:
- [TRIVIAL] 0 on success, 1 on verification/search failure, 2 on invalid
  input (schema violation, malformed JSON with line/column diagnostic,
  missing mandatory seed for stochastic kinds, unknown kind).

Frozen outputs:
- [PAPER] `census` on a rectangle table: half-counts m1 = 0, m3 = 2,
  m4 = 0 and the Euler identity -2*m1 + 2*m3 + 4*m4 = 4 holds.
- [DERIVED] `cylinder-cert` with lambda = 1/2, a = b = 1/2: the search
  succeeds and independent verification passes (verified: true).
- [DERIVED] `verdict` on the rectangle census: m3/3 + m4/2 = 2/3 <= 1, so
  the census criterion fires.
- [DERIVED] rectangle unfolding: 48 squares, genus 5, stratum (2,2,2,2).
- [TRIVIAL] every summary embeds tool version, config hash, seed and
  precision mode; identical (config, seed) reruns in exact mode produce
  bit-identical summary files.
"""

import json

import pytest

from windtree.cli import main


def _cfg(tmp_path, data, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


RECT_TABLE = {
    "lattice": [["1", "0"], ["0", "1"]],
    "polygon": {"rectangle": ["1/2", "1/2"]},
}


def _run(tmp_path, data, capsys):
    code = main(["run", _cfg(tmp_path, data), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_census_rectangle(tmp_path, capsys):
    code, summary = _run(tmp_path, {"kind": "census", "table": RECT_TABLE}, capsys)
    assert code == 0
    r = summary["result"]
    assert (r["m1"], r["m3"], r["m4"]) == (0, 2, 0)
    assert r["euler_ok"] is True


def test_summary_provenance_fields(tmp_path, capsys):
    code, summary = _run(tmp_path, {"kind": "census", "table": RECT_TABLE}, capsys)
    assert code == 0
    for key in ("version", "config_sha256", "kind", "precision"):
        assert key in summary
    assert (tmp_path / "census_summary.json").exists()


def test_cylinder_cert_verified(tmp_path, capsys):
    data = {"kind": "cylinder-cert",
            "table": {"lambda": "1/2", "a": "1/2", "b": "1/2"}}
    code, summary = _run(tmp_path, data, capsys)
    assert code == 0
    assert summary["result"]["verified"] is True
    assert "certificate" in summary["result"]


def test_unfold_rectangle(tmp_path, capsys):
    code, summary = _run(tmp_path, {"kind": "unfold", "table": RECT_TABLE}, capsys)
    assert code == 0
    r = summary["result"]
    assert r["n_squares"] == 48
    assert r["genus"] == 5
    assert r["stratum"] == [2, 2, 2, 2]


def test_verdict_census_fires(tmp_path, capsys):
    code, summary = _run(tmp_path, {"kind": "verdict", "table": RECT_TABLE}, capsys)
    assert code == 0
    assert summary["result"]["fired"] == "census"


def test_admissible(tmp_path, capsys):
    code, summary = _run(tmp_path, {"kind": "admissible", "table": RECT_TABLE}, capsys)
    assert code == 0
    assert summary["result"]["admissible"] is True


def test_free_pair(tmp_path, capsys):
    data = {"kind": "free-pair", "table": {
        "lattice": [["1", "0"], ["0", "1"]],
        "polygon": {"sucker": {"kind": "a", "width": "1/2", "height": "1/2",
                               "slit": "1/4"}},
    }}
    code, summary = _run(tmp_path, data, capsys)
    assert code == 0
    assert summary["result"]["corner"] in ("A_0", "A_1")


def test_essential_scan_rotation(tmp_path, capsys):
    data = {"kind": "essential-scan",
            "scan": {"system": "rotation", "alpha": 0.6180339887498949,
                     "psi": "constant"},
            "budgets": {"N": 100, "depth": 3, "window": 6, "grid": 4}}
    code, summary = _run(tmp_path, data, capsys)
    assert code == 0
    assert [0] in summary["result"]["observed"]


def test_winding_torus(tmp_path, capsys):
    data = {"kind": "winding", "seed": 5,
            "table": {"lattice": [["1", "0"], ["0", "1"]],
                      "polygon": {"rectangle": ["1/2", "1/2"]}},
            "budgets": {"n_steps": 2000, "n_orbits": 2},
            "classes": ["gamma_h"]}
    code, summary = _run(tmp_path, data, capsys)
    assert code == 0
    assert len(summary["result"]["exponents"]) == 1
    csv = (tmp_path / "winding_series.csv").read_text().splitlines()
    assert csv[0].startswith("n,")


def test_diffusion_reproducible(tmp_path, capsys):
    data = {"kind": "diffusion", "seed": 11,
            "table": {"lambda": "0", "a": "1/2", "b": "1/2"},
            "budgets": {"T": 2000.0, "dt": 2.0, "n_orbits": 30}}
    code1, s1 = _run(tmp_path, data, capsys)
    first = (tmp_path / "diffusion_summary.json").read_bytes()
    code2, s2 = _run(tmp_path, data, capsys)
    second = (tmp_path / "diffusion_summary.json").read_bytes()
    assert code1 == code2 == 0
    assert first == second
    assert 0.0 <= s1["result"]["exponent"] <= 1.2


def test_malformed_json_line_column(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "census",\n  "table": }')
    code = main(["run", str(p), "--out", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 2" in err and "column" in err


def test_malformed_polygon_rejected(tmp_path, capsys):
    data = {"kind": "census", "table": {
        "lattice": [["1", "0"], ["0", "1"]],
        "polygon": {"vertices": [["0", "0"], ["1", "0"], ["1", "1"]]},
    }}
    code = main(["run", _cfg(tmp_path, data), "--out", str(tmp_path)])
    assert code == 2
    assert "invalid" in capsys.readouterr().err


def test_missing_seed_for_stochastic_kind(tmp_path, capsys):
    data = {"kind": "diffusion",
            "table": {"lambda": "0", "a": "1/2", "b": "1/2"},
            "budgets": {"T": 2000.0, "dt": 2.0, "n_orbits": 30}}
    code, _ = _run(tmp_path, data, capsys)
    assert code == 2


def test_unknown_kind(tmp_path, capsys):
    code, _ = _run(tmp_path, {"kind": "frobnicate"}, capsys)
    assert code == 2


def test_nonpositive_budget_rejected(tmp_path, capsys):
    data = {"kind": "diffusion", "seed": 1,
            "table": {"lambda": "0", "a": "1/2", "b": "1/2"},
            "budgets": {"T": -5.0, "dt": 2.0, "n_orbits": 30}}
    code, _ = _run(tmp_path, data, capsys)
    assert code == 2
