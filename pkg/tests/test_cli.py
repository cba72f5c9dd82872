import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hesskit.cli import main
from hesskit.io import (
    SpecError,
    dumps_problem,
    hessian_from_dict,
    load_schema,
    parse_problem,
    problem_from_dict,
    problem_to_dict,
)

SPECS = Path(__file__).resolve().parent.parent / "specs"


def write(tmp_path, obj, name="spec.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def two_agent(**over):
    raw = {
        "dimension": 2,
        "n": 2,
        "edges": [{"i": 1, "j": 2, "family": "quartic_distance_squared", "params": {"d": 1.0}}],
        "positions": [[0.0, 0.0], [2.0, 0.0]],
    }
    raw.update(over)
    return raw


# ---- parsing ----------------------------------------------------------------------

def test_schema_is_valid_draft():
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(load_schema())


def test_round_trip_shipped_specs():
    for path in sorted(SPECS.glob("*.json")):
        prob = parse_problem(path.read_text())
        again = parse_problem(dumps_problem(prob))
        assert again == prob, path.name
        assert problem_to_dict(again) == problem_to_dict(prob)


@settings(max_examples=40, deadline=None)
@given(
    d=st.sampled_from([2, 3]),
    fam=st.sampled_from(["quartic_distance_squared", "quadratic_distance_error", "collision_z4"]),
    target=st.floats(0.1, 10),
    coords=st.lists(st.floats(-100, 100), min_size=9, max_size=9),
    pin=st.booleans(),
)
def test_round_trip_property(d, fam, target, coords, pin):
    raw = {
        "dimension": d,
        "n": 3,
        "edges": [{"i": 1, "j": 2, "family": fam, "params": {"d": target}},
                  {"i": 3, "j": 2, "family": "manipulability", "params": {"d": target, "e": "log"}}],
        "positions": [coords[k * 3:k * 3 + d] for k in range(3)],
        "pinned": [2] if pin else [],
        "settings": {"dt": 0.01},
    }
    if d == 2:
        raw["triangles"] = [{"i": 1, "j": 2, "k": 3, "S_star": 0.25, "K": 2.0}]
    prob = problem_from_dict(raw)
    assert parse_problem(dumps_problem(prob)) == prob


@pytest.mark.parametrize(
    "over, match",
    [
        ({"edges": [{"i": 1, "j": 1, "family": "collision_z4", "params": {"d": 1}}]}, "self-loop"),
        ({"edges": [{"i": 1, "j": 2, "family": "bogus"}]}, "schema"),
        ({"edges": [{"i": 1, "j": 2, "family": "collision_z4", "params": {"delta": 1}}]}, "parameters"),
        ({"positions": [[0, 0]]}, "positions"),
        ({"dimension": 3, "positions": [[0, 0, 0], [1, 0, 0]],
          "triangles": [{"i": 1, "j": 2, "k": 2, "S_star": 0, "K": 1}]}, "dimension 2"),
        ({"pinned": [3]}, "pinned"),
    ],
)
def test_parse_errors(over, match):
    with pytest.raises(SpecError, match=match):
        problem_from_dict(two_agent(**over))


def test_malformed_json_location():
    with pytest.raises(SpecError, match="line 2, column"):
        parse_problem('{"n": 2,\n  "dimension": }')


# ---- hessian ----------------------------------------------------------------------

def test_cmd_hessian_full(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hessian", write(tmp_path, two_agent()), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["dimension"] == 4
    H = hessian_from_dict(obj)
    # 2 z z^T + e I on the diagonal blocks with z = (2, 0), e = 3
    np.testing.assert_allclose(H[2:, 2:], [[11, 0], [0, 3]])
    assert obj["inertia"] == [0, 1, 3] or sum(obj["inertia"]) == 4
    assert obj["eigenvalues"] == sorted(obj["eigenvalues"])


def test_cmd_hessian_pinned_reduced(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hessian", str(SPECS / "two_agent_pinned.json"), "-o", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["dimension"] == 2
    np.testing.assert_allclose(hessian_from_dict(obj), [[2, 0], [0, 0]], atol=1e-15)


def test_cmd_hessian_both_and_text(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hessian", str(SPECS / "triangle_distance_area.json"), "--both", "-o", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["max_abs_deviation"] < 1e-5
    txt = tmp_path / "h.txt"
    assert main(["hessian", str(SPECS / "triangle_distance_area.json"), "--format", "txt", "-o", str(txt)]) == 0
    np.testing.assert_allclose(np.loadtxt(txt), hessian_from_dict(obj), rtol=0, atol=0)


def test_cmd_hessian_exit_codes(tmp_path, capsys):
    assert main(["hessian", write(tmp_path, '{"n": 2,\n "dimension": ]')]) == 1
    assert "line 2" in capsys.readouterr().err
    bad = two_agent(edges=[{"i": 1, "j": 2, "family": "connectedness_preserving", "params": {"delta": 1.5}}])
    assert main(["hessian", write(tmp_path, bad)]) == 2
    assert "edge #1 (1, 2)" in capsys.readouterr().err
    assert main(["hessian", str(tmp_path / "missing.json")]) == 1


# ---- verify -----------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(p.name for p in SPECS.glob("*.json")))
def test_cmd_verify_shipped_specs(name, tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", str(SPECS / name), "--seed", "7", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True


def test_cmd_verify_fault(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", str(SPECS / "triangle_distance_area.json"), "--perturb", "1", "2", "1e-2",
                 "-o", str(out)]) == 3
    rep = json.loads(out.read_text())
    assert rep["pass"] is False and rep["worst_hessian_entry"] == [1, 2]


def test_cmd_verify_domain(tmp_path):
    raw = two_agent(edges=[{"i": 1, "j": 2, "family": "connectedness_preserving", "params": {"delta": 2.00005}}])
    assert main(["verify", write(tmp_path, raw), "-o", str(tmp_path / "v.json")]) == 2


def test_cmd_verify_h_sweep(capsys):
    assert main(["verify", str(SPECS / "two_agent_quartic.json"), "--h-sweep"]) == 0
    out = capsys.readouterr().out
    slope = float(out.split("gradient")[1].split(",")[0])
    assert abs(slope - 2) < 0.2
    assert len([ln for ln in out.splitlines() if ln.strip().startswith("1.0e-")]) == 4


# ---- simulate / classify ----------------------------------------------------------

def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_cmd_simulate(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["simulate", str(SPECS / "two_agent_quartic.json"), "-o", str(out), "--classify"]) == 0
    header, data = read_csv(out)
    assert header == ["t", "p1_x", "p1_y", "p2_x", "p2_y", "V", "gradnorm"]
    assert np.all(np.diff(data[:, header.index("V")]) <= 1e-9)
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "psd-degenerate"
    assert report["inertia"]["n_zero"] == 3


def test_cmd_simulate_at_equilibrium(tmp_path):
    out = tmp_path / "t.csv"
    spec = write(tmp_path, two_agent(positions=[[0.0, 0.0], [1.0, 0.0]]))
    assert main(["simulate", spec, "-o", str(out), "--dt", "0.01"]) == 0
    _, data = read_csv(out)
    assert data.shape[0] == 1


def test_cmd_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    spec = str(SPECS / "triangle_distance_area.json")
    assert main(["simulate", spec, "-o", str(a), "--steps", "300"]) == 0
    assert main(["simulate", spec, "-o", str(b), "--steps", "300"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cmd_classify(tmp_path):
    out = tmp_path / "r.json"
    assert main(["classify", str(SPECS / "two_agent_pinned.json"), "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["inertia"] == {"n_minus": 0, "n_zero": 1, "n_plus": 1}
    assert main(["classify", str(SPECS / "two_agent_quartic.json"), "--integrate", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["termination"] == "converged"


# ---- reproduce --------------------------------------------------------------------

@pytest.mark.parametrize("case", ["pinned-pair", "pinned-triple", "collision-dual", "triangle-area", "two-triangle"])
def test_cmd_reproduce(case, capsys):
    assert main(["reproduce", case]) == 0
    assert "PASS" in capsys.readouterr().out


def test_cmd_reproduce_pinned_pair_unit_case(capsys):
    from hesskit.reproduce import pinned_pair_closed_form, pinned_pair_engine

    np.testing.assert_array_equal(pinned_pair_closed_form(1, 0, 1), [[2, 0], [0, 0]])
    assert np.max(np.abs(pinned_pair_engine(1.0, 0.0, 1.0) - pinned_pair_closed_form(1, 0, 1))) == 0


def test_cmd_reproduce_seeded_is_reproducible(capsys):
    assert main(["reproduce", "two-triangle", "--seed", "3", "-v"]) == 0
    first = capsys.readouterr().out
    assert main(["reproduce", "two-triangle", "--seed", "3", "-v"]) == 0
    assert capsys.readouterr().out == first
