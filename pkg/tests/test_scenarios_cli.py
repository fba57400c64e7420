import csv
import json
import random

import pytest

from _gen import labels, random_of_kind
from quantal.cli import main
from quantal.errors import ScenarioError, TotalPreclusion
from quantal.events import make_space
from quantal.measure import MeasureSpec, mu_omega
from quantal.scenarios import (
    BUILTIN_SCENARIOS,
    builtin_path,
    hopper_matrix,
    load_scenario,
    render_text,
    run_scenario,
    scenario_from_dict,
    to_json,
)

SQRT_NOT = [[["1/2", "1/2"], ["1/2", "-1/2"]], [["1/2", "-1/2"], ["1/2", "1/2"]]]


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
    return str(p)


def test_load_three_slit():
    s = load_scenario("three_slit")
    assert s.measure.kind == "amplitude"
    assert s.measure.exact
    assert s.space.labels == ("A", "B", "C")


def test_load_non_hermitian(tmp_path):
    doc = {"histories": ["x", "y"], "measure": {"kind": "decoherence", "matrix": [[1, [0, 1]], [[0, 1], 1]]}}
    with pytest.raises(ScenarioError, match="Hermitian"):
        load_scenario(write(tmp_path, doc))


def test_load_duplicate_labels(tmp_path):
    doc = {"histories": ["x", "x"], "measure": {"kind": "classical", "weights": [1, 1]}}
    with pytest.raises(ScenarioError, match="duplicate"):
        load_scenario(write(tmp_path, doc))


def test_load_not_weakly_positive(tmp_path):
    doc = {"histories": ["x", "y"], "measure": {"kind": "decoherence", "matrix": [[1, -2], [-2, 1]]}}
    with pytest.raises(ScenarioError, match="negative"):
        load_scenario(write(tmp_path, doc))


def test_load_json_error_has_position(tmp_path):
    with pytest.raises(ScenarioError, match="line 1 column"):
        load_scenario(write(tmp_path, '{"histories": [}'))


@pytest.mark.parametrize("doc", [
    {"histories": ["x"], "measure": {"kind": "nope"}},
    {"histories": ["x"], "measure": {"kind": "classical"}},
    {"histories": ["x", "y"], "measure": {"kind": "classical", "weights": [1]}},
    {"histories": ["x", "y"], "measure": {"kind": "classical", "weights": [1, 1]}, "tolerance": "loose"},
    {"histories": ["x", "y"], "measure": {"kind": "classical", "weights": [1, 1]}, "partitions": {"p": [["x"]]}},
    {"histories": ["x", "y"], "measure": {"kind": "classical", "weights": [1, 1]}, "bipartitions": {"b": [["x"]]}},
])
def test_malformed_scenarios(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_float_literals_select_epsilon(tmp_path):
    doc = {"histories": ["A", "B", "C"], "measure": {"kind": "amplitude", "amplitudes": [1.0, -1.0, 1.0]}}
    report = run_scenario(scenario_from_dict(doc))
    assert report["measure"]["mode"] == "float"
    assert report["measure"]["tolerance"] == {"epsilon": 1e-9}
    assert report["primitive_count"] == 1


def test_hopper_matrix_unitarity_check():
    with pytest.raises(ScenarioError):
        hopper_matrix([[1, 1], [0, 1]], 2)


def test_hopper_total_measure_is_one():
    labels_, mat = hopper_matrix(SQRT_NOT, 3)
    assert labels_ == [f"{i:03b}" for i in range(8)]
    space = make_space(labels_)
    assert mu_omega(MeasureSpec.decoherence(space, mat)) == 1


def test_run_three_slit_report():
    r = run_scenario(load_scenario("three_slit"))
    assert r["schema_version"] == 1
    assert [row["mu"] for row in r["mu_table"]] == ["0", "1", "1", "0", "1", "4", "0", "1"]
    assert r["null_structure"]["precluded"] == [[], ["A", "B"], ["B", "C"]]
    assert [p["support"] for p in r["primitives"]] == [["A", "C"]]
    assert r["primitives"][0]["affirmed"] == [["A", "C"], ["A", "B", "C"]]
    assert r["oracle"] == {"ran": True, "agrees": True}
    assert "timing" not in r


def test_run_classical_die():
    r = run_scenario(load_scenario("classical_die"))
    assert r["primitive_count"] == 6
    assert all(len(p["support"]) == 1 and p["homomorphic"] for p in r["primitives"])


def test_run_double_three_slit():
    r = run_scenario(load_scenario("double_three_slit"), oracle=True)
    assert [p["support"] for p in r["primitives"]] == [["A1", "C1"], ["A2", "C2"]]
    assert r["separability"]["copy"]["separable"]["passed"]
    assert r["oracle"]["agrees"]


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_builtin_round_trip(name):
    s = load_scenario(name)
    r = run_scenario(s, oracle=True)
    assert r["expectations"]["ok"], r["expectations"]["mismatches"]
    assert r["oracle"]["agrees"]
    assert json.loads(to_json(r)) == r
    assert render_text(r)


def test_expectation_mismatch_detected(tmp_path):
    doc = json.loads(builtin_path("three_slit").read_text())
    doc["expected"]["precluded_count"] = 4
    r = run_scenario(scenario_from_dict(doc))
    assert not r["expectations"]["ok"]
    assert r["expectations"]["mismatches"][0]["key"] == "precluded_count"
    assert main(["run", write(tmp_path, doc)]) == 1


@pytest.mark.parametrize("name", ["three_slit", "double_three_slit", "two_site_hopper"])
def test_report_determinism_across_workers(name):
    s = load_scenario(name)
    assert to_json(run_scenario(s, workers=1)) == to_json(run_scenario(s, workers=2))


def test_random_scenarios_oracle_never_disagrees():
    rng = random.Random(53)
    for kind in ("classical", "amplitude", "decoherence"):
        done = 0
        while done < 4:
            spec = random_of_kind(rng, kind, rng.randint(2, 12))
            doc = {"histories": labels(spec.space.size), "measure": {"kind": kind}}
            key = {"classical": "weights", "amplitude": "amplitudes", "decoherence": "matrix"}[kind]
            if kind == "classical":
                doc["measure"][key] = [str(w) for w in spec.data]
            elif kind == "amplitude":
                doc["measure"][key] = [[str(a), str(b)] for a, b in spec.data]
            else:
                doc["measure"][key] = [[[str(a), str(b)] for a, b in row] for row in spec.data]
            s = scenario_from_dict(doc)
            try:
                r = run_scenario(s, oracle=True)
            except TotalPreclusion:
                continue
            assert r["oracle"]["agrees"]
            done += 1


def test_large_scenario_truncates_table():
    doc = {"histories": labels(11), "measure": {"kind": "classical", "weights": [1] * 11}}
    r = run_scenario(scenario_from_dict(doc))
    assert r["mu_table"] is None
    assert r["null_structure"]["precluded"] is None
    assert r["primitive_count"] == 11


# -- CLI --------------------------------------------------------------------


def test_cli_run_json(capsys):
    assert main(["run", "three_slit", "--report", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["scenario"] == "three_slit"


def test_cli_run_text(capsys):
    assert main(["run", "three_slit"]) == 0
    out = capsys.readouterr().out
    assert "{A,C}" in out


def test_cli_mu(capsys):
    assert main(["mu", "three_slit", "--event", "A,B"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert main(["mu", "three_slit", "--event", "A,C"]) == 0
    assert capsys.readouterr().out.strip() == "4"
    assert main(["mu", "classical_die", "--event", "1,2"]) == 0
    assert capsys.readouterr().out.strip() == "1/3"


def test_cli_mu_unknown_label():
    assert main(["mu", "three_slit", "--event", "Q"]) == 2


def test_cli_deduce(capsys):
    assert main(["deduce", "appendix_3slit", "--profile", "multiplicative"]) == 0
    assert capsys.readouterr().out.strip() == "BlockedAt step 3: Negation inadmissible"
    assert main(["deduce", "appendix_3slit", "--profile", "classical"]) == 0
    assert capsys.readouterr().out.strip() == "Proven"


def test_cli_deduce_crosscheck(capsys):
    assert main(["deduce", "appendix_3slit", "--crosscheck", "three_slit"]) == 0
    out = capsys.readouterr().out
    assert "phi({A,B,C})=0  satisfied by 0 of 1 primitives" in out


def test_cli_preclusions_and_primitives(capsys):
    assert main(["preclusions", "three_slit", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["maximal"] == [["A", "B"], ["B", "C"]]
    assert main(["primitives", "three_slit", "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == [["A", "C"]]
    assert main(["primitives", "double_three_slit"]) == 0
    assert capsys.readouterr().out.startswith("2 primitive coevents")


def test_cli_classify_and_separability(capsys):
    assert main(["classify", "three_slit", "--partition", "slits"]) == 0
    assert "not classical (witness {A})" in capsys.readouterr().out
    assert main(["separability", "three_slit", "--bipartition", "a_vs_bc"]) == 0
    assert "witness {A,B}" in capsys.readouterr().out
    assert main(["classify", "three_slit", "--partition", "nope"]) == 2


def test_cli_scenario_list(capsys):
    assert main(["scenario", "list"]) == 0
    out = capsys.readouterr().out.split("\n")
    assert set(BUILTIN_SCENARIOS) <= set(out)


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["run"],
    ["run", "three_slit", "--report", "xml"],
    ["run", "no_such_file.json"],
    ["run", "three_slit", "--workers", "0"],
    ["deduce", "appendix_3slit", "--profile", "intuitionistic"],
])
def test_cli_input_errors(argv, capsys):
    assert main(argv) == 2


def test_cli_total_preclusion(tmp_path):
    doc = {"histories": ["a", "b"], "measure": {"kind": "amplitude", "amplitudes": [1, -1]}}
    assert main(["primitives", write(tmp_path, doc)]) == 2


def test_cli_figures_and_mu_table(tmp_path, capsys):
    table = tmp_path / "mu.csv"
    figs = tmp_path / "figs"
    assert main(["run", "three_slit", "--mu-table", str(table), "--figures", str(figs)]) == 0
    rows = list(csv.DictReader(table.open()))
    assert [r["mu"] for r in rows] == ["0", "1", "1", "0", "1", "4", "0", "1"]
    assert rows[3]["event"] == "A B"
    for stem in ("three_slit_mu.png", "three_slit_primitives.png"):
        assert (figs / stem).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
