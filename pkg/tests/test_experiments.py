import csv
import json
import math
from fractions import Fraction

import pytest

from hyperlim.hypergraph import Hypergraph
from hyperlim.hyperpartition import CombinatorialStructure, structure_density
from hyperlim.hypergraphon import builtin_w, density, step_from_structure, structure_of
from hyperlim.experiments import (
    concentration_experiment,
    counting_experiment,
    hereditary_experiment,
    inverse_counting_experiment,
    removal_experiment,
    strong_convergence_report,
)

EDGE2 = Hypergraph(2, 2, [(0, 1)])
TRI = Hypergraph(2, 3, [(0, 1), (0, 2), (1, 2)])


def test_concentration_bound_formula_and_replay():
    W1 = builtin_w("example1", 2)
    rep = concentration_experiment(W1, EDGE2, n=200, eps=0.1, trials=20, seed=9)
    # bound = 2 exp(-eps^2 n / (2 v^2)) with v = |V(F)| = 2
    want = 2 * math.exp(-(0.1**2) * 200 / 8)
    assert abs(rep.summary["bound"] - want) < 1e-12
    assert set(rep.verdicts) == {"tail_within_bound", "vacuous_bound"}
    again = concentration_experiment(W1, EDGE2, n=200, eps=0.1, trials=20, seed=9)
    assert json.dumps(rep.to_obj(), sort_keys=True) == json.dumps(again.to_obj(), sort_keys=True)
    threaded = concentration_experiment(W1, EDGE2, n=200, eps=0.1, trials=20, seed=9, threads=4)
    assert json.dumps(rep.to_obj(), sort_keys=True) == json.dumps(threaded.to_obj(), sort_keys=True)


def test_concentration_huge_eps_has_empty_tail():
    W1 = builtin_w("example1", 2)
    rep = concentration_experiment(W1, EDGE2, n=50, eps=1.0, trials=10, seed=1)
    assert rep.summary["tail_frequency"] == 0.0
    assert rep.verdicts["tail_within_bound"]


def test_counting_full_structure_is_exact_one():
    C_all = CombinatorialStructure.all_cells(2, 2)
    rep = counting_experiment(C_all, TRI, [20, 40], trials=4, seed=0)
    assert rep.summary["t_exact"] == "1/1"
    assert all(r["deviation"] == 0.0 for r in rep.trials)


def test_counting_eighth_structure_converges():
    C8 = CombinatorialStructure.from_top_labels(2, 2, {2})
    assert structure_density(TRI, C8) == Fraction(1, 8)
    rep = counting_experiment(C8, TRI, [40, 80], trials=6, seed=3)
    assert rep.summary["t_exact"] == "1/8"
    assert rep.verdicts["final_within_tolerance"], rep.summary


def test_inverse_full_w_trivially_passes():
    Wf = builtin_w("full", 2)
    rep = inverse_counting_experiment(Wf, 30, trials=3, seed=0)
    assert rep.verdicts["all_trials_pass"]
    assert all(r["eps1"] == "0/1" or r["eps1"] == 0 for r in rep.trials) or all(
        Fraction(str(r["eps1"])) == 0 for r in rep.trials
    )


def test_inverse_cross_fit_recovers_shared_structure():
    C = CombinatorialStructure(2, 2, {(1, 1, 1), (1, 1, 2), (2, 2, 1), (2, 2, 2)})
    Wsame = step_from_structure(C)
    rep = inverse_counting_experiment(Wsame, 48, trials=3, seed=1, threshold=0.2)
    passed = sum(1 for r in rep.trials if r["pass"])
    assert passed >= 2
    rep2 = inverse_counting_experiment(
        Wsame, 48, trials=3, seed=2, threshold=0.2, use_planted=True
    )
    assert rep2.verdicts["all_trials_pass"]
    assert all("shared_cells" in r for r in rep2.trials)


def test_removal_k4_triangle_frozen_steps():
    K4 = Hypergraph.complete(2, 4)
    rep = removal_experiment(K4, TRI)
    assert rep.summary["removed"] == 2
    assert rep.verdicts["terminated_zero"]
    assert [s["edge"] for s in rep.trials] == [[0, 1], [2, 3]]
    assert rep.trials[-1]["remaining_hom"] == 0
    # independent re-check: deleting those edges kills every triangle hom
    from hyperlim.hypergraph import hom

    kept = [e for e in K4.sorted_edges() if list(e) not in [[0, 1], [2, 3]]]
    assert hom(TRI, Hypergraph(2, 4, kept)) == 0


def test_removal_trivial_cases_and_errors():
    H = Hypergraph.random(2, 5, Fraction(1, 2), seed=4)
    rep = removal_experiment(H, EDGE2)
    assert rep.summary["removed"] == H.edge_count
    assert removal_experiment(Hypergraph(2, 5), TRI).summary["removed"] == 0
    with pytest.raises(ValueError):
        removal_experiment(H, Hypergraph.empty(2, 3))


def test_hereditary_zero_density_never_sampled():
    Wbip = step_from_structure(
        CombinatorialStructure(2, 2, {(1, 2, 1), (1, 2, 2), (2, 1, 1), (2, 1, 2)})
    )
    assert density(TRI, Wbip, mode="exact", induced=True) == 0
    rep = hereditary_experiment(Wbip, [TRI, EDGE2], n=14, trials=10, seed=2)
    assert rep.summary["patterns"]["F0"]["constrained"]
    assert rep.summary["patterns"]["F0"]["total_hits"] == 0
    assert rep.verdicts["zero_hits"]
    # the edge pattern is realizable, so it is reported unconstrained
    assert not rep.summary["patterns"]["F1"]["constrained"]


def test_hereditary_unconstrained_pattern_records_density():
    W1 = builtin_w("example1", 2)
    rep = hereditary_experiment(W1, [EDGE2], n=12, trials=4, seed=0)
    assert rep.summary["patterns"]["F0"]["t_ind"] == "1/2"
    assert not rep.summary["patterns"]["F0"]["constrained"]


def test_sequence_shared_structure_verdicts():
    seq = [Hypergraph.complete(2, n) for n in (6, 8, 10)]
    rep = strong_convergence_report(seq, 1, 0.1, seed=0)
    assert rep.verdicts["shared_structure"]
    alt = [Hypergraph.complete(2, 6), Hypergraph(2, 8), Hypergraph.complete(2, 10)]
    rep2 = strong_convergence_report(alt, 1, 0.1, seed=0)
    assert not rep2.verdicts["shared_structure"]


def test_report_files_roundtrip(tmp_path):
    W1 = builtin_w("example1", 2)
    rep = concentration_experiment(W1, EDGE2, n=100, eps=0.2, trials=8, seed=5)
    jpath = tmp_path / "r.json"
    cpath = tmp_path / "r.csv"
    rep.write_json(str(jpath))
    rep.write_csv(str(cpath))
    obj = json.loads(jpath.read_text())
    assert obj["name"] == rep.name and obj["seed"] == 5
    assert jpath.read_text().endswith("\n")
    rows = list(csv.DictReader(cpath.open()))
    assert len(rows) == 8
