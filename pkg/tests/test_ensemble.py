import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest

from amrseq.ensemble import (
    CandidateSet,
    candidate_sets,
    compare_parsers,
    ensemble_corpus,
    oracle_corpus,
    oracle_select,
    pairwise_matrix,
    select,
)
from amrseq.errors import IdMismatch
from amrseq.graph import Document, parse_penman
from amrseq.smatch import smatch_exact
from amrseq.synth import perturb, random_graph

A = parse_penman("(b / bind-01 :ARG1 (p / protein) :ARG2 (c / cell))")
B = parse_penman("(b / bind-01 :ARG1 (p / protein))")
C = parse_penman("(d / dog)")


def _f(g, t):
    s = smatch_exact(g, t)
    return Fraction(2 * s.matched, s.gold_total + s.test_total)


def test_candidate_set_invariants():
    with pytest.raises(ValueError):
        CandidateSet("x", ())
    with pytest.raises(ValueError):
        CandidateSet("x", (("p", A), ("p", B)))


def test_majority_duplicate_wins():
    sel = select(CandidateSet("x", (("p1", A), ("p2", A), ("p3", B))), seed=0)
    assert sel.index == 0
    sel = select(CandidateSet("x", (("p1", B), ("p2", A), ("p3", A))), seed=0)
    assert sel.index == 1


def test_single_candidate():
    sel = select(CandidateSet("x", (("p", C),)), seed=0)
    assert sel.index == 0 and sel.graph is C and sel.matrix.shape == (0, 0)
    assert oracle_select(CandidateSet("x", (("p", C),)), A, seed=0).index == 0


def test_matrix_is_symmetric_with_zero_diagonal():
    m = np.array(pairwise_matrix([A, B, C], seed=0), dtype=float)
    assert np.allclose(m, m.T)
    assert np.all(np.diag(m) == 0)
    # A has 6 triples, B has 4 and all of them match
    assert m[0, 1] == pytest.approx(2 * 4 / (6 + 4))


def test_three_distinct_candidates():
    sel = select(CandidateSet("x", (("a", C), ("b", B), ("c", A))), seed=0)
    sums = [_f(C, B) + _f(C, A), _f(B, C) + _f(B, A), _f(A, C) + _f(A, B)]
    assert sel.index == sums.index(max(sums))


def test_ties_go_to_first_candidate():
    sel = select(CandidateSet("x", (("a", C), ("b", parse_penman("(e / elephant)")))), seed=0)
    assert sel.index == 0


def test_oracle_prefers_gold():
    choice = oracle_select(CandidateSet("x", (("a", C), ("b", B), ("gold", A))), A, seed=0)
    assert (choice.index, choice.f) == (2, 1.0)


def test_select_reordering_keeps_chosen_graph():
    rng = random.Random(4)
    for _ in range(20):
        base = random_graph(rng, 5)
        graphs = [base, perturb(base, rng, 1), perturb(base, rng, 3)]
        sums = [sum(_f(g, h) for h in graphs if h is not g) for g in graphs]
        if len(set(sums)) < 3:
            continue
        chosen = [select(CandidateSet("x", tuple((str(k), graphs[k]) for k in order)), seed=0).graph
                  for order in itertools.permutations(range(3))]
        assert all(g is chosen[0] for g in chosen)


def _corpus(graphs):
    return [Document(f"d{k}", f"sentence {k}", g) for k, g in enumerate(graphs)]


def test_compare_toy_corpus():
    gold = _corpus([A, B, C, A])
    runs = {
        "p1": _corpus([A, A, C, B]),
        "p2": _corpus([B, B, C, A]),
    }
    # by hand: d0 p1 exact, d1 p2 exact, d2 both exact, d3 p2 exact
    result = compare_parsers(gold, runs, seed=0)
    assert [w for _, _, w in result.rows] == ["p1", "p2", "tie", "p2"]
    assert dict(result.wins) == {"p1": 1, "p2": 2, "tie": 1}
    assert result.oracle.f == 1.0
    assert "p1,1" in result.summary_csv() and "tie,1" in result.summary_csv()
    assert json.loads(result.to_json())["wins"] == {"p1": 1, "p2": 2, "tie": 1}


def test_compare_gold_run_always_wins():
    gold = _corpus([A, B, C])
    result = compare_parsers(gold, {"other": _corpus([B, C, A]), "gold": gold}, seed=0)
    assert result.wins["gold"] == 3
    same = compare_parsers(gold, {"x": _corpus([B, C, A]), "y": _corpus([B, C, A])}, seed=0)
    assert same.wins["tie"] == 3


def test_compare_id_mismatch():
    with pytest.raises(IdMismatch):
        compare_parsers(_corpus([A, B]), {"p": _corpus([A])}, seed=0)


def test_ensemble_corpus_and_parallelism():
    rng = random.Random(8)
    bases = [random_graph(rng, 6) for _ in range(12)]
    runs = {name: _corpus([perturb(b, rng, 2) for b in bases]) for name in ("x", "y", "z")}
    docs, rows = ensemble_corpus(runs, seed=2)
    assert [d.id for d in docs] == [f"d{k}" for k in range(12)]
    assert all(r.chosen in runs for r in rows)
    assert (docs, rows) == ensemble_corpus(runs, seed=2, jobs=4)
    gold = _corpus(bases)
    oracle_rows, total = oracle_corpus(gold, runs, seed=2)
    chosen_f = [_f(g.graph, d.graph) for g, d in zip(gold, docs)]
    assert all(o.f >= float(f) - 1e-12 for o, f in zip(oracle_rows, chosen_f))
    assert candidate_sets({}) == []
