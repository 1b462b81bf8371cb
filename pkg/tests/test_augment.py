import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from amrseq.augment import (
    aligned_orderings,
    augment_corpus,
    best_ordering,
    best_ordering_aligned,
    enumerate_orderings,
    format_alignments,
    order_score,
    parse_alignments,
    reorder_graph,
)
from amrseq.codec import anonymize, restore, text_to_tree, tree_to_text
from amrseq.errors import BadPath, BadSpan
from amrseq.graph import Document, parse_penman, serialize_penman, to_triples
from amrseq.smatch import smatch_exact
from amrseq.synth import random_tree

from conftest import CELL_ALIGNMENT, CELL_TREE_ALIGNED, SENTENCE


def test_parse_alignments(cell_tree):
    assert parse_alignments("0-1|0", cell_tree) == {(0,): (0, 1)}
    assert parse_alignments("", cell_tree) == {}
    assert parse_alignments("3-3|r 4-4|", cell_tree) == {(): (3, 4)}
    assert parse_alignments("2-2|0+1", cell_tree) == {(0,): (2, 2), (1,): (2, 2)}


@pytest.mark.parametrize("text, error", [
    ("9-9|0.9", BadPath),
    ("0-1", BadSpan),
    ("3-1|0", BadSpan),
    ("a-b|0", BadSpan),
])
def test_parse_alignments_errors(cell_tree, text, error):
    with pytest.raises(error):
        parse_alignments(text, cell_tree)


def test_alignment_span_bounds(cell_tree):
    with pytest.raises(BadSpan):
        parse_alignments("12-12|0", cell_tree, n_tokens=12)


def test_format_alignments_round_trip(cell_tree):
    alignment = parse_alignments(CELL_ALIGNMENT, cell_tree)
    assert parse_alignments(format_alignments(alignment), cell_tree) == alignment


def test_enumerate_cell(cell_tree):
    trees = enumerate_orderings(cell_tree)
    assert len(trees) == 8
    assert trees[0] == cell_tree
    assert len(set(trees)) == 8
    assert len(enumerate_orderings(cell_tree, cap=5)) == 5
    assert enumerate_orderings(cell_tree, cap=5)[0] == cell_tree


def test_enumerate_chain():
    chain = text_to_tree("(a :ARG0 (b :ARG1 (c :mod (d))))")
    assert enumerate_orderings(chain) == [chain]


def test_enumerate_skips_duplicate_orderings():
    tree = text_to_tree("(a :mod (b) :mod (b))")
    assert len(enumerate_orderings(tree)) == 1


def test_orderings_keep_graph_semantics(example):
    for tree in enumerate_orderings(anonymize(example)):
        assert smatch_exact(example, restore(tree), max_vars=12).f == 1.0


def test_order_score_small():
    tree = text_to_tree("(a :ARG0 (b) :ARG1 (c))")
    assert order_score(tree, {(0,): (0, 0), (1,): (7, 7)}) == 1
    assert order_score(tree, {(0,): (7, 7), (1,): (0, 0)}) == 0
    assert order_score(tree, {(0,): (3, 3)}) == 1
    assert order_score(tree, {}) == 1


def test_aligned_best_ordering(cell_tree):
    alignment = parse_alignments(CELL_ALIGNMENT, cell_tree, len(SENTENCE.split()))
    best, moved = best_ordering_aligned(cell_tree, alignment)
    assert tree_to_text(best) == CELL_TREE_ALIGNED
    assert best_ordering(cell_tree, alignment) == best
    # 8 aligned starts, 28 pairs: 17 inversions before, 5 after
    assert order_score(cell_tree, alignment) == Fraction(11, 28)
    assert order_score(best, moved) == Fraction(23, 28)


def test_best_ordering_is_max_over_all_orderings(cell_tree):
    alignment = parse_alignments(CELL_ALIGNMENT, cell_tree)
    best, moved = best_ordering_aligned(cell_tree, alignment)
    top = max(order_score(t, a) for t, a in aligned_orderings(cell_tree, alignment, None))
    assert order_score(best, moved) == top


def test_best_ordering_identity_cases(cell_tree):
    assert best_ordering(cell_tree, {}) == cell_tree
    ordered = text_to_tree("(a :ARG0 (b) :ARG1 (c))")
    assert best_ordering(ordered, {(0,): (1, 1), (1,): (4, 4)}) == ordered


def test_unaligned_children_go_last_in_order():
    tree = text_to_tree("(a :x (u) :y (b) :z (v) :w (c))")
    best = best_ordering(tree, {(1,): (5, 5), (3,): (2, 2)})
    assert [rel for rel, _ in best.children] == ["w", "y", "x", "z"]


def test_min_start_sort_is_not_always_optimal():
    # branch a covers tokens 0, 9 and 10, branch b tokens 1 and 2:
    # a-first costs 4 inversions, b-first only 2
    tree = text_to_tree("(r :a (x :m (y) :n (v)) :b (z :m (w) :n (q)))")
    alignment = {(0,): (0, 0), (0, 0): (9, 9), (0, 1): (10, 10), (1, 0): (1, 1), (1, 1): (2, 2)}
    best, moved = best_ordering_aligned(tree, alignment)
    top = max(order_score(t, a) for t, a in aligned_orderings(tree, alignment, None))
    assert order_score(best, moved) == top
    assert [rel for rel, _ in best.children] == ["b", "a"]


def _random_alignment(tree, rng, n_tokens=12):
    out = {}
    for path, node in tree.preorder():
        if node.kind == "node" and rng.random() < 0.7:
            start = rng.randrange(n_tokens)
            out[path] = (start, min(n_tokens - 1, start + rng.randrange(2)))
    return out


def _orderable(tree):
    return sum(1 for _, node in tree.preorder() if len(node.children) > 1)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_best_ordering_beats_every_enumerated_order(seed):
    rng = random.Random(seed)
    tree = random_tree(rng, max_depth=3, max_children=3)
    if _orderable(tree) > 6:
        return
    alignment = _random_alignment(tree, rng)
    best, moved = best_ordering_aligned(tree, alignment)
    best_score = order_score(best, moved)
    for other, other_alignment in aligned_orderings(tree, alignment, 5000):
        assert best_score >= order_score(other, other_alignment)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_best_ordering_idempotent(seed):
    rng = random.Random(seed)
    tree = random_tree(rng, max_depth=3, max_children=4)
    alignment = _random_alignment(tree, rng)
    best, moved = best_ordering_aligned(tree, alignment)
    again, _ = best_ordering_aligned(best, moved)
    assert again == best


def test_reorder_graph_cell(example):
    alignment = parse_alignments(CELL_ALIGNMENT, anonymize(example))
    g = reorder_graph(example, alignment)
    assert tree_to_text(anonymize(g)) == CELL_TREE_ALIGNED
    assert to_triples(g) == to_triples(example)
    assert serialize_penman(g, indent=False).startswith("(r / require-01 :ARG1 (b / bind-01")


def test_reorder_graph_keeps_wiki_next_to_its_node():
    g = parse_penman('(b / bind-01 :ARG1 (p / protein :wiki "Q1" :name (n / name :op1 "Crk")) :ARG0 (c / cell))')
    tree = anonymize(g)
    g2 = reorder_graph(g, {(0,): (3, 3), (1,): (0, 0)})
    assert serialize_penman(g2, indent=False) == (
        '(b / bind-01 :ARG0 (c / cell) :ARG1 (p / protein :wiki "Q1" :name (n / name :op1 "Crk")))')
    assert to_triples(g2) == to_triples(g)
    assert tree == anonymize(g)


def test_augment_corpus_cell(example):
    doc = Document("cell", SENTENCE, example)
    alignment = parse_alignments(CELL_ALIGNMENT, anonymize(example))
    out = augment_corpus([(doc, alignment)])
    assert [d.id for d in out] == ["cell", "cell.best"]
    texts = {tree_to_text(anonymize(d.graph)) for d in out}
    assert texts == {tree_to_text(anonymize(example)), CELL_TREE_ALIGNED}


def test_augment_corpus_sizes():
    docs = [(Document(str(k), "a b", parse_penman(f"(c / cell :quant {k})")), {}) for k in range(10)]
    out = augment_corpus(docs)
    assert len(out) == 20
    assert out[10].graph == out[0].graph
    assert augment_corpus([]) == []
