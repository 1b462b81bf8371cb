import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from amrseq.codec import anonymize, restore, text_to_tree, tree_to_text
from amrseq.errors import Unrepairable
from amrseq.graph import AmrGraph, parse_penman, validate
from amrseq.postprocess import (
    WikiTable,
    build_wiki_table,
    default_amr,
    name_string,
    prune,
    repair,
    repair_or_default,
    strip_wiki,
    wikify,
)
from amrseq.smatch import smatch_exact
from amrseq.synth import corrupt, random_graph, random_tree

from conftest import CELL_TREE


def test_prune_examples():
    assert tree_to_text(prune(text_to_tree("(dance-01 :mod (slow) :mod (slow))"))) == "(dance-01 :mod (slow))"
    distinct = text_to_tree("(dance-01 :mod (slow) :mod (fast))")
    assert prune(distinct) == distinct


def test_prune_nested_keeps_first():
    tree = text_to_tree("(a :ARG0 (b :mod (c) :mod (c :x (d))) :ARG0 (b :y (e)))")
    assert tree_to_text(prune(tree)) == "(a :ARG0 (b :mod (c)))"


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32))
def test_prune_properties(seed):
    tree = random_tree(random.Random(seed), max_depth=3, max_children=4)
    once = prune(tree)
    assert prune(once) == once
    assert once.size() <= tree.size()
    assert once.label == tree.label


def test_repair_examples():
    assert repair("(bind-01 :ARG1") == "(bind-01)"
    assert repair('(protein :name (name :op1 "Crk') == '(protein :name (name :op1 "Crk"))'
    assert repair(CELL_TREE) == CELL_TREE


def test_repair_surplus_parens():
    assert repair("(a :ARG0 (b)))") == "(a :ARG0 (b))"
    assert repair("(a :ARG0 (b)) :ARG1 (c))") == "(a :ARG0 (b) :ARG1 (c))"


def test_repair_unfinished_edges():
    assert repair("(a :ARG0 (b :mod") == "(a :ARG0 (b))"
    assert repair("(a :ARG0 (") == "(a)"
    assert repair("(a :ARG0 :ARG1 (c))") == "(a :ARG1 (c))"


@pytest.mark.parametrize("text", ["", ")", ":ARG0", "((", '"'])
def test_repair_gives_up(text):
    with pytest.raises(Unrepairable):
        repair(text)
    tree, fell_back = repair_or_default(text)
    assert fell_back and tree == default_amr()


def test_repair_corpus_of_corruptions():
    rng = random.Random(7)
    for _ in range(300):
        text = corrupt(tree_to_text(anonymize(random_graph(rng))), rng)
        try:
            fixed = repair(text)
        except Unrepairable:
            continue
        text_to_tree(fixed)
        assert repair(fixed) == fixed


def test_default_amr():
    tree = default_amr()
    assert tree_to_text(tree) == "(amr-unknown)"
    g = restore(tree)
    assert validate(g) == [] and len(g.nodes) == 1
    assert smatch_exact(g, g).f == 1.0


def _named(name: str, wiki: str | None = None) -> AmrGraph:
    wiki_edge = f' :wiki "{wiki}"' if wiki else ""
    ops = " ".join(f':op{k} "{w}"' for k, w in enumerate(name.split(), 1))
    return parse_penman(f"(m / molecule{wiki_edge} :name (n / name {ops}))")


def _gold(name, links, total, link="Q1"):
    return [_named(name, link) for _ in range(links)] + [_named(name) for _ in range(total - links)]


def test_name_string():
    assert name_string(_named("tumor necrosis factor"), "m") == "tumor necrosis factor"
    g = parse_penman('(m / molecule :name (n / name :op2 "b" :op1 "a"))')
    assert name_string(g, "m") == "a b"
    assert name_string(g, "n") is None


def test_build_wiki_table_counts():
    table = build_wiki_table(_gold("DNA", 69, 86, "DNA") + _gold("ERK", 3, 228, "Extracellular"))
    assert table.totals == {"DNA": 86, "ERK": 228}
    assert table.counts["DNA"] == {"DNA": 69}
    assert table.counts["ERK"] == {"Extracellular": 3}
    assert len(build_wiki_table([])) == 0


def test_build_wiki_table_ignores_dash():
    table = build_wiki_table([_named("Crk", "-"), _named("Crk", "Crk")])
    assert table.totals["Crk"] == 2 and table.counts["Crk"] == {"Crk": 1}


def test_build_wiki_table_order_invariant():
    gold = _gold("DNA", 4, 7, "DNA") + _gold("RNA", 2, 3, "RNA") + [_named("DNA", "Other")]
    shuffled = gold[:]
    random.Random(1).shuffle(shuffled)
    assert build_wiki_table(gold) == build_wiki_table(shuffled)


@pytest.mark.parametrize("links, total, linked", [(69, 86, True), (3, 228, False), (5, 10, False), (6, 10, True)])
def test_wikify_threshold(links, total, linked):
    table = build_wiki_table(_gold("X", links, total, "Xlink"))
    out = wikify(_named("X"), table)
    assert (("m", "wiki", '"Xlink"') in out.edges) is linked


def test_wikify_only_adds_wiki_edges():
    table = build_wiki_table(_gold("DNA", 69, 86, "DNA"))
    g = _named("DNA")
    out = wikify(g, table)
    assert [e for e in out.edges if e not in g.edges] == [("m", "wiki", '"DNA"')]
    assert strip_wiki(out) == g
    already = _named("DNA", "Other")
    assert wikify(already, table) == already
    assert wikify(_named("unseen"), table) == _named("unseen")


def test_wiki_table_file_round_trip(tmp_path):
    table = build_wiki_table(_gold("DNA", 2, 3, "DNA") + [_named("ERK")])
    path = tmp_path / "wiki.tsv"
    table.save(path)
    lines = path.read_text().splitlines()
    assert lines == ["DNA\tDNA\t2\t3", "ERK\t\t0\t1"]
    assert WikiTable.load(path) == table
    assert WikiTable.load(io.StringIO("\n".join(lines))) == table
