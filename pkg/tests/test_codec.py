import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from amrseq.codec import (
    CONST,
    NODE,
    REF,
    SPECIALS,
    SeqTree,
    TrainerConfig,
    Vocab,
    anonymize,
    build_vocab,
    decode,
    encode,
    pos_annotate,
    pos_token,
    read_pos_file,
    restore,
    text_to_tree,
    tree_to_text,
)
from amrseq.errors import DanglingRelation, ParseError, TokenMismatch, UnbalancedParens
from amrseq.graph import Document, parse_penman, to_triples, validate
from amrseq.smatch import smatch_exact
from amrseq.synth import random_graph, random_tree

from conftest import CELL_TREE


def ref_concepts_unique(graph) -> bool:
    """Every concept written as a leaf reference occurs on one node only."""
    refs = {node.label for _, node in anonymize(graph).preorder() if node.kind == REF}
    labels = list(graph.nodes.values())
    return all(labels.count(c) == 1 for c in refs)


def test_anonymize_cell(example):
    tree = anonymize(example)
    assert tree_to_text(tree) == CELL_TREE
    migrate = tree.subtree((0, 1))
    assert migrate.children == (("ARG0", SeqTree("cell", kind=REF)),)


def test_anonymize_minimal():
    assert anonymize(parse_penman("(c / cell)")) == SeqTree("cell")


def test_anonymize_drops_wiki():
    g = parse_penman('(p / protein :wiki "Q123" :name (n / name :op1 "Crk"))')
    assert tree_to_text(anonymize(g)) == '(protein :name (name :op1 "Crk"))'


def test_tree_text_forms():
    assert text_to_tree("(cell)") == SeqTree("cell")
    tree = text_to_tree('(dance-01 :ARG0 boy :polarity - :name (name :op1 "A b"))')
    kinds = [child.kind for _, child in tree.children]
    assert kinds == [REF, CONST, NODE]
    assert tree_to_text(tree) == '(dance-01 :ARG0 boy :polarity - :name (name :op1 "A b"))'


def test_indented_tree_text_parses_back(cell_tree):
    text = tree_to_text(cell_tree, indent=True)
    assert "\n   :ARG0 (induce-01" in text
    assert text_to_tree(text) == cell_tree


@pytest.mark.parametrize("text, error", [
    ("(cell", UnbalancedParens),
    ("(cell :mod)", DanglingRelation),
    ("(cell))", ParseError),
])
def test_text_to_tree_errors(text, error):
    with pytest.raises(error):
        text_to_tree(text)


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32))
def test_tree_text_round_trip(seed):
    tree = random_tree(random.Random(seed))
    assert text_to_tree(tree_to_text(tree)) == tree
    assert text_to_tree(tree_to_text(tree, indent=True)) == tree


def test_restore_cell(example):
    g = restore(CELL_TREE)
    assert validate(g) == []
    migrate = next(v for v, c in g.nodes.items() if c == "migrate-01")
    induce = next(v for v, c in g.nodes.items() if c == "induce-01")
    cell_var = next(v for v, c in g.nodes.items() if c == "cell")
    assert (migrate, "ARG0", cell_var) in g.edges
    assert (induce, "ARG1", cell_var) in g.edges
    assert smatch_exact(example, g, max_vars=12).f == 1.0


def test_restore_minimal():
    g = restore("(cell)")
    assert g.root == "c" and g.nodes == {"c": "cell"} and list(g.edges) == []


def test_restore_keeps_distinct_subtrees_apart():
    g = restore("(and :op1 (cell :mod (small)) :op2 (cell :mod (large)))")
    assert sorted(g.nodes.values()).count("cell") == 2
    assert len(to_triples(g).relations) == 4


def test_restore_reference_before_definition():
    # the reference precedes the node it names once branches are reordered
    g = restore("(migrate-01 :ARG0 cell :ARG1 (cell :mod (small)))")
    assert len(g.nodes) == 3
    cell_var = next(v for v, c in g.nodes.items() if c == "cell")
    assert ("m", "ARG0", cell_var) in g.edges and ("m", "ARG1", cell_var) in g.edges


def test_restore_unmatched_reference_becomes_node():
    g = restore("(see-01 :ARG0 boy :ARG1 boy)")
    assert sorted(g.nodes.values()) == ["boy", "see-01"]
    assert validate(g) == []


def test_restore_merges_into_first_node_with_concept():
    # two cells; the reference is resolved to the first one in pre-order
    g = restore("(and :op1 (cell :mod (small)) :op2 (cell :mod (large)) :op3 cell)")
    assert ("a", "op3", "c") in g.edges


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_codec_round_trip(seed):
    g = random_graph(random.Random(seed))
    if not ref_concepts_unique(g):
        return
    back = restore(tree_to_text(anonymize(g)))
    assert validate(back) == []
    assert smatch_exact(g, back).f == 1.0


def test_restore_never_invents_wiki():
    g = parse_penman('(p / protein :wiki "Q1" :name (n / name :op1 "Crk"))')
    back = restore(tree_to_text(anonymize(g)))
    assert all(rel != "wiki" for _, rel, _ in back.edges)


def _toy_corpus():
    g = parse_penman("(a / ab :ARG0 (c / cd) :ARG1 (e / ef))")
    return [Document("1", "", g)]


def test_build_vocab_order():
    vocab = build_vocab(_toy_corpus(), ["VBZ", "NN"])
    assert vocab.tokens[:3] == SPECIALS
    assert vocab.tokens[3:5] == (":ARG0", ":ARG1")
    assert vocab.tokens[5:7] == (pos_token("NN"), pos_token("VBZ"))
    assert vocab.tokens[7:] == tuple(sorted(" ()abcdef"))


def test_build_vocab_alphabet():
    concept = "abcdefghijklmnopqrstuvwxyz"
    g = parse_penman(f"(a / {concept} :ARG0 (b / {concept}) :ARG1 (c / {concept}))")
    vocab = build_vocab([Document("1", "", g)])
    # 3 specials + 2 relations + 26 letters, plus the three structural characters
    structural = {" ", "(", ")"}
    assert len(vocab) == 31 + len(structural)
    assert structural <= set(vocab.tokens)


def test_build_vocab_empty():
    assert build_vocab([]).tokens == SPECIALS


def test_build_vocab_size_warning(caplog):
    build_vocab(_toy_corpus())
    assert "outside the expected range" in caplog.text


def test_encode_super_characters():
    vocab = Vocab(SPECIALS + (":ARG0",) + tuple(" ()cel"))
    seq = encode(":ARG0 (cell)", vocab)
    assert len(seq) == 8
    assert [vocab.tokens[i] for i in seq.ids] == [":ARG0", " ", "(", "c", "e", "l", "l", ")"]
    assert decode(seq, vocab) == ":ARG0 (cell)"


def test_encode_longest_match():
    vocab = Vocab(SPECIALS + (":ARG1", ":ARG10") + tuple("0"))
    assert [vocab.tokens[i] for i in encode(":ARG10", vocab).ids] == [":ARG10"]
    assert [vocab.tokens[i] for i in encode(":ARG100", vocab).ids] == [":ARG10", "0"]


def test_encode_unknown():
    vocab = Vocab(SPECIALS + tuple("ab"))
    seq = encode("abz", vocab)
    assert seq.unknown == 1 and seq.ids[-1] == vocab.unk_id


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_encode_round_trip_and_length(seed):
    g = random_graph(random.Random(seed))
    vocab = build_vocab([Document("1", "", g)])
    text = tree_to_text(anonymize(g))
    seq = encode(text, vocab)
    assert seq.unknown == 0
    assert decode(seq, vocab) == text
    assert len(seq) <= len(text)


def test_vocab_save_load(tmp_path):
    vocab = build_vocab(_toy_corpus(), ["NNP"])
    vocab.save(tmp_path / "v.txt")
    assert Vocab.load(tmp_path / "v.txt") == vocab
    lines = (tmp_path / "v.txt").read_text().splitlines()
    assert len(lines) == len(vocab)


def test_pos_annotate():
    assert pos_annotate("Crk binds", [("Crk", "NNP"), ("binds", "VBZ")]) == "Crk ⟨NNP⟩ binds ⟨VBZ⟩"
    assert pos_annotate("", []) == ""
    with pytest.raises(TokenMismatch):
        pos_annotate("Crk binds", [("Crk", "NNP")])


def test_read_pos_file():
    text = "Crk\tNNP\nbinds\tVBZ\n\nCells\tNNS\n"
    assert read_pos_file(io.StringIO(text)) == [[("Crk", "NNP"), ("binds", "VBZ")], [("Cells", "NNS")]]
    with pytest.raises(ParseError):
        read_pos_file(io.StringIO("Crk NNP\n"))


def test_trainer_config_defaults():
    cfg = TrainerConfig()
    assert (cfg.layers, cfg.nodes, cfg.buckets, cfg.epochs, cfg.vocabulary) == (1, 400, (510, 510), (25, 35), (150, 200))
    assert (cfg.learning_rate, cfg.decay_factor, cfg.gradient_norm) == (0.5, 0.99, 5.0)
    assert TrainerConfig.from_text(cfg.to_text()) == cfg
    assert "Learning rate = 0.5" in cfg.to_text()


def test_trainer_config_rejects_non_positive():
    with pytest.raises(ValueError):
        TrainerConfig(layers=0)
    with pytest.raises(ValueError):
        TrainerConfig(buckets=(510, -1))
