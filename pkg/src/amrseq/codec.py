"""Variable-free tree form of AMR graphs and super-character tokenization.

A :class:`SeqTree` drops variables.  A node that is reached a second time
is written as a bare concept (a leaf reference)::

    (require-01 :ARG0 (induce-01 :ARG1 (cell) :ARG2 (migrate-01 :ARG0 cell)))

:func:`restore` turns such text back into a graph, merging each leaf
reference into the first node with the same concept.
"""

from __future__ import annotations

import io
import logging
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, fields

from .errors import (
    DanglingRelation,
    EmptyConcept,
    ParseError,
    TokenMismatch,
    TrailingInput,
    UnbalancedParens,
)
from .graph import (
    AmrGraph,
    Document,
    fresh_variable,
    is_constant_token,
    tokenize,
    walk,
)

log = logging.getLogger(__name__)

NODE, REF, CONST = "node", "ref", "const"


@dataclass(frozen=True)
class SeqTree:
    label: str
    children: tuple[tuple[str, "SeqTree"], ...] = ()
    kind: str = NODE

    def __post_init__(self):
        object.__setattr__(self, "children", tuple((r, c) for r, c in self.children))
        if self.kind != NODE and self.children:
            raise ValueError(f"a {self.kind} leaf cannot have children")

    @property
    def is_ref(self) -> bool:
        return self.kind == REF

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    def subtree(self, path: Sequence[int]) -> "SeqTree":
        node = self
        for i in path:
            node = node.children[i][1]
        return node

    def preorder(self, path: tuple[int, ...] = ()):
        """Yield ``(path, node)`` pairs in pre-order."""
        yield path, self
        for i, (_, child) in enumerate(self.children):
            yield from child.preorder(path + (i,))

    def size(self) -> int:
        return 1 + sum(c.size() for _, c in self.children)

    def __str__(self) -> str:
        return tree_to_text(self)


# ---------------------------------------------------------------------------
# graph <-> tree


def anonymize_with_provenance(graph: AmrGraph) -> tuple[SeqTree, dict[tuple[int, ...], int]]:
    """Like :func:`anonymize`, also returning the edge index behind every tree branch."""
    provenance: dict[tuple[int, ...], int] = {}

    def build(label: str, steps, path) -> SeqTree:
        children = []
        for step in steps:
            if step.relation == "wiki":
                continue
            child_path = path + (len(children),)
            provenance[child_path] = step.edge_index
            if step.kind == "node":
                child = build(graph.nodes[step.target], step.children, child_path)
            elif step.kind == "ref":
                child = SeqTree(graph.nodes[step.target], kind=REF)
            else:
                child = SeqTree(step.target, kind=CONST)
            children.append((step.relation, child))
        return SeqTree(label, tuple(children))

    tree = build(graph.nodes[graph.root], walk(graph), ())
    return tree, provenance


def anonymize(graph: AmrGraph) -> SeqTree:
    """Drop variables and ``:wiki`` links; re-entrant nodes become concept leaves."""
    return anonymize_with_provenance(graph)[0]


def tree_to_text(tree: SeqTree, indent: bool = False) -> str:
    out = io.StringIO()

    def emit(node: SeqTree, depth: int):
        if node.kind != NODE:
            out.write(node.label)
            return
        out.write("(" + node.label)
        for rel, child in node.children:
            out.write("\n" + "   " * (depth + 1) if indent else " ")
            out.write(f":{rel} ")
            emit(child, depth + 1)
        out.write(")")

    emit(tree, 0)
    return out.getvalue()


class _TreeParser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.end = len(text)

    def next(self):
        if self.i >= len(self.tokens):
            raise UnbalancedParens("input ended inside a node", self.end)
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> SeqTree:
        if not self.tokens:
            raise ParseError("empty input", 0)
        first = self.tokens[0]
        if first.kind != "lparen":
            raise ParseError(f"expected '(' but found {first.value!r}", first.pos)
        tree = self.node()
        if self.i < len(self.tokens):
            extra = self.tokens[self.i]
            if extra.kind == "rparen":
                raise UnbalancedParens("surplus ')'", extra.pos)
            raise TrailingInput(f"unexpected {extra.value!r} after the root node", extra.pos)
        return tree

    def node(self) -> SeqTree:
        self.next()  # '('
        tok = self.next()
        if tok.kind not in ("symbol", "string"):
            raise EmptyConcept("node without a concept", tok.pos)
        label = tok.value
        children = []
        while True:
            tok = self.next()
            if tok.kind == "rparen":
                return SeqTree(label, tuple(children))
            if tok.kind != "relation" or len(tok.value) < 2:
                raise ParseError(f"expected a relation or ')' but found {tok.value!r}", tok.pos)
            rel = tok.value[1:]
            if self.i >= len(self.tokens):
                raise DanglingRelation(f"relation :{rel} has no target", tok.pos)
            target = self.tokens[self.i]
            if target.kind == "lparen":
                children.append((rel, self.node()))
            elif target.kind in ("symbol", "string"):
                self.i += 1
                kind = CONST if is_constant_token(target.value) else REF
                children.append((rel, SeqTree(target.value, kind=kind)))
            elif target.kind in ("rparen", "relation"):
                raise DanglingRelation(f"relation :{rel} has no target", tok.pos)
            else:
                raise ParseError(f"unexpected {target.value!r}", target.pos)


def text_to_tree(text: str) -> SeqTree:
    """Parse tree text; bare non-constant symbols become leaf references."""
    return _TreeParser(text).parse()


def restore(source: str | SeqTree) -> AmrGraph:
    """Rebuild a graph with fresh variables from tree text.

    Every parenthesized node gets its own variable.  A leaf reference is
    attached to the first node (in pre-order) carrying the same concept;
    when no such node exists it becomes a new node, which later references
    to the same concept then share.
    """
    tree = text_to_tree(source) if isinstance(source, str) else source
    nodes: dict[str, str] = {}
    first_with: dict[str, str] = {}
    var_at: dict[tuple[int, ...], str] = {}
    for path, node in tree.preorder():
        if node.kind == NODE:
            var = fresh_variable(node.label, nodes)
            nodes[var] = node.label
            var_at[path] = var
            first_with.setdefault(node.label, var)

    edges = []
    for path, node in tree.preorder():
        if node.kind != NODE:
            continue
        parent = var_at[path]
        for i, (rel, child) in enumerate(node.children):
            if child.kind == NODE:
                edges.append((parent, rel, var_at[path + (i,)]))
            elif child.kind == CONST:
                edges.append((parent, rel, child.label))
            else:
                target = first_with.get(child.label)
                if target is None:
                    target = fresh_variable(child.label, nodes)
                    nodes[target] = child.label
                    first_with[child.label] = target
                edges.append((parent, rel, target))
    return AmrGraph(var_at[()], nodes, edges)


# ---------------------------------------------------------------------------
# vocabulary and super characters

PAD, UNK, EOS = "<pad>", "<unk>", "<eos>"
SPECIALS = (PAD, UNK, EOS)
VOCAB_SIZE_RANGE = (150, 200)


def pos_token(tag: str) -> str:
    return f"⟨{tag}⟩"


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    index: Mapping[str, int] = field(init=False, repr=False, compare=False)
    _lengths: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            raise ValueError("vocabulary tokens must be unique")
        lengths = sorted({len(t) for t in tokens if len(t) > 1 and t not in SPECIALS}, reverse=True)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "_lengths", tuple(lengths))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    def save(self, path) -> None:
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            for tok in self.tokens:
                fh.write(_escape_vocab(tok) + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(os.fspath(path), encoding="utf-8") as fh:
            return cls(tuple(_unescape_vocab(line.rstrip("\n")) for line in fh))


# space, tab and newline are valid tokens but invisible in a line-per-token file
_VOCAB_ESCAPES = {" ": "<space>", "\t": "<tab>", "\n": "<newline>", "\\": "\\\\"}
_VOCAB_UNESCAPES = {v: k for k, v in _VOCAB_ESCAPES.items()}


def _escape_vocab(tok: str) -> str:
    return _VOCAB_ESCAPES.get(tok, tok)


def _unescape_vocab(line: str) -> str:
    return _VOCAB_UNESCAPES.get(line, line)


def _relation_labels(tree: SeqTree) -> Iterable[str]:
    for _, node in tree.preorder():
        for rel, _ in node.children:
            yield ":" + rel


def build_vocab(corpus: Iterable[Document], extra_pos_tags: Iterable[str] = ()) -> Vocab:
    """Specials, then relations, POS tags and characters, each sorted.

    Characters are collected from the sentences and from the flat tree
    text of every graph with relation labels taken out.
    """
    relations: set[str] = set()
    chars: set[str] = set()
    for doc in corpus:
        tree = anonymize(doc.graph)
        rels = set(_relation_labels(tree))
        relations |= rels
        text = tree_to_text(tree)
        for rel in sorted(rels, key=len, reverse=True):
            text = text.replace(rel, "")
        chars.update(text)
        chars.update(doc.sentence)
    pos = sorted({pos_token(t) for t in extra_pos_tags})
    vocab = Vocab(SPECIALS + tuple(sorted(relations)) + tuple(pos) + tuple(sorted(chars)))
    lo, hi = VOCAB_SIZE_RANGE
    if relations and not lo <= len(vocab) <= hi:
        log.warning("vocabulary size %d outside the expected range %d-%d", len(vocab), lo, hi)
    return vocab


@dataclass(frozen=True)
class TokenSeq:
    ids: tuple[int, ...]
    text: str
    unknown: int = 0

    def __len__(self) -> int:
        return len(self.ids)


def encode(text: str, vocab: Vocab) -> TokenSeq:
    """Greedy longest-match tokenization; super characters beat single characters."""
    ids = []
    unknown = 0
    i, n = 0, len(text)
    while i < n:
        for length in vocab._lengths:
            if i + length <= n:
                tok_id = vocab.index.get(text[i:i + length])
                if tok_id is not None:
                    ids.append(tok_id)
                    i += length
                    break
        else:
            tok_id = vocab.index.get(text[i])
            if tok_id is None:
                tok_id = vocab.unk_id
                unknown += 1
            ids.append(tok_id)
            i += 1
    return TokenSeq(tuple(ids), text, unknown)


def decode(seq: TokenSeq | Sequence[int], vocab: Vocab) -> str:
    ids = seq.ids if isinstance(seq, TokenSeq) else seq
    return "".join(vocab.tokens[i] for i in ids)


# ---------------------------------------------------------------------------
# POS tags


def pos_annotate(sentence: str, tags: Sequence[tuple[str, str]]) -> str:
    """Follow every word with its tag as a super character."""
    words = sentence.split()
    if len(words) != len(tags):
        raise TokenMismatch(f"{len(words)} tokens but {len(tags)} tags")
    out = []
    for word, (tok, tag) in zip(words, tags):
        if word != tok:
            raise TokenMismatch(f"sentence token {word!r} does not match tagged token {tok!r}")
        out.append(f"{word} {pos_token(tag)}")
    return " ".join(out)


def read_pos_file(path_or_file) -> list[list[tuple[str, str]]]:
    """``token<TAB>TAG`` lines, one blank line between sentences."""
    fh = path_or_file if hasattr(path_or_file, "read") else open(os.fspath(path_or_file), encoding="utf-8")
    sentences: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    try:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                if current:
                    sentences.append(current)
                current = []
                continue
            tok, sep, tag = line.partition("\t")
            if not sep or not tag:
                raise ParseError(f"expected token<TAB>TAG, got {line!r}", line=n)
            current.append((tok, tag))
        if current:
            sentences.append(current)
    finally:
        if fh is not path_or_file:
            fh.close()
    return sentences


# ---------------------------------------------------------------------------
# trainer configuration


@dataclass(frozen=True)
class TrainerConfig:
    """Hyper-parameters handed to an external seq2seq trainer (not used here)."""

    layers: int = 1
    nodes: int = 400
    buckets: tuple[int, int] = (510, 510)
    epochs: tuple[int, int] = (25, 35)
    vocabulary: tuple[int, int] = (150, 200)
    learning_rate: float = 0.5
    decay_factor: float = 0.99
    gradient_norm: float = 5.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            values = value if isinstance(value, tuple) else (value,)
            if any(v <= 0 for v in values):
                raise ValueError(f"{f.name} must be positive, got {value!r}")

    _NAMES = {
        "layers": "Layers",
        "nodes": "Nodes",
        "buckets": "Buckets",
        "epochs": "Epochs",
        "vocabulary": "Vocabulary",
        "learning_rate": "Learning rate",
        "decay_factor": "Decay factor",
        "gradient_norm": "Gradient norm",
    }

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "buckets":
                text = f"({value[0]},{value[1]})"
            elif isinstance(value, tuple):
                text = f"{value[0]}-{value[1]}" if value[0] != value[1] else str(value[0])
            else:
                text = f"{value:g}" if isinstance(value, float) else str(value)
            lines.append(f"{self._NAMES[f.name]} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TrainerConfig":
        by_name = {v.lower(): k for k, v in cls._NAMES.items()}
        kwargs = {}
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            name, _, value = line.partition("=")
            key = by_name.get(name.strip().lower())
            if key is None:
                raise ValueError(f"unknown trainer setting {name.strip()!r}")
            value = value.strip()
            if key == "buckets":
                a, b = value.strip("()").split(",")
                kwargs[key] = (int(a), int(b))
            elif key in ("epochs", "vocabulary"):
                lo, _, hi = value.partition("-")
                kwargs[key] = (int(lo), int(hi or lo))
            elif key in ("layers", "nodes"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)
