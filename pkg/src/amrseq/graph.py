"""AMR graph model, Penman reader/writer, triple extraction and corpus I/O.

Relation labels are stored without their leading colon (``ARG0``, not
``:ARG0``); the colon is added back when writing.  Constants keep their
surface form, so quoted strings are stored with their quotes.

    >>> g = parse_penman('(c / cell :mod (s / small))')
    >>> g.root, dict(g.nodes), list(g.edges)
    ('c', {'c': 'cell', 's': 'small'}, [('c', 'mod', 's')])
    >>> serialize_penman(g, indent=False)
    '(c / cell :mod (s / small))'
"""

from __future__ import annotations

import io
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, TextIO

from .errors import (
    DanglingRelation,
    DuplicateVariableDefinition,
    EmptyConcept,
    ParseError,
    TrailingInput,
    UnbalancedParens,
    UndefinedVariableReference,
    UnterminatedString,
)

log = logging.getLogger(__name__)

Edge = tuple[str, str, str]

# bare symbols that are attribute values rather than node references
CONSTANT_SYMBOLS = frozenset({"-", "+", "imperative", "expressive", "interrogative"})
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
# undefined bare tokens of this shape are treated as broken references
_VARIABLE_SHAPE_RE = re.compile(r"^[a-z]\d*$")
_HTML_TAG_RE = re.compile(r"<[^<>]*>")
_SENSE_RE = re.compile(r"-\d+$")


def is_constant_token(token: str) -> bool:
    """True for quoted strings, numbers and the closed set of bare constants."""
    if len(token) >= 2 and token[0] == '"' and token[-1] == '"':
        return True
    return token in CONSTANT_SYMBOLS or bool(_NUMBER_RE.match(token))


def looks_like_variable(token: str) -> bool:
    return bool(_VARIABLE_SHAPE_RE.match(token))


def strip_quotes(token: str) -> str:
    if len(token) >= 2 and token[0] == '"' and token[-1] == '"':
        return token[1:-1]
    return token


def invert_relation(label: str) -> str:
    """``ARG0`` <-> ``ARG0-of``; ``consist-of`` is a plain relation."""
    if label.endswith("-of") and label != "consist-of":
        return label[:-3]
    return label + "-of"


def is_inverted(label: str) -> bool:
    return label.endswith("-of") and label != "consist-of"


def fresh_variable(concept: str, taken: Iterable[str]) -> str:
    """First letter of the concept, then ``x2``, ``x3``... on collision."""
    taken = set(taken)
    first = concept.strip('"')[:1].lower()
    if not ("a" <= first <= "z"):
        first = "x"
    if first not in taken:
        return first
    n = 2
    while f"{first}{n}" in taken:
        n += 1
    return f"{first}{n}"


@dataclass(frozen=True)
class AmrGraph:
    """Rooted, directed, labeled graph.

    ``edges`` is ordered; an edge target is a variable when it is a key of
    ``nodes`` and a constant otherwise.  Treat instances as immutable.
    """

    root: str
    nodes: Mapping[str, str]
    edges: tuple[Edge, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def is_variable(self, target: str) -> bool:
        return target in self.nodes

    def outgoing(self, var: str) -> list[Edge]:
        return [e for e in self.edges if e[0] == var]

    def with_edges(self, edges: Iterable[Edge]) -> "AmrGraph":
        return AmrGraph(self.root, self.nodes, tuple(edges), self.metadata)

    def with_metadata(self, **metadata: str) -> "AmrGraph":
        return AmrGraph(self.root, self.nodes, self.edges, {**self.metadata, **metadata})

    def __str__(self) -> str:
        return serialize_penman(self)


# ---------------------------------------------------------------------------
# tokenizer shared with the tree codec

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<slash>/)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<badstring>")
  | (?P<relation>:[^\s()"/:]*)
  | (?P<symbol>[^\s()"/:]+)
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "badstring":
            raise UnterminatedString("unterminated string literal", m.start())
        tokens.append(Token(kind, m.group(), m.start()))
    return tokens


class _PenmanParser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.end = len(text)
        self.nodes: dict[str, str] = {}
        self.edges: list[Edge | None] = []
        self.symbol_targets: list[tuple[int, int]] = []  # (edge index, pos)

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise UnbalancedParens("input ended inside a node", self.end)
        self.i += 1
        return tok

    def parse(self) -> AmrGraph:
        tok = self.peek()
        if tok is None:
            raise ParseError("empty input", 0)
        if tok.kind != "lparen":
            raise ParseError(f"expected '(' but found {tok.value!r}", tok.pos)
        root = self.node()
        extra = self.peek()
        if extra is not None:
            if extra.kind == "rparen":
                raise UnbalancedParens("surplus ')'", extra.pos)
            raise TrailingInput(f"unexpected {extra.value!r} after the root node", extra.pos)
        edges = list(self.edges)
        for idx, pos in self.symbol_targets:
            src, rel, tgt = edges[idx]
            if tgt not in self.nodes and looks_like_variable(tgt):
                raise UndefinedVariableReference(f"variable {tgt!r} is never defined", pos)
        return AmrGraph(root, self.nodes, edges)

    def node(self) -> str:
        open_tok = self.next()  # '('
        tok = self.next()
        if tok.kind != "symbol":
            raise EmptyConcept("node has no variable", tok.pos)
        var = tok.value
        tok = self.next()
        if tok.kind != "slash":
            raise EmptyConcept(f"variable {var!r} has no concept", tok.pos)
        tok = self.next()
        if tok.kind not in ("symbol", "string"):
            raise EmptyConcept(f"variable {var!r} has an empty concept", tok.pos)
        if var in self.nodes:
            raise DuplicateVariableDefinition(f"variable {var!r} defined twice", open_tok.pos)
        self.nodes[var] = tok.value
        while True:
            tok = self.next()
            if tok.kind == "rparen":
                return var
            if tok.kind != "relation":
                raise ParseError(f"expected a relation or ')' but found {tok.value!r}", tok.pos)
            label = tok.value[1:]
            if not label:
                raise ParseError("empty relation label", tok.pos)
            target = self.peek()
            if target is None or target.kind in ("rparen", "relation"):
                raise DanglingRelation(f"relation :{label} has no target", tok.pos)
            idx = len(self.edges)
            self.edges.append(None)
            if target.kind == "lparen":
                self.edges[idx] = (var, label, self.node())
            elif target.kind in ("symbol", "string"):
                self.i += 1
                self.edges[idx] = (var, label, target.value)
                if target.kind == "symbol":
                    self.symbol_targets.append((idx, target.pos))
            else:
                raise ParseError(f"unexpected {target.value!r}", target.pos)


def parse_penman(text: str) -> AmrGraph:
    """Parse one parenthesized Penman expression."""
    return _PenmanParser(text).parse()


# ---------------------------------------------------------------------------
# traversal


@dataclass
class Step:
    """One emitted branch of a depth-first walk over a graph.

    ``kind`` is ``"node"`` for the first visit of a variable, ``"ref"`` for a
    later visit and ``"const"`` for an attribute value.  ``relation`` is
    inverted when the stored edge points towards the current node.
    """

    relation: str
    target: str
    edge_index: int
    kind: str
    children: list["Step"] = field(default_factory=list)


def walk(graph: AmrGraph) -> list[Step]:
    """Deterministic depth-first layout of ``graph`` from its root.

    Edges are taken in stored order.  A node that cannot be reached along
    stored edge directions is entered through an incoming edge, emitted
    with the inverted relation, so every connected node is reached.
    """
    incident: dict[str, list[int]] = {v: [] for v in graph.nodes}
    for i, (src, _, tgt) in enumerate(graph.edges):
        if src in incident:
            incident[src].append(i)
        if tgt in incident and tgt != src:
            incident[tgt].append(i)
    for lst in incident.values():
        lst.sort()

    # only nodes unreachable along stored edge directions are entered backwards
    forward = {graph.root}
    stack = [graph.root]
    while stack:
        var = stack.pop()
        for i in incident.get(var, ()):
            src, _, tgt = graph.edges[i]
            if src == var and tgt in graph.nodes and tgt not in forward:
                forward.add(tgt)
                stack.append(tgt)

    visited = {graph.root}
    emitted: set[int] = set()

    def expand(var: str) -> list[Step]:
        steps = []
        for i in incident.get(var, ()):
            if i in emitted:
                continue
            src, rel, tgt = graph.edges[i]
            if src == var:
                emitted.add(i)
                if tgt not in graph.nodes:
                    steps.append(Step(rel, tgt, i, "const"))
                elif tgt in visited:
                    steps.append(Step(rel, tgt, i, "ref"))
                else:
                    visited.add(tgt)
                    step = Step(rel, tgt, i, "node")
                    steps.append(step)
                    step.children = expand(tgt)
            elif src in graph.nodes and src not in visited and src not in forward:
                emitted.add(i)
                visited.add(src)
                step = Step(invert_relation(rel), src, i, "node")
                steps.append(step)
                step.children = expand(src)
        return steps

    return expand(graph.root)


def serialize_penman(graph: AmrGraph, indent: bool = True) -> str:
    """Write ``graph`` in Penman notation.

    Each variable is defined at its first appearance in :func:`walk` order;
    later appearances are bare variables.
    """
    out = io.StringIO()

    def emit(var: str, steps: list[Step], depth: int):
        out.write(f"({var} / {graph.nodes[var]}")
        for step in steps:
            out.write("\n" + " " * (6 * (depth + 1)) if indent else " ")
            out.write(f":{step.relation} ")
            if step.kind == "node":
                emit(step.target, step.children, depth + 1)
            else:
                out.write(step.target)
        out.write(")")

    emit(graph.root, walk(graph), 0)
    return out.getvalue()


# ---------------------------------------------------------------------------
# triples


@dataclass(frozen=True)
class TripleSet:
    """Smatch triple decomposition of a graph.

    Relations are normalized so that ``X-of`` edges appear as ``X`` with
    their endpoints swapped.  Attribute values have surrounding quotes
    removed.  ``top`` pairs the root variable with its concept; subsets
    built for restricted scoring may leave it out.
    """

    instances: tuple[tuple[str, str], ...] = ()
    attributes: tuple[tuple[str, str, str], ...] = ()
    relations: tuple[tuple[str, str, str], ...] = ()
    top: tuple[str, str] | None = None

    def __len__(self) -> int:
        return (len(self.instances) + len(self.attributes) + len(self.relations)
                + (self.top is not None))

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for v, _ in self.instances:
            seen[v] = None
        for v, _, _ in self.attributes:
            seen[v] = None
        for a, _, b in self.relations:
            seen[a] = None
            seen[b] = None
        if self.top is not None:
            seen[self.top[0]] = None
        return list(seen)

    def unary(self) -> list[tuple[str, str, str]]:
        """Single-variable triples as ``(var, label, value)``."""
        out = [(v, "instance", c) for v, c in self.instances]
        out.extend(self.attributes)
        if self.top is not None:
            out.append((self.top[0], "TOP", self.top[1]))
        return out

    def binary(self) -> list[tuple[str, str, str]]:
        return list(self.relations)

    def __iter__(self):
        yield from (("instance", v, c) for v, c in self.instances)
        yield from ((r, v, c) for v, r, c in self.attributes)
        yield from ((r, a, b) for a, r, b in self.relations)
        if self.top is not None:
            yield ("TOP", self.top[0], self.top[1])


def to_triples(graph: AmrGraph) -> TripleSet:
    instances = sorted(graph.nodes.items())
    attributes = []
    relations = []
    for src, rel, tgt in graph.edges:
        if tgt in graph.nodes:
            if is_inverted(rel):
                relations.append((tgt, invert_relation(rel), src))
            else:
                relations.append((src, rel, tgt))
        else:
            attributes.append((src, rel, strip_quotes(tgt)))
    return TripleSet(
        tuple(instances),
        tuple(sorted(attributes)),
        tuple(sorted(relations)),
        (graph.root, graph.nodes.get(graph.root, "")),
    )


# ---------------------------------------------------------------------------
# validation


class Violation(NamedTuple):
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate(graph: AmrGraph) -> list[Violation]:
    """Structural invariant check; the empty list means the graph is valid."""
    problems = []
    nodes = graph.nodes
    if graph.root not in nodes:
        problems.append(Violation("MissingRoot", f"root {graph.root!r} is not a node"))
    for var, concept in nodes.items():
        if not concept:
            problems.append(Violation("EmptyConcept", f"variable {var!r}"))
    for src, rel, tgt in graph.edges:
        if src not in nodes:
            problems.append(Violation("UndefinedVariableReference",
                                      f"edge source {src!r} is not a node"))
        if not rel or rel.startswith(":"):
            problems.append(Violation("BadRelation", f"relation label {rel!r} on {src!r}"))
        if tgt not in nodes and not is_constant_token(tgt) and looks_like_variable(tgt):
            problems.append(Violation("UndefinedVariableReference",
                                      f"edge {src} :{rel} {tgt} points to an undefined variable"))
    if graph.root in nodes:
        adj: dict[str, set[str]] = {v: set() for v in nodes}
        for src, _, tgt in graph.edges:
            if src in nodes and tgt in nodes:
                adj[src].add(tgt)
                adj[tgt].add(src)
        seen = {graph.root}
        stack = [graph.root]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for var in nodes:
            if var not in seen:
                problems.append(Violation("Unreachable", f"variable {var!r} is not connected to the root"))
    return problems


# ---------------------------------------------------------------------------
# corpus files


def strip_html(sentence: str) -> str:
    """Remove ``<...>`` spans and collapse the doubled spaces they leave."""
    prev = None
    while prev != sentence:
        prev = sentence
        sentence = _HTML_TAG_RE.sub("", sentence)
    return re.sub(r"\s{2,}", " ", sentence).strip()


def strip_sense(concept: str) -> str:
    return _SENSE_RE.sub("", concept)


@dataclass(frozen=True)
class Document:
    id: str
    sentence: str
    graph: AmrGraph
    gold: bool = False
    metadata: Mapping[str, str] = field(default_factory=dict, compare=False)
    line: int = 0

    def with_graph(self, graph: AmrGraph, **changes) -> "Document":
        fields = dict(id=self.id, sentence=self.sentence, graph=graph, gold=self.gold,
                      metadata=self.metadata, line=self.line)
        fields.update(changes)
        return Document(**fields)


class Corpus(list):
    """List of documents that also carries per-block errors."""

    def __init__(self, docs: Iterable[Document] = (), errors: Iterable[ParseError] = ()):
        super().__init__(docs)
        self.errors: list[ParseError] = list(errors)


_META_RE = re.compile(r"::(\S+)")


def parse_metadata(line: str) -> list[tuple[str, str]]:
    """``# ::id x ::date y`` -> [('id', 'x'), ('date', 'y')].

    ``snt`` and ``tok`` take the rest of the line verbatim.
    """
    body = line.lstrip("#").strip()
    out = []
    matches = list(_META_RE.finditer(body))
    for k, m in enumerate(matches):
        key = m.group(1)
        if key in ("snt", "tok"):
            out.append((key, body[m.end():].strip()))
            break
        end = matches[k + 1].start() if k + 1 < len(matches) else len(body)
        out.append((key, body[m.end():end].strip()))
    return out


class Block(NamedTuple):
    line: int
    metadata: list[tuple[str, str]]
    body: str
    body_line: int = 0

    def line_of(self, pos: int | None) -> int:
        """File line of character ``pos`` in the body."""
        if pos is None or not self.body_line:
            return self.line
        return self.body_line + self.body.count("\n", 0, pos)


def iter_blocks(lines: Iterable[str]) -> Iterator[Block]:
    """Split a corpus into blank-line separated blocks."""
    meta: list[tuple[str, str]] = []
    body: list[str] = []
    start = body_start = 0
    for n, raw in enumerate(lines, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            if meta or body:
                yield Block(start, meta, "\n".join(body), body_start)
            meta, body, start, body_start = [], [], 0, 0
            continue
        if not start:
            start = n
        stripped = line.lstrip()
        if stripped.startswith("#") and not body:
            if "::" in stripped:
                meta.extend(parse_metadata(stripped))
            continue
        if not body:
            body_start = n
        body.append(line)
    if meta or body:
        yield Block(start, meta, "\n".join(body), body_start)


def _open(path_or_file) -> TextIO:
    if hasattr(path_or_file, "read"):
        return path_or_file
    return open(os.fspath(path_or_file), encoding="utf-8")


def iter_corpus(path_or_file, gold: bool = False) -> Iterator[Document | ParseError]:
    """Stream documents; malformed blocks are yielded as ParseError values."""
    fh = _open(path_or_file)
    try:
        count = 0
        for block in iter_blocks(fh):
            if not block.body.strip():
                continue  # header comments only
            count += 1
            meta = dict(block.metadata)
            try:
                graph = parse_penman(block.body)
            except ParseError as err:
                yield err.at_line(block.line_of(err.pos))
                continue
            doc_id = meta.get("id") or f"doc-{count}"
            graph = graph.with_metadata(**meta)
            yield Document(doc_id, strip_html(meta.get("snt", "")), graph, gold, meta, block.line)
    finally:
        if fh is not path_or_file:
            fh.close()


def read_corpus(path_or_file, gold: bool = False) -> Corpus:
    """Read a corpus file; blocks that fail to parse are kept in ``.errors``."""
    docs, errors = [], []
    for item in iter_corpus(path_or_file, gold):
        if isinstance(item, ParseError):
            log.warning("skipping block: %s", item)
            errors.append(item)
        else:
            docs.append(item)
    return Corpus(docs, errors)


def format_document(doc: Document, indent: bool = True, body: str | None = None) -> str:
    lines = [f"# ::id {doc.id}"]
    if doc.sentence or "snt" in doc.metadata:
        lines.append(f"# ::snt {doc.sentence}")
    for key, value in doc.metadata.items():
        if key not in ("id", "snt"):
            lines.append(f"# ::{key} {value}".rstrip())
    lines.append(body if body is not None else serialize_penman(doc.graph, indent))
    return "\n".join(lines) + "\n"


def write_corpus(docs: Iterable[Document], out: TextIO, indent: bool = True) -> None:
    for doc in docs:
        out.write(format_document(doc, indent))
        out.write("\n")
