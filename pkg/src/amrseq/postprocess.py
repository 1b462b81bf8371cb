"""Cleaning up model output: pruning, repair, fallback and wikification."""

from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .codec import SeqTree, text_to_tree
from .errors import AmrError, ParseError, Unrepairable
from .graph import AmrGraph, Document, strip_quotes, tokenize

DEFAULT_CONCEPT = "amr-unknown"
WIKI_THRESHOLD = 0.5


def prune(tree: SeqTree) -> SeqTree:
    """Keep the first of every repeated (relation, child concept) pair, at every depth."""
    if not tree.children:
        return tree
    seen = set()
    children = []
    for rel, child in tree.children:
        key = (rel, child.label)
        if key in seen:
            continue
        seen.add(key)
        children.append((rel, prune(child)))
    return SeqTree(tree.label, tuple(children), tree.kind)


def default_amr() -> SeqTree:
    return SeqTree(DEFAULT_CONCEPT)


# ---------------------------------------------------------------------------
# repair


def _parses(text: str) -> bool:
    try:
        text_to_tree(text)
    except ParseError:
        return False
    return True


def _close_quote(text: str) -> str:
    """Close a string left open, at the end of the token it started."""
    opened = None
    i = 0
    while i < len(text):
        ch = text[i]
        if opened is not None and ch == "\\":
            i += 2
            continue
        if ch == '"':
            opened = i if opened is None else None
        i += 1
    if opened is None:
        return text
    end = opened + 1
    while end < len(text) and not (text[end].isspace() or text[end] in "()"):
        end += 1
    return text[:end] + '"' + text[end:]


def _drop_unfinished(tokens: list) -> list:
    """Remove empty ``(`` openings and relations without a target."""
    changed = True
    while changed:
        changed = False
        out = []
        for k, tok in enumerate(tokens):
            nxt = tokens[k + 1] if k + 1 < len(tokens) else None
            if tok.kind == "lparen" and k > 0 and (nxt is None or nxt.kind in ("relation", "lparen")):
                changed = True
                continue
            if tok.kind == "lparen" and nxt is not None and nxt.kind == "rparen":
                tokens = tokens[:k] + tokens[k + 2:]
                changed = True
                break
            if tok.kind == "relation" and (nxt is None or nxt.kind in ("relation", "rparen")):
                changed = True
                continue
            out.append(tok)
        else:
            tokens = out
    return tokens


def _balance(tokens: list) -> list:
    out = []
    depth = 0
    for k, tok in enumerate(tokens):
        if tok.kind == "lparen":
            depth += 1
        elif tok.kind == "rparen":
            more = any(t.kind != "rparen" for t in tokens[k + 1:])
            if depth == 0 or (depth == 1 and more):
                continue
            depth -= 1
        out.append(tok)
    return out + [None] * depth


def _render(tokens: list) -> str:
    parts = []
    prev = None
    for tok in tokens:
        value = ")" if tok is None else tok.value
        if parts and prev != "(" and value != ")":
            parts.append(" ")
        parts.append(value)
        prev = value
    return "".join(parts)


def repair(text: str) -> str:
    """Make tree text parseable or raise :class:`Unrepairable`.

    Valid text is returned unchanged.  Otherwise, in order: close an open
    double quote, drop relations left without a target, then add missing
    and drop surplus closing parentheses.
    """
    if _parses(text):
        return text
    fixed = _close_quote(text)
    try:
        tokens = tokenize(fixed)
    except ParseError as err:
        raise Unrepairable(str(err)) from None
    tokens = _drop_unfinished(tokens)
    tokens = _balance(tokens)
    fixed = _render(tokens)
    if not _parses(fixed):
        raise Unrepairable(f"could not repair {text[:60]!r}")
    return fixed


def repair_or_default(text: str) -> tuple[SeqTree, bool]:
    """Parsed tree and whether the default had to be used."""
    try:
        return text_to_tree(repair(text)), False
    except AmrError:
        return default_amr(), True


# ---------------------------------------------------------------------------
# wikification


def _op_index(rel: str) -> int:
    m = re.fullmatch(r"op(\d+)", rel)
    return int(m.group(1)) if m else -1


def name_string(graph: AmrGraph, var: str) -> str | None:
    """Quote-stripped ``:opN`` values of ``var``'s ``:name`` node, space-joined."""
    for src, rel, tgt in graph.edges:
        if src == var and rel == "name" and tgt in graph.nodes:
            ops = sorted((_op_index(r), strip_quotes(t)) for s, r, t in graph.edges
                         if s == tgt and _op_index(r) >= 0 and t not in graph.nodes)
            return " ".join(value for _, value in ops)
    return None


def wiki_links(graph: AmrGraph, var: str) -> list[str]:
    return [strip_quotes(t) for s, r, t in graph.edges
            if s == var and r == "wiki" and t not in graph.nodes]


@dataclass(frozen=True)
class WikiTable:
    """How often each name carried each wiki link in gold data."""

    counts: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    totals: Mapping[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.totals)

    def link_for(self, name: str, threshold: float = WIKI_THRESHOLD) -> str | None:
        """Most frequent link when its share strictly exceeds ``threshold``."""
        total = self.totals.get(name, 0)
        links = self.counts.get(name)
        if not total or not links:
            return None
        link, count = max(sorted(links.items()), key=lambda kv: kv[1])
        return link if count / total > threshold else None

    def save(self, path_or_file) -> None:
        fh = path_or_file if hasattr(path_or_file, "write") else open(os.fspath(path_or_file), "w", encoding="utf-8")
        try:
            for name in sorted(self.totals):
                links = self.counts.get(name) or {"": 0}
                for link in sorted(links):
                    fh.write(f"{name}\t{link}\t{links[link]}\t{self.totals[name]}\n")
        finally:
            if fh is not path_or_file:
                fh.close()

    @classmethod
    def load(cls, path_or_file) -> "WikiTable":
        fh = path_or_file if hasattr(path_or_file, "read") else open(os.fspath(path_or_file), encoding="utf-8")
        counts: dict[str, Counter] = {}
        totals: dict[str, int] = {}
        try:
            for n, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", line=n)
                name, link, count, total = parts
                totals[name] = int(total)
                if link:
                    counts.setdefault(name, Counter())[link] = int(count)
        finally:
            if fh is not path_or_file:
                fh.close()
        return cls(counts, totals)


def _graphs(items: Iterable[Document | AmrGraph]) -> Iterable[AmrGraph]:
    for item in items:
        yield item.graph if isinstance(item, Document) else item


def build_wiki_table(gold: Iterable[Document | AmrGraph]) -> WikiTable:
    counts: dict[str, Counter] = {}
    totals: Counter = Counter()
    for graph in _graphs(gold):
        for var in graph.nodes:
            name = name_string(graph, var)
            if name is None:
                continue
            totals[name] += 1
            for link in wiki_links(graph, var):
                if link != "-":  # explicit "no page"
                    counts.setdefault(name, Counter())[link] += 1
    return WikiTable(counts, dict(totals))


def wikify(graph: AmrGraph, table: WikiTable, threshold: float = WIKI_THRESHOLD) -> AmrGraph:
    """Add ``:wiki`` to named nodes whose name is reliably linked in gold."""
    edges = list(graph.edges)
    for var in graph.nodes:
        if any(s == var and r == "wiki" for s, r, _ in edges):
            continue
        name = name_string(graph, var)
        if name is None:
            continue
        link = table.link_for(name, threshold)
        if link is None:
            continue
        at = next(k for k, (s, r, t) in enumerate(edges) if s == var and r == "name")
        edges.insert(at, (var, "wiki", f'"{link}"'))
    return graph.with_edges(edges)


def strip_wiki(graph: AmrGraph) -> AmrGraph:
    return graph.with_edges(e for e in graph.edges if e[1] != "wiki")
