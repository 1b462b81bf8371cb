"""Fine-grained corpus evaluation and sentence-length analysis.

Category definitions used here:

Smatch
    micro-averaged Smatch.
Unlabeled
    Smatch after every relation and attribute label is rewritten to one
    shared label.
No WSD
    Smatch after ``-NN`` sense suffixes are stripped from concepts.
Concepts
    F over the multiset of concept labels.
Named Entities
    F over ``(concept, name string)`` pairs of ``:name``-bearing nodes.
Wikification
    F over ``(name string, wiki link)`` pairs; ``:wiki -`` is ignored.
Negation
    F over the concepts of nodes carrying ``:polarity -``.
Reentrancies
    Smatch restricted to triples that involve a re-entrant variable, i.e. one
    written more than once in Penman form (the root's top edge counts).
SRL
    Smatch restricted to triples whose normalized label is ``ARGn``.

A category that is empty on both sides for the whole corpus scores 1.0
and is listed in :attr:`FineGrainedReport.empty`.
"""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import IdMismatch
from .graph import AmrGraph, Document, TripleSet, strip_quotes, strip_sense, to_triples, walk
from .postprocess import name_string, wiki_links
from .smatch import DEFAULT_RESTARTS, ZERO, SmatchScore, map_pairs

CATEGORIES = (
    "Smatch",
    "Unlabeled",
    "No WSD",
    "Named Entities",
    "Wikification",
    "Negation",
    "Concepts",
    "Reentrancies",
    "SRL",
)
UNLABELED = "_"
_SRL_RE = re.compile(r"^ARG\d+$")


# ---------------------------------------------------------------------------
# triple views


def unlabeled(ts: TripleSet) -> TripleSet:
    return TripleSet(
        ts.instances,
        tuple((v, UNLABELED, c) for v, _, c in ts.attributes),
        tuple((a, UNLABELED, b) for a, _, b in ts.relations),
        ts.top,
    )


def no_wsd(ts: TripleSet) -> TripleSet:
    top = (ts.top[0], strip_sense(ts.top[1])) if ts.top else None
    return TripleSet(tuple((v, strip_sense(c)) for v, c in ts.instances),
                     ts.attributes, ts.relations, top)


def reentrant_variables(graph: AmrGraph) -> set[str]:
    """Variables written more than once in Penman form; the root's top edge counts."""
    seen = Counter({graph.root: 1})
    stack = walk(graph)
    while stack:
        step = stack.pop()
        if step.kind != "const":
            seen[step.target] += 1
        stack.extend(step.children)
    return {v for v, n in seen.items() if n >= 2}


def reentrancy_view(graph: AmrGraph) -> TripleSet:
    ts = to_triples(graph)
    keep = reentrant_variables(graph)
    return TripleSet(
        tuple(t for t in ts.instances if t[0] in keep),
        tuple(t for t in ts.attributes if t[0] in keep),
        tuple(t for t in ts.relations if t[0] in keep or t[2] in keep),
        ts.top if ts.top and ts.top[0] in keep else None,
    )


def srl_view(graph: AmrGraph) -> TripleSet:
    ts = to_triples(graph)
    return TripleSet(
        attributes=tuple(t for t in ts.attributes if _SRL_RE.match(t[1])),
        relations=tuple(t for t in ts.relations if _SRL_RE.match(t[1])),
    )


def concepts(graph: AmrGraph) -> list[str]:
    return list(graph.nodes.values())


def named_entities(graph: AmrGraph) -> list[tuple[str, str]]:
    out = []
    for var, concept in graph.nodes.items():
        name = name_string(graph, var)
        if name is not None:
            out.append((concept, name))
    return out


def wiki_pairs(graph: AmrGraph) -> list[tuple[str, str]]:
    out = []
    for var in graph.nodes:
        for link in wiki_links(graph, var):
            if link != "-":
                out.append((name_string(graph, var) or "", link))
    return out


def negated_concepts(graph: AmrGraph) -> list[str]:
    return [graph.nodes[s] for s, r, t in graph.edges
            if r == "polarity" and s in graph.nodes and t not in graph.nodes and strip_quotes(t) == "-"]


def bag_score(gold: Iterable, test: Iterable) -> SmatchScore:
    """Multiset overlap, as a score with the same P/R/F semantics."""
    g, t = Counter(gold), Counter(test)
    return SmatchScore(sum((g & t).values()), sum(g.values()), sum(t.values()))


SMATCH_VIEWS: dict[str, Callable[[AmrGraph], TripleSet]] = {
    "Smatch": to_triples,
    "Unlabeled": lambda g: unlabeled(to_triples(g)),
    "No WSD": lambda g: no_wsd(to_triples(g)),
    "Reentrancies": reentrancy_view,
    "SRL": srl_view,
}
BAG_VIEWS: dict[str, Callable[[AmrGraph], list]] = {
    "Named Entities": named_entities,
    "Wikification": wiki_pairs,
    "Negation": negated_concepts,
    "Concepts": concepts,
}


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class FineGrainedReport:
    scores: Mapping[str, SmatchScore]
    empty: frozenset[str] = field(default_factory=frozenset)

    def f(self, category: str) -> float:
        return 1.0 if category in self.empty else self.scores[category].f

    def rows(self) -> list[tuple[str, float]]:
        return [(c, self.f(c)) for c in CATEGORIES]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["category", "f"])
        for category, f in self.rows():
            writer.writerow([category, f"{f:.4f}"])
        return out.getvalue()

    def to_json(self) -> str:
        data = {
            c: {**self.scores[c].as_dict(), "f": self.f(c), "empty": c in self.empty}
            for c in CATEGORIES
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def align_by_id(gold_docs: Sequence[Document], test_docs: Sequence[Document]) -> list[tuple[Document, Document]]:
    """Pair documents by id, in gold order."""
    test_by_id = {d.id: d for d in test_docs}
    gold_ids = [d.id for d in gold_docs]
    if len(set(gold_ids)) != len(gold_ids) or set(gold_ids) != set(test_by_id) or len(test_by_id) != len(test_docs):
        missing = sorted(set(gold_ids) ^ set(test_by_id))
        raise IdMismatch(f"document ids differ between corpora: {missing[:5]}")
    return [(g, test_by_id[g.id]) for g in gold_docs]


def fine_grained(gold_docs: Sequence[Document], test_docs: Sequence[Document],
                 restarts: int = DEFAULT_RESTARTS, *, seed: int, jobs: int = 1) -> FineGrainedReport:
    pairs = align_by_id(gold_docs, test_docs)
    scores: dict[str, SmatchScore] = {}
    work, owners = [], []
    for category, view in SMATCH_VIEWS.items():
        for k, (g, t) in enumerate(pairs):
            work.append((view(g.graph), view(t.graph)))
            owners.append((category, k))
    results = map_pairs(work, restarts, seed, jobs, indices=[k for _, k in owners])
    for (category, _), score in zip(owners, results):
        scores[category] = scores.get(category, ZERO) + score
    for category, view in BAG_VIEWS.items():
        scores[category] = sum((bag_score(view(g.graph), view(t.graph)) for g, t in pairs), ZERO)
    for category in CATEGORIES:
        scores.setdefault(category, ZERO)
    empty = frozenset(c for c, s in scores.items() if s.gold_total == 0 and s.test_total == 0)
    return FineGrainedReport({c: scores[c] for c in CATEGORIES}, empty)


# ---------------------------------------------------------------------------
# sentence length


@dataclass(frozen=True)
class LengthRow:
    max_len: int
    count: int
    f: float | None


def length_buckets(gold_docs: Sequence[Document], test_docs: Sequence[Document],
                   bucket_edges: Sequence[int], restarts: int = DEFAULT_RESTARTS, *,
                   seed: int, jobs: int = 1) -> list[LengthRow]:
    """Cumulative buckets: a document enters every bucket whose edge is at least its length."""
    pairs = align_by_id(gold_docs, test_docs)
    per_doc = map_pairs([(g.graph, t.graph) for g, t in pairs], restarts, seed, jobs)
    lengths = [len(g.sentence.split()) for g, _ in pairs]
    rows = []
    for edge in bucket_edges:
        members = [s for s, n in zip(per_doc, lengths) if n <= edge]
        total = sum(members, ZERO)
        rows.append(LengthRow(edge, len(members), total.f if members else None))
    return rows


def length_rows_csv(rows: Iterable[LengthRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["max_len", "count", "f"])
    for row in rows:
        writer.writerow([row.max_len, row.count, "" if row.f is None else f"{row.f:.4f}"])
    return out.getvalue()


def length_rows_json(rows: Iterable[LengthRow]) -> str:
    data = [{"max_len": r.max_len, "count": r.count, "f": r.f} for r in rows]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
