"""Choosing one parse per sentence from several parsers.

:func:`select` keeps the candidate that agrees most with the others (the
row sum of pairwise Smatch F); :func:`oracle_select` peeks at gold and is
only meant as an upper bound.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import IdMismatch
from .graph import AmrGraph, Document
from .smatch import DEFAULT_MAX_VARS, DEFAULT_RESTARTS, ZERO, SmatchScore, smatch_auto


def _frac(score: SmatchScore) -> Fraction:
    if not score.matched:
        return Fraction(0)
    return Fraction(2 * score.matched, score.gold_total + score.test_total)


@dataclass(frozen=True)
class CandidateSet:
    id: str
    candidates: tuple[tuple[str, AmrGraph], ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(tuple(c) for c in self.candidates))
        if not self.candidates:
            raise ValueError(f"candidate set {self.id!r} is empty")
        names = [name for name, _ in self.candidates]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parser ids in candidate set {self.id!r}")

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def graphs(self) -> list[AmrGraph]:
        return [g for _, g in self.candidates]


class Selection(NamedTuple):
    index: int
    graph: AmrGraph
    matrix: np.ndarray


class OracleChoice(NamedTuple):
    index: int
    graph: AmrGraph
    f: float


def pairwise_matrix(graphs: Sequence[AmrGraph], restarts: int = DEFAULT_RESTARTS, *, seed: int,
                    max_vars: int = DEFAULT_MAX_VARS) -> list[list[Fraction]]:
    """Symmetric pairwise F with a zero diagonal, as exact fractions."""
    n = len(graphs)
    matrix = [[Fraction(0)] * n for _ in range(n)]
    index = 0
    for i in range(n):
        for j in range(i + 1, n):
            score = smatch_auto(graphs[i], graphs[j], restarts, seed=seed, index=index, max_vars=max_vars)
            matrix[i][j] = matrix[j][i] = _frac(score)
            index += 1
    return matrix


def _argmax(values: Sequence) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def select(cands: CandidateSet, restarts: int = DEFAULT_RESTARTS, *, seed: int,
           max_vars: int = DEFAULT_MAX_VARS) -> Selection:
    """Candidate with the highest summed F against the others; ties go to the earlier one."""
    graphs = cands.graphs
    if len(graphs) == 1:
        return Selection(0, graphs[0], np.zeros((0, 0)))
    matrix = pairwise_matrix(graphs, restarts, seed=seed, max_vars=max_vars)
    best = _argmax([sum(row) for row in matrix])
    return Selection(best, graphs[best], np.array(matrix, dtype=float))


def oracle_select(cands: CandidateSet, gold: AmrGraph, restarts: int = DEFAULT_RESTARTS, *,
                  seed: int, max_vars: int = DEFAULT_MAX_VARS) -> OracleChoice:
    scores = [_frac(smatch_auto(gold, g, restarts, seed=seed, index=k, max_vars=max_vars))
              for k, g in enumerate(cands.graphs)]
    best = _argmax(scores)
    return OracleChoice(best, cands.graphs[best], float(scores[best]))


# ---------------------------------------------------------------------------
# corpora


def _map(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def candidate_sets(runs: Mapping[str, Sequence[Document]]) -> list[CandidateSet]:
    """Group parser runs into per-document candidate sets, in first-run order."""
    names = list(runs)
    if not names:
        return []
    by_id = {name: {d.id: d for d in docs} for name, docs in runs.items()}
    order = [d.id for d in runs[names[0]]]
    for name in names:
        if set(by_id[name]) != set(order):
            raise IdMismatch(f"run {name!r} does not cover the same document ids as {names[0]!r}")
    return [CandidateSet(doc_id, tuple((name, by_id[name][doc_id].graph) for name in names))
            for doc_id in order]


@dataclass(frozen=True)
class EnsembleRow:
    id: str
    chosen: str
    index: int
    row_sums: tuple[float, ...]


def ensemble_corpus(runs: Mapping[str, Sequence[Document]], restarts: int = DEFAULT_RESTARTS, *,
                    seed: int, max_vars: int = DEFAULT_MAX_VARS,
                    jobs: int = 1) -> tuple[list[Document], list[EnsembleRow]]:
    """Pick one parse per document; returns the chosen documents and a choice log."""
    names = list(runs)
    docs_by_id = {d.id: d for d in runs[names[0]]} if names else {}
    sets = candidate_sets(runs)
    picks = _map(partial(select, restarts=restarts, seed=seed, max_vars=max_vars), sets, jobs)
    chosen_docs, rows = [], []
    for cands, sel in zip(sets, picks):
        sums = tuple(float(x) for x in sel.matrix.sum(axis=1)) if sel.matrix.size else (0.0,)
        name = cands.candidates[sel.index][0]
        rows.append(EnsembleRow(cands.id, name, sel.index, sums))
        chosen_docs.append(docs_by_id[cands.id].with_graph(sel.graph))
    return chosen_docs, rows


def ensemble_rows_csv(rows: Sequence[EnsembleRow], names: Sequence[str]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "chosen", *[f"sum_{n}" for n in names]])
    for row in rows:
        writer.writerow([row.id, row.chosen, *[f"{x:.4f}" for x in row.row_sums]])
    return out.getvalue()


@dataclass(frozen=True)
class Comparison:
    parsers: tuple[str, ...]
    rows: tuple[tuple[str, tuple[float, ...], str], ...]  # (doc id, f per parser, winner)
    oracle: SmatchScore

    @property
    def wins(self) -> Counter:
        return Counter(winner for _, _, winner in self.rows)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["id", *self.parsers, "winner"])
        for doc_id, fs, winner in self.rows:
            writer.writerow([doc_id, *[f"{f:.4f}" for f in fs], winner])
        return out.getvalue()

    def summary_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["parser", "wins"])
        wins = self.wins
        for name in (*self.parsers, "tie"):
            writer.writerow([name, wins.get(name, 0)])
        writer.writerow(["oracle_f", f"{self.oracle.f:.4f}"])
        return out.getvalue()

    def to_json(self) -> str:
        data = {
            "parsers": list(self.parsers),
            "documents": [{"id": i, "f": dict(zip(self.parsers, fs)), "winner": w} for i, fs, w in self.rows],
            "wins": {name: self.wins.get(name, 0) for name in (*self.parsers, "tie")},
            "oracle": self.oracle.as_dict(),
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _score_candidates(task, restarts: int, seed: int, max_vars: int) -> list[SmatchScore]:
    k, gold, graphs = task
    return [smatch_auto(gold, g, restarts, seed=seed, index=k, max_vars=max_vars) for g in graphs]


def _check_runs(gold_docs: Sequence[Document], runs: Mapping[str, Sequence[Document]]) -> dict:
    by_id = {name: {d.id: d for d in docs} for name, docs in runs.items()}
    gold_ids = {d.id for d in gold_docs}
    for name, docs in by_id.items():
        if set(docs) != gold_ids:
            raise IdMismatch(f"run {name!r} does not cover the gold document ids")
    return by_id


def compare_parsers(gold_docs: Sequence[Document], runs: Mapping[str, Sequence[Document]],
                    restarts: int = DEFAULT_RESTARTS, *, seed: int,
                    max_vars: int = DEFAULT_MAX_VARS, jobs: int = 1) -> Comparison:
    """Per-document winner against gold, plus the corpus score of always picking the winner."""
    names = tuple(runs)
    by_id = _check_runs(gold_docs, runs)
    tasks = [(k, gold.graph, [by_id[n][gold.id].graph for n in names]) for k, gold in enumerate(gold_docs)]
    results = _map(partial(_score_candidates, restarts=restarts, seed=seed, max_vars=max_vars), tasks, jobs)
    rows = []
    oracle = ZERO
    for gold, scores in zip(gold_docs, results):
        fracs = [_frac(s) for s in scores]
        top = max(fracs)
        winners = [n for n, f in zip(names, fracs) if f == top]
        winner = winners[0] if len(winners) == 1 else "tie"
        rows.append((gold.id, tuple(float(f) for f in fracs), winner))
        oracle = oracle + scores[fracs.index(top)]
    return Comparison(names, tuple(rows), oracle)


@dataclass(frozen=True)
class OracleRow:
    id: str
    chosen: str
    f: float


def oracle_corpus(gold_docs: Sequence[Document], runs: Mapping[str, Sequence[Document]],
                  restarts: int = DEFAULT_RESTARTS, *, seed: int, max_vars: int = DEFAULT_MAX_VARS,
                  jobs: int = 1) -> tuple[list[OracleRow], SmatchScore]:
    """Best candidate per document against gold and the micro score of those picks."""
    names = tuple(runs)
    by_id = _check_runs(gold_docs, runs)
    tasks = [(k, gold.graph, [by_id[n][gold.id].graph for n in names]) for k, gold in enumerate(gold_docs)]
    results = _map(partial(_score_candidates, restarts=restarts, seed=seed, max_vars=max_vars), tasks, jobs)
    rows, total = [], ZERO
    for gold, scores in zip(gold_docs, results):
        fracs = [_frac(s) for s in scores]
        best = _argmax(fracs)
        rows.append(OracleRow(gold.id, names[best], float(fracs[best])))
        total = total + scores[best]
    return rows, total
