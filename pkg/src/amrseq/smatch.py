"""Smatch: triple overlap under the best injective variable mapping.

Two scorers share one triple-matching core:

* :func:`smatch_hill` -- restarted steepest-ascent hill climbing, the usual
  approximation;
* :func:`smatch_exact` -- branch and bound over every injective mapping,
  used as an oracle for small graphs.

The top triple is stored as ``(root, "TOP", root concept)`` so it only
matches when the test root maps to the gold root and both carry the same
concept.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import LengthMismatch, TooLarge
from .graph import AmrGraph, TripleSet, to_triples

DEFAULT_RESTARTS = 4
DEFAULT_MAX_VARS = 8


@dataclass(frozen=True)
class SmatchScore:
    matched: int
    gold_total: int
    test_total: int

    @property
    def precision(self) -> float:
        return self.matched / self.test_total if self.test_total else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.gold_total if self.gold_total else 0.0

    @property
    def f(self) -> float:
        # equal to 2PR/(P+R), computed without the intermediate rounding
        if not self.matched:
            return 0.0
        return 2 * self.matched / (self.gold_total + self.test_total)

    def __add__(self, other: "SmatchScore") -> "SmatchScore":
        return SmatchScore(self.matched + other.matched,
                           self.gold_total + other.gold_total,
                           self.test_total + other.test_total)

    def as_dict(self) -> dict:
        return {"matched": self.matched, "gold_total": self.gold_total,
                "test_total": self.test_total, "precision": self.precision,
                "recall": self.recall, "f": self.f}


ZERO = SmatchScore(0, 0, 0)


def _as_triples(x: AmrGraph | TripleSet) -> TripleSet:
    return x if isinstance(x, TripleSet) else to_triples(x)


class Matcher:
    """Precomputed match tables for mapping ``left`` variables onto ``right``.

    ``mapping[i]`` is an index into ``right_vars`` or -1 for unmapped.
    """

    def __init__(self, left: TripleSet, right: TripleSet):
        self.left_vars = left.variables()
        self.right_vars = right.variables()
        self.left_total = len(left)
        self.right_total = len(right)
        li = {v: i for i, v in enumerate(self.left_vars)}
        ri = {v: j for j, v in enumerate(self.right_vars)}
        n, m = len(self.left_vars), len(self.right_vars)
        self.n, self.m = n, m

        right_unary: dict[tuple[str, str], list[tuple[int, int]]] = defaultdict(list)
        for (v, label, value), c in Counter(right.unary()).items():
            right_unary[label, value].append((ri[v], c))
        self.unary = [[0] * m for _ in range(n)]
        for (v, label, value), c in Counter(left.unary()).items():
            for j, cr in right_unary.get((label, value), ()):
                self.unary[li[v]][j] += min(c, cr)

        left_pairs: dict[tuple[int, int], Counter] = defaultdict(Counter)
        for a, label, b in left.binary():
            left_pairs[li[a], li[b]][label] += 1
        right_pairs: dict[tuple[int, int], Counter] = defaultdict(Counter)
        for a, label, b in right.binary():
            right_pairs[ri[a], ri[b]][label] += 1
        by_label: dict[str, list[tuple[tuple[int, int], int]]] = defaultdict(list)
        for key, counts in right_pairs.items():
            for label, c in counts.items():
                by_label[label].append((key, c))

        # pair_table[(i1, i2)][(j1, j2)] = matched relation triples
        self.pair_table: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
        self.left_pairs = dict(left_pairs)
        for key, counts in left_pairs.items():
            table: dict[tuple[int, int], int] = defaultdict(int)
            for label, c in counts.items():
                for rkey, cr in by_label.get(label, ()):
                    table[rkey] += min(c, cr)
            self.pair_table[key] = dict(table)
        self.pairs_of: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for key in self.pair_table:
            self.pairs_of[key[0]].append(key)
            if key[1] != key[0]:
                self.pairs_of[key[1]].append(key)

        # potential[i][j] > 0 iff some triple involving i could match with i -> j
        self.potential = [row[:] for row in self.unary]
        for (i1, i2), table in self.pair_table.items():
            for (j1, j2), c in table.items():
                self.potential[i1][j1] += c
                if i2 != i1:
                    self.potential[i2][j2] += c

    # -- scoring ---------------------------------------------------------

    def _pair(self, key: tuple[int, int], mapping: Sequence[int]) -> int:
        j1, j2 = mapping[key[0]], mapping[key[1]]
        if j1 < 0 or j2 < 0:
            return 0
        return self.pair_table[key].get((j1, j2), 0)

    def score(self, mapping: Sequence[int]) -> int:
        total = 0
        for i, j in enumerate(mapping):
            if j >= 0:
                total += self.unary[i][j]
        for key in self.pair_table:
            total += self._pair(key, mapping)
        return total

    def _local(self, vars_: Iterable[int], mapping: Sequence[int]) -> int:
        keys = set()
        total = 0
        for i in vars_:
            j = mapping[i]
            if j >= 0:
                total += self.unary[i][j]
            keys.update(self.pairs_of[i])
        for key in keys:
            total += self._pair(key, mapping)
        return total

    # -- hill climbing ---------------------------------------------------

    def greedy_mapping(self) -> list[int]:
        mapping = [-1] * self.n
        used = set()
        for i in range(self.n):
            best, best_j = 0, -1
            for j in range(self.m):
                if j not in used and self.unary[i][j] > best:
                    best, best_j = self.unary[i][j], j
            if best_j >= 0:
                mapping[i] = best_j
                used.add(best_j)
        return mapping

    def random_mapping(self, rng: random.Random) -> list[int]:
        mapping = [-1] * self.n
        order = list(range(self.n))
        rng.shuffle(order)
        free = set(range(self.m))
        for i in order:
            candidates = sorted(j for j in free if self.potential[i][j] > 0)
            if candidates:
                j = rng.choice(candidates)
                mapping[i] = j
                free.discard(j)
        return mapping

    def climb(self, mapping: list[int]) -> tuple[int, list[int]]:
        """Steepest ascent over reassign and swap moves."""
        mapping = list(mapping)
        current = self.score(mapping)
        while True:
            used = {j for j in mapping if j >= 0}
            best_delta, best_move = 0, None
            for i in range(self.n):
                old = mapping[i]
                base = self._local((i,), mapping)
                for j in [-1, *range(self.m)]:
                    if j == old or (j >= 0 and j in used):
                        continue
                    mapping[i] = j
                    delta = self._local((i,), mapping) - base
                    if delta > best_delta:
                        best_delta, best_move = delta, ("set", i, j)
                mapping[i] = old
            for i in range(self.n):
                for k in range(i + 1, self.n):
                    if mapping[i] == mapping[k]:
                        continue
                    base = self._local((i, k), mapping)
                    mapping[i], mapping[k] = mapping[k], mapping[i]
                    delta = self._local((i, k), mapping) - base
                    mapping[i], mapping[k] = mapping[k], mapping[i]
                    if delta > best_delta:
                        best_delta, best_move = delta, ("swap", i, k)
            if best_move is None:
                return current, mapping
            kind, a, b = best_move
            if kind == "set":
                mapping[a] = b
            else:
                mapping[a], mapping[b] = mapping[b], mapping[a]
            current += best_delta

    def hill(self, restarts: int, rng: random.Random) -> tuple[int, list[int]]:
        best, best_map = -1, []
        cap = min(self.left_total, self.right_total)
        for r in range(restarts):
            start = self.greedy_mapping() if r == 0 else self.random_mapping(rng)
            score, mapping = self.climb(start)
            if score > best:
                best, best_map = score, mapping
            if best >= cap:
                break
        return max(best, 0), best_map

    # -- exact -------------------------------------------------------------

    def exact(self) -> tuple[int, list[int]]:
        """Maximum matched count by branch and bound over injective mappings."""
        n, m = self.n, self.m
        order = sorted(range(n), key=lambda i: (-max(self.potential[i], default=0), i))
        pos = {i: p for p, i in enumerate(order)}
        closed_by: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for key in self.pair_table:
            closer = max(key, key=lambda v: pos[v])
            closed_by[closer].append(key)

        # optimistic gain of each variable, counting every pair key once
        opt = []
        for i in range(n):
            best = 0
            for j in range(m):
                gain = self.unary[i][j]
                for key in closed_by[i]:
                    table = self.pair_table[key]
                    if key[0] == key[1]:
                        gain += table.get((j, j), 0)
                    elif key[0] == i:
                        gain += max((c for (a, _), c in table.items() if a == j), default=0)
                    else:
                        gain += max((c for (_, b), c in table.items() if b == j), default=0)
                best = max(best, gain)
            opt.append(best)
        suffix = [0] * (n + 1)
        for p in range(n - 1, -1, -1):
            suffix[p] = suffix[p + 1] + opt[order[p]]
        candidates = [sorted((j for j in range(m) if self.potential[i][j] > 0),
                             key=lambda j, i=i: (-self.potential[i][j], j))
                      for i in range(n)]

        cap = min(self.left_total, self.right_total)
        mapping = [-1] * n
        used = [False] * m
        best = [-1, [-1] * n]

        class Done(Exception):
            pass

        def search(p: int, current: int):
            if current + suffix[p] <= best[0]:
                return
            if p == n:
                best[0], best[1] = current, mapping[:]
                if current >= cap:
                    raise Done
                return
            i = order[p]
            for j in candidates[i]:
                if used[j]:
                    continue
                mapping[i] = j
                used[j] = True
                gain = self.unary[i][j]
                for key in closed_by[i]:
                    gain += self._pair(key, mapping)
                search(p + 1, current + gain)
                used[j] = False
                mapping[i] = -1
            search(p + 1, current)

        try:
            search(0, 0)
        except Done:
            pass
        return max(best[0], 0), best[1]


def smatch_exact(gold: AmrGraph | TripleSet, test: AmrGraph | TripleSet,
                 max_vars: int = DEFAULT_MAX_VARS) -> SmatchScore:
    """Optimal Smatch by exhaustive search; raises TooLarge beyond ``max_vars``."""
    g, t = _as_triples(gold), _as_triples(test)
    ng, nt = len(g.variables()), len(t.variables())
    if min(ng, nt) > max_vars:
        raise TooLarge(f"both graphs exceed {max_vars} variables ({ng} gold, {nt} test)")
    # the optimum is symmetric; branch over the smaller side
    matcher = Matcher(t, g) if nt <= ng else Matcher(g, t)
    matched, _ = matcher.exact()
    return SmatchScore(matched, len(g), len(t))


def pair_rng(seed: int, index: int = 0) -> random.Random:
    return random.Random(f"{seed}/{index}")


def smatch_hill(gold: AmrGraph | TripleSet, test: AmrGraph | TripleSet,
                restarts: int = DEFAULT_RESTARTS, *, seed: int, index: int = 0) -> SmatchScore:
    """Hill-climbing Smatch; restart 0 starts from a greedy concept match.

    ``index`` selects the per-pair random stream used by corpus scoring.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    g, t = _as_triples(gold), _as_triples(test)
    matched, _ = Matcher(t, g).hill(restarts, pair_rng(seed, index))
    return SmatchScore(matched, len(g), len(t))


def fits_exact(*graphs: AmrGraph | TripleSet, max_vars: int = DEFAULT_MAX_VARS) -> bool:
    return all(len(_as_triples(x).variables()) <= max_vars for x in graphs)


def smatch_auto(gold: AmrGraph | TripleSet, test: AmrGraph | TripleSet,
                restarts: int = DEFAULT_RESTARTS, *, seed: int, index: int = 0,
                max_vars: int = DEFAULT_MAX_VARS) -> SmatchScore:
    """Exact score when both graphs fit ``max_vars``, hill climbing otherwise."""
    if fits_exact(gold, test, max_vars=max_vars):
        return smatch_exact(gold, test, max_vars)
    return smatch_hill(gold, test, restarts, seed=seed, index=index)


def _run(task) -> SmatchScore:
    mode, index, gold, test, restarts, seed = task
    if mode == "auto":
        return smatch_auto(gold, test, restarts, seed=seed, index=index)
    return smatch_hill(gold, test, restarts, seed=seed, index=index)


def map_pairs(pairs: Sequence[tuple], restarts: int, seed: int, jobs: int = 1,
              indices: Sequence[int] | None = None, mode: str = "hill") -> list[SmatchScore]:
    """Score every ``(gold, test)`` pair, in input order, optionally in parallel.

    Pair ``k`` draws its random restarts from ``(seed, indices[k])`` so the
    result does not depend on ``jobs``.
    """
    if indices is None:
        indices = range(len(pairs))
    tasks = [(mode, k, g, t, restarts, seed) for k, (g, t) in zip(indices, pairs)]
    if jobs <= 1 or len(tasks) < 2:
        return [_run(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def corpus_smatch(pairs: Sequence[tuple], restarts: int = DEFAULT_RESTARTS, *, seed: int,
                  jobs: int = 1) -> SmatchScore:
    """Micro-averaged Smatch: counts are summed before P/R/F are taken."""
    pairs = list(pairs)
    for pair in pairs:
        if len(pair) != 2:
            raise LengthMismatch("every item must be a (gold, test) pair")
    return sum(map_pairs(pairs, restarts, seed, jobs), ZERO)


def score_lists(gold: Sequence, test: Sequence, restarts: int = DEFAULT_RESTARTS, *, seed: int,
                jobs: int = 1) -> SmatchScore:
    if len(gold) != len(test):
        raise LengthMismatch(f"{len(gold)} gold graphs but {len(test)} test graphs")
    return corpus_smatch(list(zip(gold, test)), restarts, seed=seed, jobs=jobs)
