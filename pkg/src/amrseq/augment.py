"""Branch reordering by word order, and corpus doubling.

An alignment maps tree paths (child indices from the root, ``"0.1"``) to
inclusive token spans of the whitespace-tokenized sentence.  The order
score of a tree is one minus the normalized Kendall tau distance between
the aligned start tokens read in pre-order and the same tokens sorted.
"""

from __future__ import annotations

import bisect
import os
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Sequence

from .codec import SeqTree, anonymize_with_provenance
from .errors import BadPath, BadSpan
from .graph import AmrGraph, Document

Path = tuple[int, ...]
Span = tuple[int, int]
Alignment = dict[Path, Span]

# exact sibling ordering is searched up to this many aligned siblings
EXACT_SIBLING_LIMIT = 10


def format_path(path: Path) -> str:
    return ".".join(map(str, path))


def _parse_path(text: str) -> Path:
    if text in ("", "r"):
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise BadPath(f"malformed path {text!r}") from None


def _path_exists(tree: SeqTree, path: Path) -> bool:
    node = tree
    for i in path:
        if not 0 <= i < len(node.children):
            return False
        node = node.children[i][1]
    return True


def parse_alignments(text: str, tree: SeqTree, n_tokens: int | None = None) -> Alignment:
    """Parse ``start-end|path[+path...]`` items separated by spaces.

    The root is written as an empty path (``3-3|``) or ``r``.
    """
    alignment: Alignment = {}
    for item in text.split():
        span_text, sep, paths_text = item.partition("|")
        if not sep:
            raise BadSpan(f"item {item!r} has no '|'")
        start_text, dash, end_text = span_text.partition("-")
        try:
            start = int(start_text)
            end = int(end_text) if dash else start
        except ValueError:
            raise BadSpan(f"malformed span {span_text!r}") from None
        if start < 0 or start > end or (n_tokens is not None and end >= n_tokens):
            raise BadSpan(f"span {start}-{end} out of bounds")
        for path_text in paths_text.split("+"):
            path = _parse_path(path_text)
            if not _path_exists(tree, path):
                raise BadPath(f"path {path_text!r} does not exist in the tree")
            old = alignment.get(path, (start, end))
            alignment[path] = (min(start, old[0]), max(end, old[1]))
    return alignment


def format_alignments(alignment: Mapping[Path, Span]) -> str:
    return " ".join(f"{s}-{e}|{format_path(p) or 'r'}" for p, (s, e) in sorted(alignment.items()))


def read_alignment_lines(path_or_file) -> Iterator[str]:
    """One line per document; ``#`` comment lines are skipped."""
    fh = path_or_file if hasattr(path_or_file, "read") else open(os.fspath(path_or_file), encoding="utf-8")
    try:
        for line in fh:
            if line.lstrip().startswith("#"):
                continue
            yield line.rstrip("\n")
    finally:
        if fh is not path_or_file:
            fh.close()


# ---------------------------------------------------------------------------
# scoring


def _inversions(seq: Sequence[int]) -> int:
    seen: list[int] = []
    count = 0
    for x in seq:
        count += len(seen) - bisect.bisect_right(seen, x)
        bisect.insort(seen, x)
    return count


def aligned_starts(tree: SeqTree, alignment: Mapping[Path, Span]) -> list[int]:
    return [alignment[path][0] for path, _ in tree.preorder() if path in alignment]


def order_score(tree: SeqTree, alignment: Mapping[Path, Span]) -> Fraction:
    seq = aligned_starts(tree, alignment)
    n = len(seq)
    if n <= 1:
        return Fraction(1)
    return 1 - Fraction(_inversions(seq), n * (n - 1) // 2)


# ---------------------------------------------------------------------------
# orderings

Orders = dict[Path, tuple[int, ...]]


def apply_orders(tree: SeqTree, orders: Mapping[Path, tuple[int, ...]], path: Path = ()) -> SeqTree:
    if not tree.children:
        return tree
    order = orders.get(path, range(len(tree.children)))
    children = []
    for i in order:
        rel, child = tree.children[i]
        children.append((rel, apply_orders(child, orders, path + (i,))))
    return SeqTree(tree.label, tuple(children), tree.kind)


def _moved_path(orders: Mapping[Path, tuple[int, ...]], path: Path) -> Path:
    new = []
    for depth, i in enumerate(path):
        order = orders.get(path[:depth])
        new.append(order.index(i) if order is not None else i)
    return tuple(new)


def _move_alignment(alignment: Mapping[Path, Span], orders) -> Alignment:
    return {_moved_path(orders, p): span for p, span in alignment.items()}


def _order_choices(tree: SeqTree) -> Iterator[Orders]:
    paths = [p for p, node in tree.preorder() if len(node.children) > 1]

    def product(idx: int):
        if idx == len(paths):
            yield {}
            return
        for perm in permutations(range(len(tree.subtree(paths[idx]).children))):
            for rest in product(idx + 1):
                yield {paths[idx]: perm, **rest}

    yield from product(0)


def aligned_orderings(tree: SeqTree, alignment: Mapping[Path, Span],
                      cap: int | None = None) -> list[tuple[SeqTree, Alignment]]:
    """Like :func:`enumerate_orderings`, carrying the alignment along."""
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")
    out = []
    seen = set()
    for orders in _order_choices(tree):
        reordered = apply_orders(tree, orders)
        moved = _move_alignment(alignment, orders)
        key = (reordered, frozenset(moved.items()))
        if key in seen:
            continue
        seen.add(key)
        out.append((reordered, moved))
        if cap is not None and len(out) >= cap:
            break
    return out


def enumerate_orderings(tree: SeqTree, cap: int | None = None) -> list[SeqTree]:
    """Distinct sibling reorderings in lexicographic permutation order.

    Nodes are permuted in pre-order, the first node varying slowest, so the
    input tree always comes first.  ``cap=None`` means no limit.
    """
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")
    out = []
    seen = set()
    for orders in _order_choices(tree):
        reordered = apply_orders(tree, orders)
        if reordered in seen:
            continue
        seen.add(reordered)
        out.append(reordered)
        if cap is not None and len(out) >= cap:
            break
    return out


def _subtree_starts(tree: SeqTree, alignment: Mapping[Path, Span]) -> dict[Path, list[int]]:
    starts: dict[Path, list[int]] = {}

    def collect(node: SeqTree, path: Path) -> list[int]:
        acc = [alignment[path][0]] if path in alignment else []
        for i, (_, child) in enumerate(node.children):
            acc.extend(collect(child, path + (i,)))
        acc.sort()
        starts[path] = acc
        return acc

    collect(tree, ())
    return starts


def _cross_inversions(a: list[int], b: list[int]) -> int:
    """Inversions contributed by placing sorted ``a`` before sorted ``b``."""
    return sum(bisect.bisect_left(b, x) for x in a)


def _sibling_order(groups: list[list[int]]) -> tuple[int, ...]:
    """Order sibling indices so that cross-sibling inversions are minimal."""
    aligned = [i for i, g in enumerate(groups) if g]
    unaligned = [i for i, g in enumerate(groups) if not g]
    if len(aligned) <= 1:
        return tuple(aligned + unaligned)
    by_key = sorted(aligned, key=lambda i: (groups[i][0], tuple(groups[i])))
    if len(aligned) > EXACT_SIBLING_LIMIT:
        return tuple(by_key + unaligned)

    k = len(aligned)
    cost = [[_cross_inversions(groups[a], groups[b]) for b in aligned] for a in aligned]
    pos = {c: x for x, c in enumerate(aligned)}

    def total(order):
        idx = [pos[c] for c in order]
        return sum(cost[idx[x]][idx[y]] for x in range(k) for y in range(x + 1, k))

    full = (1 << k) - 1
    # best[mask]: cheapest arrangement of the members outside ``mask``
    best = [0] * (full + 1)
    for mask in range(full - 1, -1, -1):
        rest = [y for y in range(k) if not mask >> y & 1]
        best[mask] = min(sum(cost[e][y] for y in rest if y != e) + best[mask | 1 << e] for e in rest)

    if total(by_key) == best[0]:
        return tuple(by_key + unaligned)
    if total(aligned) == best[0]:
        return tuple(aligned + unaligned)
    order = []
    mask = 0
    while mask != full:
        rest = [y for y in range(k) if not mask >> y & 1]
        for c in by_key:
            e = pos[c]
            if mask >> e & 1:
                continue
            if sum(cost[e][y] for y in rest if y != e) + best[mask | 1 << e] == best[mask]:
                order.append(c)
                mask |= 1 << e
                break
    return tuple(order + unaligned)


def best_orders(tree: SeqTree, alignment: Mapping[Path, Span]) -> Orders:
    """Per-node child order maximizing :func:`order_score`.

    Inversions between different sibling subtrees depend only on the order
    of those siblings, so each node is solved on its own.  Siblings with
    no aligned descendant go last, keeping their relative order; a node
    that is already optimal is left alone, which makes the result
    idempotent.
    """
    starts = _subtree_starts(tree, alignment)
    orders: Orders = {}
    for path, node in tree.preorder():
        if len(node.children) > 1:
            groups = [starts[path + (i,)] for i in range(len(node.children))]
            order = _sibling_order(groups)
            if order != tuple(range(len(order))):
                orders[path] = order
    return orders


def best_ordering_aligned(tree: SeqTree, alignment: Mapping[Path, Span]) -> tuple[SeqTree, Alignment]:
    orders = best_orders(tree, alignment)
    return apply_orders(tree, orders), _move_alignment(alignment, orders)


def best_ordering(tree: SeqTree, alignment: Mapping[Path, Span]) -> SeqTree:
    return apply_orders(tree, best_orders(tree, alignment))


# ---------------------------------------------------------------------------
# corpus


def reorder_graph(graph: AmrGraph, alignment: Mapping[Path, Span]) -> AmrGraph:
    """Reorder stored edges so the graph serializes in best word order.

    ``alignment`` refers to ``anonymize(graph)``.  Edges left out of the
    tree (``:wiki``) stay just before their source's first other edge.
    """
    tree, provenance = anonymize_with_provenance(graph)
    orders = best_orders(tree, alignment)
    emitted: list[int] = []

    def visit(node: SeqTree, path: Path):
        order = orders.get(path, range(len(node.children)))
        for i in order:
            emitted.append(provenance[path + (i,)])
            visit(node.children[i][1], path + (i,))

    visit(tree, ())
    used = set(emitted)
    edges = [graph.edges[i] for i in emitted]
    for i, edge in enumerate(graph.edges):
        if i in used:
            continue
        at = next((k for k, e in enumerate(edges) if e[0] == edge[0]), len(edges))
        edges.insert(at, edge)
    return graph.with_edges(edges)


def augment_corpus(docs: Iterable[tuple[Document, Mapping[Path, Span]]],
                   suffix: str = ".best") -> list[Document]:
    """Originals followed by one best-word-order copy of each document.

    The copy is emitted even when its order equals the original's.
    """
    docs = list(docs)
    extra = [doc.with_graph(reorder_graph(doc.graph, alignment), id=doc.id + suffix)
             for doc, alignment in docs]
    return [doc for doc, _ in docs] + extra
