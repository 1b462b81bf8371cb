"""Random graphs, trees and corrupted strings for property tests and demos."""

from __future__ import annotations

import random

from .codec import CONST, NODE, REF, SeqTree
from .graph import AmrGraph, fresh_variable

CONCEPTS = ("cell", "bind-01", "protein", "name", "require-01", "induce-01",
            "migrate-01", "dog", "chase-01", "and", "person", "small")
RELATIONS = ("ARG0", "ARG1", "ARG2", "mod", "name", "op1", "location", "ARG1-of")
CONSTANTS = ('"Crk"', '"CAS"', "-", "+", "5", "imperative")
ATTRIBUTES = ("polarity", "op1", "quant", "mode")


def random_graph(rng: random.Random, max_nodes: int = 8, *, min_nodes: int = 1,
                 concepts=CONCEPTS, reentrancy: float = 0.5, attribute: float = 0.4,
                 inverse: float = 0.15) -> AmrGraph:
    """Connected graph: a random tree plus extra re-entrant and attribute edges.

    With probability ``inverse`` a tree edge is stored child-to-parent, so
    the writer has to enter that child through an inverted relation.
    """
    n = rng.randint(min_nodes, max_nodes)
    nodes: dict[str, str] = {}
    order = []
    for _ in range(n):
        concept = rng.choice(concepts)
        var = fresh_variable(concept, nodes)
        nodes[var] = concept
        order.append(var)
    edges = []
    for k in range(1, n):
        parent = order[rng.randrange(k)]
        rel = rng.choice(RELATIONS)
        if rng.random() < inverse:
            edges.append((order[k], rel, parent))
        else:
            edges.append((parent, rel, order[k]))
    while n > 1 and rng.random() < reentrancy:
        src, tgt = rng.sample(order, 2)
        edges.append((src, rng.choice(RELATIONS), tgt))
    while rng.random() < attribute:
        edges.append((rng.choice(order), rng.choice(ATTRIBUTES), rng.choice(CONSTANTS)))
    rng.shuffle(edges)
    return AmrGraph(order[0], nodes, edges)


def perturb(graph: AmrGraph, rng: random.Random, edits: int = 2, *, concepts=CONCEPTS) -> AmrGraph:
    """A parser-like near miss: relabel, drop or rewire a few edges and concepts.

    The result is connected and its variables are renamed, so scoring has
    to search for the mapping.
    """
    nodes = dict(graph.nodes)
    edges = list(graph.edges)
    for _ in range(edits):
        roll = rng.random()
        if roll < 0.3:
            var = rng.choice(list(nodes))
            nodes[var] = rng.choice(concepts)
        elif roll < 0.55 and edges:
            k = rng.randrange(len(edges))
            s, _, t = edges[k]
            edges[k] = (s, rng.choice(RELATIONS if t in nodes else ATTRIBUTES), t)
        elif roll < 0.8 and edges:
            k = rng.randrange(len(edges))
            s, r, t = edges.pop(k)
            if t in nodes and not _connected(graph.root, nodes, edges):
                edges.insert(k, (s, r, t))
        else:
            edges.append((rng.choice(list(nodes)), rng.choice(ATTRIBUTES), rng.choice(CONSTANTS)))
    names = list(nodes)
    rng.shuffle(names)
    rename = {old: f"v{k}" for k, old in enumerate(names)}
    return AmrGraph(rename[graph.root], {rename[v]: c for v, c in nodes.items()},
                    [(rename[s], r, rename.get(t, t)) for s, r, t in edges])


def _connected(root: str, nodes, edges) -> bool:
    seen, stack = {root}, [root]
    while stack:
        v = stack.pop()
        for s, _, t in edges:
            for a, b in ((s, t), (t, s)):
                if a == v and b in nodes and b not in seen:
                    seen.add(b)
                    stack.append(b)
    return len(seen) == len(nodes)


def random_tree(rng: random.Random, max_depth: int = 3, max_children: int = 3, *,
                labels=("a", "b", "c", "dance-01", "slow"), relations=("ARG0", "ARG1", "mod"),
                leaf_kinds: bool = True) -> SeqTree:
    """Random tree over a small vocabulary, so duplicate branches are common."""
    label = rng.choice(labels)
    if max_depth == 0:
        return SeqTree(label)
    children = []
    for _ in range(rng.randint(0, max_children)):
        rel = rng.choice(relations)
        roll = rng.random()
        if leaf_kinds and roll < 0.15:
            child = SeqTree(rng.choice(labels), kind=REF)
        elif leaf_kinds and roll < 0.25:
            child = SeqTree(rng.choice(CONSTANTS), kind=CONST)
        else:
            child = random_tree(rng, max_depth - 1, max_children, labels=labels,
                                relations=relations, leaf_kinds=leaf_kinds)
        children.append((rel, child))
    return SeqTree(label, tuple(children), NODE)


def corrupt(text: str, rng: random.Random) -> str:
    """Truncate, delete from or insert into ``text`` the way a decoder might."""
    ops = rng.randint(1, 3)
    for _ in range(ops):
        roll = rng.random()
        if not text:
            break
        if roll < 0.4:
            text = text[:rng.randrange(len(text))]
        elif roll < 0.7:
            i = rng.randrange(len(text))
            text = text[:i] + text[i + 1:]
        else:
            i = rng.randrange(len(text) + 1)
            text = text[:i] + rng.choice(["(", ")", '"', " :ARG0", " :mod ", "))", " x"]) + text[i:]
    return text
