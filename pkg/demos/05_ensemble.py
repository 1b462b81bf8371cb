"""Pick, per sentence, the candidate parse that agrees most with the others."""

import random

from amrseq.ensemble import CandidateSet, compare_parsers, oracle_corpus, select
from amrseq.graph import Document, serialize_penman
from amrseq.smatch import corpus_smatch
from amrseq.synth import perturb, random_graph


def main():
    rng = random.Random(7)
    golds = [random_graph(rng, 6) for _ in range(20)]
    gold = [Document(f"d{k}", "", g) for k, g in enumerate(golds)]
    # three noisy "parsers", each damaging a different subset of the gold graphs
    runs = {name: [Document(d.id, "", perturb(d.graph, rng, 2)) for d in gold] for name in ("a", "b", "c")}

    first = CandidateSet("d0", tuple((name, docs[0].graph) for name, docs in runs.items()))
    sel = select(first, seed=0)
    print("d0 pairwise agreement:")
    for row in sel.matrix:
        print("  " + " ".join(f"{float(x):.3f}" for x in row))
    print(f"chosen: {first.candidates[sel.index][0]}")
    print(serialize_penman(sel.graph, indent=False), "\n")

    for name, docs in runs.items():
        score = corpus_smatch([(g.graph, d.graph) for g, d in zip(gold, docs)], seed=0)
        print(f"parser {name}: F {score.f:.4f}")

    chosen = [select(CandidateSet(g.id, tuple((n, runs[n][k].graph) for n in runs)), seed=0).graph
              for k, g in enumerate(gold)]
    score = corpus_smatch([(g.graph, c) for g, c in zip(gold, chosen)], seed=0)
    print(f"ensemble: F {score.f:.4f}")
    _, best = oracle_corpus(gold, runs, seed=0)
    print(f"oracle:   F {best.f:.4f} (upper bound when the gold graph picks)")

    wins = compare_parsers(gold, runs, seed=0).wins
    print("\nper-sentence wins:", dict(sorted(wins.items())))


if __name__ == "__main__":
    main()
