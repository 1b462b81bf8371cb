"""Reorder sibling edges to follow the sentence, then enumerate all orderings."""

from amrseq.augment import best_ordering, enumerate_orderings, order_score, parse_alignments
from amrseq.codec import anonymize, tree_to_text

from common import ALIGNMENT, CELL_MIGRATION, SENTENCE


def main():
    tree = anonymize(CELL_MIGRATION)
    alignment = parse_alignments(ALIGNMENT, tree, n_tokens=len(SENTENCE.split()))
    print("Sentence:", SENTENCE)
    print("Original order:", tree_to_text(tree))
    print(f"  score {float(order_score(tree, alignment)):.3f}")

    best = best_ordering(tree, alignment)
    print("Best order:    ", tree_to_text(best))
    print(f"  score {float(order_score(best, alignment)):.3f}; Crk/CAS now come first, as in the sentence")

    every = enumerate_orderings(tree)
    print(f"\n{len(every)} sibling orderings in total; each is a valid training target")
    for k, variant in enumerate(every[:3]):
        print(f"  {k}: {tree_to_text(variant)[:80]}...")


if __name__ == "__main__":
    main()
