"""Turn a graph into the variable-free target string and back again."""

import logging

from amrseq.codec import anonymize, build_vocab, decode, encode, restore, tree_to_text
from amrseq.graph import Document, serialize_penman, to_triples
from amrseq.smatch import smatch_exact

from common import CELL_MIGRATION, SENTENCE


def main():
    # a one-sentence vocabulary is far below the usual size; skip that warning
    logging.getLogger("amrseq.codec").setLevel(logging.ERROR)
    print("Penman input:")
    print(serialize_penman(CELL_MIGRATION))
    print(f"{len(to_triples(CELL_MIGRATION))} triples\n")

    tree = anonymize(CELL_MIGRATION)
    text = tree_to_text(tree)
    print("Target string (variables removed, re-entrancy written as a bare concept):")
    print(text, "\n")

    vocab = build_vocab([Document("demo", SENTENCE, CELL_MIGRATION)])
    seq = encode(text, vocab)
    print(f"{len(seq.ids)} symbols from a vocabulary of {len(vocab)}; relations are single symbols")
    assert decode(seq, vocab) == text

    back = restore(text)
    print("\nRestored graph:")
    print(serialize_penman(back))
    score = smatch_exact(CELL_MIGRATION, back, max_vars=12)
    print(f"Smatch against the input: {score.f:.4f}")


if __name__ == "__main__":
    main()
