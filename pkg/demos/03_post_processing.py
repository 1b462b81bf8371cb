"""Clean up raw decoder output: repair brackets, prune duplicates, add wiki links."""

from amrseq.codec import restore, text_to_tree, tree_to_text
from amrseq.errors import Unrepairable
from amrseq.graph import parse_penman, serialize_penman
from amrseq.postprocess import build_wiki_table, prune, repair, repair_or_default, wikify


def main():
    raw = [
        '(bind-01 :ARG1 (protein :name (name :op1 "Crk',  # cut off inside a string
        "(dance-01 :mod (slow) :mod (slow)))",          # surplus bracket, duplicate edge
        "(require-01 :ARG0",                            # unfinished edge
        "",                                              # nothing usable
    ]
    for text in raw:
        print(f"raw:      {text!r}")
        try:
            print(f"repaired: {repair(text)}")
        except Unrepairable:
            tree, _ = repair_or_default(text)
            print(f"fallback: {tree_to_text(tree)}")
        print()

    duplicated = text_to_tree(repair("(dance-01 :mod (slow) :mod (slow)))"))
    print("pruned:  ", tree_to_text(prune(duplicated)))

    # a name linked in 69 of 86 gold occurrences clears the 0.5 threshold
    linked = parse_penman('(m / molecule :wiki "DNA" :name (n / name :op1 "DNA"))')
    plain = parse_penman('(m / molecule :name (n / name :op1 "DNA"))')
    table = build_wiki_table([linked] * 69 + [plain] * 17)
    predicted = restore('(molecule :name (name :op1 "DNA"))')
    print("\nwikified:", serialize_penman(wikify(predicted, table), indent=False))


if __name__ == "__main__":
    main()
