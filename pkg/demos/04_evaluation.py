"""Score predictions with Smatch and break the score down by phenomenon."""

from amrseq.evaluate import fine_grained, length_buckets, length_rows_csv
from amrseq.graph import Document, parse_penman
from amrseq.smatch import smatch_exact, smatch_hill

GOLD = [
    ("d1", "cells require binding", "(r / require-01 :ARG0 (c / cell) :ARG1 (b / bind-01 :polarity -))"),
    ("d2", "Crk", '(p / protein :wiki "Q1" :name (n / name :op1 "Crk"))'),
    ("d3", "induced cell migration", "(m / migrate-01 :ARG0 (c / cell) :ARG1-of (i / induce-01 :ARG0 c))"),
]
TEST = [
    ("d1", "cells require binding", "(r / require-02 :ARG0 (c / cell) :ARG2 (b / bind-01))"),
    ("d2", "Crk", '(p / protein :name (n / name :op1 "Crk"))'),
    ("d3", "induced cell migration", "(m / migrate-01 :ARG0 (c / cell) :ARG1-of (i / induce-01 :ARG2 (c2 / cell)))"),
]


def docs(rows):
    return [Document(i, s, parse_penman(p)) for i, s, p in rows]


def main():
    gold, test = docs(GOLD), docs(TEST)

    g, t = gold[2].graph, test[2].graph
    exact = smatch_exact(g, t)
    hill = smatch_hill(g, t, restarts=4, seed=0)
    print(f"d3 exact: {exact.matched}/{exact.gold_total}/{exact.test_total} F {exact.f:.4f}")
    print(f"d3 hill:  {hill.matched}/{hill.gold_total}/{hill.test_total} F {hill.f:.4f}\n")

    report = fine_grained(gold, test, seed=1)
    print(report.to_csv(), end="")
    if report.empty:
        print("no gold or test items for:", ", ".join(sorted(report.empty)))

    print("\nCumulative score by sentence length:")
    print(length_rows_csv(length_buckets(gold, test, [1, 2, 3], seed=1)), end="")


if __name__ == "__main__":
    main()
