"""Shared sample data for the demo scripts."""

from amrseq.graph import parse_penman

CELL_MIGRATION = parse_penman(
    '(r / require-01 :ARG0 (i / induce-01 :ARG1 (c / cell) :ARG2 (m / migrate-01 :ARG0 c)) '
    ':ARG1 (b / bind-01 :ARG1 (p / protein :name (n / name :op1 "Crk")) '
    ':ARG2 (p2 / protein :name (n2 / name :op1 "CAS"))))'
)
SENTENCE = "Crk binding to CAS is required for the induction of cell migration"
# token-span|tree-path pairs; the path "r" is the root
ALIGNMENT = "5-5|r 8-8|0 10-10|0.0 11-11|0.1 10-10|0.1.0 1-1|1 0-0|1.0.0.0 3-3|1.1.0.0"
