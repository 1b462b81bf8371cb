"""Character-level AMR parsing toolkit: graph I/O, tree codec, augmentation,
post-processing, Smatch evaluation and ensemble selection."""

from .augment import augment_corpus, best_ordering, enumerate_orderings, order_score, parse_alignments
from .codec import (
    SeqTree,
    TokenSeq,
    TrainerConfig,
    Vocab,
    anonymize,
    build_vocab,
    decode,
    encode,
    pos_annotate,
    restore,
    text_to_tree,
    tree_to_text,
)
from .ensemble import CandidateSet, compare_parsers, oracle_select, select
from .errors import AmrError, ParseError
from .evaluate import FineGrainedReport, fine_grained, length_buckets
from .graph import (
    AmrGraph,
    Document,
    TripleSet,
    parse_penman,
    read_corpus,
    serialize_penman,
    to_triples,
    validate,
)
from .postprocess import WikiTable, build_wiki_table, default_amr, prune, repair, wikify
from .smatch import SmatchScore, corpus_smatch, smatch_exact, smatch_hill

__version__ = "0.1.0"

__all__ = [
    "augment_corpus",
    "best_ordering",
    "enumerate_orderings",
    "order_score",
    "parse_alignments",
    "SeqTree",
    "TokenSeq",
    "TrainerConfig",
    "Vocab",
    "anonymize",
    "build_vocab",
    "decode",
    "encode",
    "pos_annotate",
    "restore",
    "text_to_tree",
    "tree_to_text",
    "CandidateSet",
    "compare_parsers",
    "oracle_select",
    "select",
    "AmrError",
    "ParseError",
    "FineGrainedReport",
    "fine_grained",
    "length_buckets",
    "AmrGraph",
    "Document",
    "TripleSet",
    "parse_penman",
    "read_corpus",
    "serialize_penman",
    "to_triples",
    "validate",
    "WikiTable",
    "build_wiki_table",
    "default_amr",
    "prune",
    "repair",
    "wikify",
    "SmatchScore",
    "corpus_smatch",
    "smatch_exact",
    "smatch_hill",
]
