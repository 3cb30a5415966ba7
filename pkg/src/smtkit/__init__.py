"""Preprocessing, alignment and evaluation tools for phrase-based SMT."""

__version__ = "0.1.0"

from .exceptions import *  # noqa: E402,F401,F403
from .corpus import (  # noqa: E402
    FilterPolicy,
    PairFilter,
    ParallelCorpus,
    SentencePair,
    TextNormalizer,
    Tokenizer,
    filter_pairs,
    normalize_text,
    split_corpus,
    tokenize,
)
from .morph import SuffixSplitter, SuffixTable, Stemmer, StemRuleTable, rejoin, suffix_split  # noqa: E402
from .reorder import Reorderer, RuleSet, apply_rules, parse_bracketed  # noqa: E402
from .lm import KneserNeyLM, NGramModel, estimate_mkn, count_ngrams  # noqa: E402
from .align import Model1Aligner, train_model1, viterbi_align  # noqa: E402
from .translit import Transliterator, generate_candidates, replace_oovs, train_char_model  # noqa: E402
from .metrics import bleu, cder, per, report, ter  # noqa: E402
