"""Command-line interface: ``smtkit <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 bad input data,
3 internal invariant violation.
"""

import argparse
import json
import logging
import sys

from . import __version__
from .align import compare_factored, format_factor_report, train_model1, TTable, to_pharaoh, viterbi_align
from .corpus import (
    FilterPolicy,
    compute_stats,
    filter_pairs,
    format_stats,
    normalize_text,
    read_lines,
    read_parallel,
    read_sentences,
    split_corpus,
    tokenize,
    write_lines,
    write_parallel,
    write_sentences,
)
from .exceptions import ConfigError, DataError, SmtkitError
from .lm import NGramModel, count_ngrams, estimate_mkn
from .metrics import report
from .morph import StemRuleTable, SuffixTable, rejoin, split_diagnostics, split_sentence, stem_sentence
from .pipeline import PipelineConfig, run_pipeline
from .reorder import RuleSet, apply_rules, linearize, parse_bracketed
from .translit import CharTransModel, find_oovs, replace_oovs, train_char_model

log = logging.getLogger("smtkit")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _stem_rules(spec):
    if spec in ("english", "hindi"):
        return StemRuleTable.shipped(spec)
    return StemRuleTable.from_file(spec)


# -- commands ----------------------------------------------------------------


def cmd_normalize(args):
    write_lines(args.output, (normalize_text(x, args.script) for x in read_lines(args.input)))


def cmd_tokenize(args):
    lines = read_lines(args.input)
    if not args.no_normalize:
        lines = [normalize_text(x, args.script) for x in lines]
    write_sentences(args.output, (tokenize(x, args.script) for x in lines))


def cmd_filter(args):
    corpus = read_parallel(args.source, args.target)
    kept, removed = filter_pairs(corpus, FilterPolicy(args.max_words, args.max_ratio))
    write_parallel(kept, args.out_source, args.out_target)
    print(f"pairs_in={len(corpus)} pairs_out={len(kept)} removed={len(removed)}")


def cmd_stats(args):
    names = args.names or args.files
    if len(names) != len(args.files):
        raise ConfigError("--names must give one name per file")
    print(format_stats({n: compute_stats(read_sentences(f)) for n, f in zip(names, args.files)}), end="")


def cmd_split(args):
    corpus = read_parallel(args.source, args.target)
    parts = split_corpus(corpus, args.n_dev, args.n_test, seed=args.seed)
    for name, part in zip(("train", "dev", "test"), parts):
        write_parallel(part, f"{args.prefix}.{name}.src", f"{args.prefix}.{name}.tgt")
        print(f"{name}={len(part)}")


def cmd_split_suffix(args):
    table = SuffixTable.from_file(args.table, args.marker)
    sentences = read_sentences(args.input)
    out = []
    for n, s in enumerate(sentences, 1):
        try:
            out.append(split_sentence(s, table))
        except DataError as exc:
            raise DataError(str(exc), line=n, path=args.input) from None
    write_sentences(args.output, out)
    if args.diagnostics:
        print(json.dumps(split_diagnostics(sentences, table), ensure_ascii=False, sort_keys=True))


def cmd_rejoin(args):
    write_sentences(args.output, (rejoin(s, args.marker) for s in read_sentences(args.input)))


def cmd_stem(args):
    rules = _stem_rules(args.rules)
    write_sentences(args.output, (stem_sentence(s, rules) for s in read_sentences(args.input)))


def cmd_reorder(args):
    rules = RuleSet.from_file(args.rules) if args.rules else RuleSet.demo()
    out = []
    for n, line in enumerate(read_lines(args.trees), 1):
        try:
            out.append(linearize(apply_rules(parse_bracketed(line), rules)))
        except DataError as exc:
            raise DataError(str(exc), line=n, path=args.trees) from None
    write_sentences(args.output, out)


def cmd_lm_train(args):
    counts = count_ngrams(read_sentences(args.input), args.order)
    estimate_mkn(counts, closed_vocab=args.closed_vocab).write_arpa(args.output)


def cmd_lm_score(args):
    model = NGramModel.read_arpa(args.model)
    sentences = read_sentences(args.input)
    for s in sentences:
        print(f"{model.score_sentence(s)!r}")
    print(f"perplexity={model.perplexity(sentences)!r}")


def _read_lexicon(path):
    pairs = []
    for n, line in enumerate(read_lines(path), 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 2 or not cols[0] or not cols[1]:
            raise DataError("expected 'source<TAB>target'", line=n, path=path)
        pairs.append((cols[0], cols[1]))
    return pairs


def cmd_translit_train(args):
    model = train_char_model(_read_lexicon(args.lexicon), args.iterations)
    model.save(args.output)


def cmd_translit_apply(args):
    model = CharTransModel.load(args.model)
    lm = NGramModel.read_arpa(args.lm)
    vocab = set(read_lines(args.vocab))
    out = []
    for s in read_sentences(args.input):
        out.append(replace_oovs(s, find_oovs(s, vocab), model, lm, k=args.k) if s else s)
    write_sentences(args.output, out)


def cmd_align_train(args):
    corpus = read_parallel(args.source, args.target)
    t, ll = train_model1(corpus, args.iterations)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(t.to_text())
    for i, v in enumerate(ll, 1):
        print(f"iteration={i} log_likelihood={v!r}")


def cmd_align_viterbi(args):
    corpus = read_parallel(args.source, args.target)
    with open(args.ttable, encoding="utf-8") as fh:
        t = TTable.from_text(fh.read())
    write_lines(args.output, (to_pharaoh(viterbi_align(p, t)) for p in corpus))


def cmd_align_compare(args):
    corpus = read_parallel(args.source, args.target)
    rep = compare_factored(
        corpus,
        _stem_rules(args.stem_src) if args.stem_src else None,
        _stem_rules(args.stem_tgt) if args.stem_tgt else None,
        args.iterations,
    )
    print(format_factor_report(rep), end="")


def cmd_evaluate(args):
    hyps, refs = read_sentences(args.hyp), read_sentences(args.ref)
    if len(hyps) != len(refs):
        raise DataError(f"{len(hyps)} hypotheses but {len(refs)} references", path=args.hyp)
    rep = report(hyps, refs, max_n=args.max_n, smooth=args.smooth, lowercase=args.lowercase, ter_mode=args.ter_mode)
    print(rep.format_table(args.label), end="")
    print(rep.format_keyvalue(), end="")


def cmd_pipeline(args):
    if not args.config:
        raise ConfigError("pipeline needs --config")
    cfg = PipelineConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.marker_set:
        cfg.marker = args.marker
    manifest = run_pipeline(cfg, args.manifest)
    print(f"status={manifest.status} manifest_hash={manifest.hash}")


# -- parser ------------------------------------------------------------------


GLOBAL_DEFAULTS = {"config": None, "seed": None, "marker": None, "order": 5, "k": 100, "verbose": False}


def _global_options(parser):
    parser.add_argument("--config", help="pipeline config file (key = value)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--marker", help="suffix marker (default @@)")
    parser.add_argument("--order", type=int, help="n-gram order (default 5)")
    parser.add_argument("--k", type=int, help="transliteration candidates (default 100)")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    p = _Parser(prog="smtkit", description="SMT preprocessing, alignment and evaluation toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(p)
    p.set_defaults(**GLOBAL_DEFAULTS)
    # the same options are accepted after the command name too; SUPPRESS keeps
    # the subparser from overwriting values given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    _global_options(common)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("normalize", cmd_normalize, "Unicode-normalize raw text")
    sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--script", choices=("latin", "indic"), default="latin")

    sp = add("tokenize", cmd_tokenize, "normalize and tokenize raw text")
    sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--script", choices=("latin", "indic"), default="latin")
    sp.add_argument("--no-normalize", action="store_true", help="skip Unicode normalization")

    sp = add("filter", cmd_filter, "drop over-long and badly length-matched pairs")
    for a in ("source", "target", "out_source", "out_target"):
        sp.add_argument(a)
    sp.add_argument("--max-words", type=int, default=80)
    sp.add_argument("--max-ratio", type=float, default=9.0)

    sp = add("stats", cmd_stats, "corpus statistics table")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--names", nargs="+")

    sp = add("split", cmd_split, "random train/dev/test split")
    sp.add_argument("source"), sp.add_argument("target"), sp.add_argument("prefix")
    sp.add_argument("--n-dev", type=int, default=500)
    sp.add_argument("--n-test", type=int, default=500)

    sp = add("split-suffix", cmd_split_suffix, "separate suffixes from stems")
    sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--table", required=True, help="suffix list, one per line")
    sp.add_argument("--diagnostics", action="store_true", help="print split statistics as JSON")

    sp = add("rejoin", cmd_rejoin, "undo suffix separation")
    sp.add_argument("input"), sp.add_argument("output")

    sp = add("stem", cmd_stem, "emit the stem factor")
    sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--rules", default="english", help="'english', 'hindi' or a suffix list file")

    sp = add("reorder", cmd_reorder, "reorder parse trees and print their leaves")
    sp.add_argument("trees"), sp.add_argument("output")
    sp.add_argument("--rules", help="rule file (default: shipped demo grammar)")

    sp = add("lm-train", cmd_lm_train, "train a modified Kneser-Ney LM to ARPA")
    sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--closed-vocab", action="store_true")

    sp = add("lm-score", cmd_lm_score, "log10 sentence scores and perplexity")
    sp.add_argument("model"), sp.add_argument("input")

    sp = add("translit-train", cmd_translit_train, "train a character translation model")
    sp.add_argument("lexicon", help="TSV of source<TAB>target words")
    sp.add_argument("output")
    sp.add_argument("--iterations", type=int, default=10)

    sp = add("translit-apply", cmd_translit_apply, "transliterate OOV tokens in decoder output")
    sp.add_argument("model"), sp.add_argument("lm"), sp.add_argument("input"), sp.add_argument("output")
    sp.add_argument("--vocab", required=True, help="in-vocabulary words, one per line")

    sp = add("align-train", cmd_align_train, "train IBM Model 1")
    sp.add_argument("source"), sp.add_argument("target"), sp.add_argument("output")
    sp.add_argument("--iterations", type=int, default=5)

    sp = add("align-viterbi", cmd_align_viterbi, "Viterbi alignments in Pharaoh format")
    sp.add_argument("source"), sp.add_argument("target"), sp.add_argument("ttable"), sp.add_argument("output")

    sp = add("align-compare", cmd_align_compare, "surface vs stem alignment diagnostics")
    sp.add_argument("source"), sp.add_argument("target")
    sp.add_argument("--stem-src", default="english")
    sp.add_argument("--stem-tgt", default=None)
    sp.add_argument("--iterations", type=int, default=5)

    sp = add("evaluate", cmd_evaluate, "BLEU, 1-TER, 1-PER and 1-CDER")
    sp.add_argument("hyp"), sp.add_argument("ref")
    sp.add_argument("--label", default="")
    sp.add_argument("--max-n", type=int, default=4)
    sp.add_argument("--smooth", action="store_true")
    sp.add_argument("--lowercase", action="store_true")
    sp.add_argument("--ter-mode", choices=("greedy", "exact"), default="greedy")

    sp = add("pipeline", cmd_pipeline, "run a configured preprocessing pipeline")
    sp.add_argument("--manifest", help="manifest path (default: <output_dir>/manifest.json)")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    args.marker_set = args.marker is not None
    args.marker = args.marker or "@@"
    if args.seed is None and args.command != "pipeline":
        args.seed = 0
    for name in ("order", "k"):
        if getattr(args, name) < 1:
            parser.error(f"--{name} must be >= 1")
    try:
        args.func(args)
    except SmtkitError as exc:
        print(f"smtkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeError) as exc:
        print(f"smtkit: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"smtkit: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
