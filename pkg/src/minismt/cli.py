"""Command-line interface: one subcommand per pipeline operation.

Filter-style commands (tokenize, detokenize, query-lm, decode, nbest) read
one sentence per line from stdin or a file and write to stdout. Failures
exit nonzero after printing a single machine-parsable line of the form
``ERROR <category>: <message>`` to stderr.
"""

import argparse
import sys

from . import align, artok, bleu, corpus, lm, mert, phrases, pipeline
from .decode import Decoder, DecoderConfig, Weights
from .errors import MinismtError, ParameterError


def _input_lines(path):
    if path in (None, "-"):
        return [line.rstrip("\n") for line in sys.stdin]
    with open(path, encoding="utf-8") as f:
        return f.read().splitlines()


def _load_artok(args):
    inventory = artok.CliticInventory.load(
        args.inventory if args.inventory else pipeline.bundled_data("clitics.bw.tsv")
    )
    lexicon = artok.load_lexicon(
        args.lexicon if args.lexicon else pipeline.bundled_data("stems.bw.txt")
    )
    return artok.Scheme.parse(args.scheme), inventory, lexicon


def _cmd_tokenize(args):
    scheme, inventory, lexicon = _load_artok(args)
    for line in _input_lines(args.input):
        tokens = artok.tokenize(tuple(line.split()), scheme, inventory, lexicon)
        print(" ".join(tokens))
    return 0


def _cmd_detokenize(args):
    for line in _input_lines(args.input):
        print(" ".join(artok.detokenize(tuple(line.split()))))
    return 0


def _cmd_stats(args):
    corp = corpus.load_parallel(args.source, args.target)
    sys.stdout.write(
        corpus.format_stats_table(corpus.stats(corp), corp.source_lang, corp.target_lang)
    )
    return 0


def _cmd_train_lm(args):
    sentences = [tuple(line.split()) for line in _input_lines(args.corpus)]
    model = lm.train(sentences, args.order, args.smoothing)
    lm.write_arpa(model, args.output)
    print("wrote %s (order %d, %s)" % (args.output, args.order, args.smoothing))
    return 0


def _cmd_query_lm(args):
    model = lm.read_arpa(args.model)
    sentences = [tuple(line.split()) for line in _input_lines(args.input)]
    for s in sentences:
        print("%.6f" % lm.sentence_logprob(model, s))
    if sentences:
        print("perplexity %.6f" % lm.perplexity(model, sentences))
    return 0


def _cmd_align(args):
    corp = corpus.load_parallel(args.source, args.target)
    fwd = align.em_train(corp, args.iterations)
    bwd = align.em_train(align.transpose_corpus(corp), args.iterations)
    matrices = []
    for pair in corp.pairs:
        f = align.viterbi_align(fwd, pair)
        b = align.viterbi_align(bwd, corpus.SentencePair(pair.target, pair.source, pair.pair_id))
        matrices.append(align.symmetrize(f, b, args.heuristic))
    align.write_alignments(matrices, args.output)
    if args.save_lexicons:
        align.write_lexicon(fwd, args.output + ".lex.fwd")
        align.write_lexicon(bwd, args.output + ".lex.bwd")
    print("wrote %s (%d pairs)" % (args.output, len(matrices)))
    return 0


def _cmd_extract(args):
    corp = corpus.load_parallel(args.source, args.target)
    matrices = align.read_alignments(args.alignments, corp)
    lex_fwd = align.read_lexicon(args.lex_fwd)
    lex_bwd = align.read_lexicon(args.lex_bwd)
    extracted = phrases.extract_corpus(corp, matrices, args.max_len)
    table = phrases.score(extracted, lex_fwd, lex_bwd)
    phrases.write_table(table, args.output)
    print("wrote %s (%d entries)" % (args.output, len(table)))
    return 0


def _decoder_from_args(args):
    table = phrases.read_table(args.table)
    model = lm.read_arpa(args.lm)
    weights = Weights.from_file(args.weights) if args.weights else Weights.uniform()
    config = DecoderConfig(
        stack_size=args.stack_size,
        beam_threshold=args.beam_threshold,
        distortion_limit=args.distortion_limit,
    )
    return Decoder(table, model, weights, config)


def _cmd_decode(args):
    decoder = _decoder_from_args(args)
    for line in _input_lines(args.input):
        print(" ".join(decoder.decode(tuple(line.split())).tokens))
    return 0


def _cmd_nbest(args):
    decoder = _decoder_from_args(args)
    for idx, line in enumerate(_input_lines(args.input)):
        for t in decoder.nbest(tuple(line.split()), args.n):
            print(
                "%d ||| %s ||| %s ||| %.6f"
                % (idx, " ".join(t.tokens), " ".join("%.6f" % f for f in t.features), t.score)
            )
    return 0


def _cmd_mert(args):
    dev = corpus.load_parallel(args.dev_source, args.dev_target)
    table = phrases.read_table(args.table)
    model = lm.read_arpa(args.lm)
    config = DecoderConfig(
        stack_size=args.stack_size,
        beam_threshold=args.beam_threshold,
        distortion_limit=args.distortion_limit,
    )
    initial = Weights.from_file(args.init_weights) if args.init_weights else Weights.uniform()

    def factory(weights):
        return Decoder(table, model, weights, config)

    log_lines = []
    tuned = mert.mert(
        dev, factory, initial,
        iterations=args.iterations, nbest_size=args.nbest, seed=args.seed,
        log_lines=log_lines,
    )
    tuned.to_file(args.output)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as f:
            f.write("\n".join(log_lines) + "\n")
    print("wrote %s" % args.output)
    return 0


def _cmd_bleu(args):
    hyps = [tuple(line.split()) for line in _input_lines(args.hypothesis)]
    ref_files = [[tuple(line.split()) for line in _input_lines(p)] for p in args.references]
    for i, refs in enumerate(ref_files):
        if len(refs) != len(hyps):
            raise ParameterError(
                "reference file %s has %d lines, hypothesis has %d"
                % (args.references[i], len(refs), len(hyps))
            )
    reference_lists = [[refs[i] for refs in ref_files] for i in range(len(hyps))]
    stats = bleu.corpus_stats(hyps, reference_lists)
    print(bleu.format_report(stats, args.max_order))
    return 0


def _cmd_validate(args):
    cfg = pipeline.load_config(args.config)
    problems = pipeline.validate(cfg)
    for p in problems:
        print(p)
    if problems:
        print("%d violation(s)" % len(problems))
        return 1
    print("configuration is valid")
    return 0


def _cmd_pipeline(args):
    cfg = pipeline.load_config(args.config)
    if args.stage:
        manifest = pipeline.run_stage(args.stage, cfg)
        print("stage %s done (%s)" % (args.stage, manifest))
    else:
        work = pipeline.run_pipeline(cfg)
        report = work / "bleu.txt"
        sys.stdout.write(report.read_text(encoding="utf-8"))
    return 0


def _cmd_make_toy_config(args):
    path = pipeline.make_toy_config(args.out_dir)
    print(path)
    return 0


def _add_decoder_flags(sub):
    sub.add_argument("--table", required=True, help="phrase table file")
    sub.add_argument("--lm", required=True, help="ARPA language model file")
    sub.add_argument("--weights", help="weights file (default: uniform)")
    sub.add_argument("--stack-size", type=int, default=100)
    sub.add_argument("--beam-threshold", type=float, default=None)
    sub.add_argument("--distortion-limit", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="minismt",
        description="Miniature phrase-based statistical machine translation toolkit.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("tokenize", help="clitic-tokenize Arabic text (filter)")
    sub.add_argument("--scheme", default="atb", help="atb or myd3")
    sub.add_argument("--inventory", help="clitic inventory TSV (default: bundled)")
    sub.add_argument("--lexicon", help="stem lexicon (default: bundled)")
    sub.add_argument("--input", help="input file (default: stdin)")
    sub.set_defaults(fn=_cmd_tokenize)

    sub = commands.add_parser("detokenize", help="rejoin '+'-marked segments (filter)")
    sub.add_argument("--input", help="input file (default: stdin)")
    sub.set_defaults(fn=_cmd_detokenize)

    sub = commands.add_parser("stats", help="parallel corpus statistics")
    sub.add_argument("source")
    sub.add_argument("target")
    sub.set_defaults(fn=_cmd_stats)

    sub = commands.add_parser("train-lm", help="train a backoff n-gram model")
    sub.add_argument("corpus", help="tokenized corpus, one sentence per line")
    sub.add_argument("--order", type=int, default=5)
    sub.add_argument("--smoothing", default="witten-bell", choices=("witten-bell", "mle"))
    sub.add_argument("-o", "--output", required=True)
    sub.set_defaults(fn=_cmd_train_lm)

    sub = commands.add_parser("query-lm", help="sentence log-probabilities and perplexity")
    sub.add_argument("model", help="ARPA file")
    sub.add_argument("--input", help="input file (default: stdin)")
    sub.set_defaults(fn=_cmd_query_lm)

    sub = commands.add_parser("align", help="IBM Model 1 word alignment")
    sub.add_argument("--source", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("--iterations", type=int, default=5)
    sub.add_argument("--heuristic", default="grow-diag-final", choices=align.HEURISTICS)
    sub.add_argument("--save-lexicons", action="store_true",
                     help="also write <output>.lex.fwd / .lex.bwd")
    sub.add_argument("-o", "--output", required=True)
    sub.set_defaults(fn=_cmd_align)

    sub = commands.add_parser("extract", help="extract and score a phrase table")
    sub.add_argument("--source", required=True)
    sub.add_argument("--target", required=True)
    sub.add_argument("--alignments", required=True)
    sub.add_argument("--lex-fwd", required=True)
    sub.add_argument("--lex-bwd", required=True)
    sub.add_argument("--max-len", type=int, default=phrases.DEFAULT_MAX_PHRASE_LEN)
    sub.add_argument("-o", "--output", required=True)
    sub.set_defaults(fn=_cmd_extract)

    sub = commands.add_parser("decode", help="translate, one sentence per line")
    _add_decoder_flags(sub)
    sub.add_argument("--input", help="input file (default: stdin)")
    sub.set_defaults(fn=_cmd_decode)

    sub = commands.add_parser("nbest", help="n-best lists in Moses format")
    _add_decoder_flags(sub)
    sub.add_argument("-n", type=int, default=10)
    sub.add_argument("--input", help="input file (default: stdin)")
    sub.set_defaults(fn=_cmd_nbest)

    sub = commands.add_parser("mert", help="tune log-linear weights on a dev set")
    sub.add_argument("--dev-source", required=True)
    sub.add_argument("--dev-target", required=True)
    sub.add_argument("--table", required=True)
    sub.add_argument("--lm", required=True)
    sub.add_argument("--init-weights")
    sub.add_argument("--iterations", type=int, default=mert.DEFAULT_ITERATIONS)
    sub.add_argument("--nbest", type=int, default=mert.DEFAULT_NBEST)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--stack-size", type=int, default=100)
    sub.add_argument("--beam-threshold", type=float, default=None)
    sub.add_argument("--distortion-limit", type=int, default=None)
    sub.add_argument("--log", help="write the per-iteration run log here")
    sub.add_argument("-o", "--output", required=True)
    sub.set_defaults(fn=_cmd_mert)

    sub = commands.add_parser("bleu", help="corpus BLEU of a hypothesis file")
    sub.add_argument("hypothesis")
    sub.add_argument("references", nargs="+")
    sub.add_argument("--max-order", type=int, default=bleu.MAX_ORDER)
    sub.set_defaults(fn=_cmd_bleu)

    sub = commands.add_parser("validate", help="check a pipeline config file")
    sub.add_argument("config")
    sub.set_defaults(fn=_cmd_validate)

    sub = commands.add_parser("pipeline", help="run the full pipeline (or one stage)")
    sub.add_argument("config")
    sub.add_argument("--stage", choices=pipeline.STAGES)
    sub.set_defaults(fn=_cmd_pipeline)

    sub = commands.add_parser("make-toy-config", help="set up the bundled toy corpus run")
    sub.add_argument("out_dir")
    sub.set_defaults(fn=_cmd_make_toy_config)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MinismtError as exc:
        print("ERROR %s: %s" % (exc.category, exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print("ERROR io: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
