"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test ends with a printed PASS line (run with ``pytest -s`` to see
them as they happen); a failing criterion fails its test. The end-to-end
criteria run the bundled ~1k-pair toy corpus through the real pipeline,
twice, to check both quality and byte-level determinism.
"""

import math
import random
import re
import time

import pytest

from minismt import align, artok, bleu, corpus, lm, mert, phrases, pipeline
from minismt.decode import Decoder, DecoderConfig, Weights

from conftest import random_alignment, random_phrase_table
from oracles import brute_force_extract, exhaustive_decode, grid_best_bleu
from test_artok import AR_SENTENCES, BW_SENTENCES, scheme_normal_form

UNPRUNED = DecoderConfig(stack_size=10**6, beam_threshold=None, distortion_limit=None)


def _ok(name):
    print("ACCEPTANCE PASS: %s" % name)


@pytest.fixture(scope="module")
def toy_runs(tmp_path_factory):
    """Two full pipeline runs over the bundled toy corpus, with timings."""
    runs = []
    for tag in ("first", "second"):
        out = tmp_path_factory.mktemp("toy-%s" % tag)
        cfg = pipeline.load_config(pipeline.make_toy_config(out))
        started = time.monotonic()
        work = pipeline.run_pipeline(cfg)
        runs.append({"work": work, "elapsed": time.monotonic() - started})
    return runs


def _report_scores(report_path):
    scores = {}
    for line in report_path.read_text(encoding="utf-8").splitlines():
        m = re.match(r"(\w+): BLEU = ([0-9.,]+),", line)
        if m:
            scores[m.group(1)] = pipeline.parse_number(m.group(2))
    return scores


def test_toy_pipeline_speed_and_mert_gain(toy_runs):
    """End-to-end toy pipeline in < 5 minutes; tuned test BLEU >= untuned."""
    run = toy_runs[0]
    assert run["elapsed"] < 300.0, "pipeline took %.1fs" % run["elapsed"]
    scores = _report_scores(run["work"] / "bleu.txt")
    assert set(scores) == {"tuned", "uniform"}
    assert scores["tuned"] >= scores["uniform"]
    _ok(
        "toy pipeline %.1fs; tuned BLEU %.2f >= uniform %.2f"
        % (run["elapsed"], scores["tuned"], scores["uniform"])
    )


def test_full_determinism(toy_runs):
    """Identical config and seed give byte-identical artifacts."""
    first, second = (r["work"] for r in toy_runs)
    for name in ("test.hyp.ar", "test.hyp.detok.ar", "test.hyp.uniform.ar",
                 "weights.txt", "bleu.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
    _ok("byte-identical translations, weights, and BLEU report across reruns")


@pytest.fixture(scope="module")
def toy_sentences(toy_runs):
    path = toy_runs[0]["work"] / "corpus.train.ar"
    return [tuple(line.split()) for line in path.read_text(encoding="utf-8").splitlines()]


def test_lm_normalization_orders_1_to_5(toy_sentences):
    """Sum over the event vocabulary = 1 +/- 1e-6 for 500 observed contexts."""
    started = time.monotonic()
    rng = random.Random(101)
    checked = 0
    for order in range(1, 6):
        model = lm.train(toy_sentences, order)
        observed = [()] + sorted(model.backoffs)
        for _ in range(100):
            ctx = observed[rng.randrange(len(observed))]
            assert lm.conditional_sum(model, ctx) == pytest.approx(1.0, abs=1e-6)
            checked += 1
    elapsed = time.monotonic() - started
    assert checked == 500
    assert elapsed < 30.0
    _ok("LM normalization: 500 contexts over orders 1-5 in %.1fs" % elapsed)


def test_sentence_logprob_decomposition_exact(toy_sentences):
    """sentence_logprob equals the per-word logprob sum exactly, 1000 sentences."""
    model = lm.train(toy_sentences, 5)
    vocab = sorted(model.event_vocab() - {lm.END, lm.UNK}) + ["oov-token"]
    rng = random.Random(202)
    for _ in range(1000):
        sentence = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 9)))
        padded = (lm.START,) + sentence + (lm.END,)
        total = 0.0
        for i in range(1, len(padded)):
            total += lm.logprob(model, padded[i], padded[:i])
        assert lm.sentence_logprob(model, sentence) == total
    _ok("Eq-decomposition exact on 1000 random sentences")


def test_arpa_round_trip_100_queries(toy_sentences, tmp_path):
    """read(write(model)) agrees on 100 random queries within 1e-4 log10."""
    model = lm.train(toy_sentences, 4)
    path = tmp_path / "toy.arpa"
    lm.write_arpa(model, path)
    loaded = lm.read_arpa(path)
    rng = random.Random(303)
    vocab = sorted(model.event_vocab())
    for _ in range(100):
        word = rng.choice(vocab)
        ctx = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 3)))
        assert lm.logprob(loaded, word, ctx) == pytest.approx(
            lm.logprob(model, word, ctx), abs=1e-4
        )
    _ok("ARPA round trip within 1e-4 on 100 random queries")


def test_bleu_oracle_cases():
    """Clipping p1 = 1/3 exactly; BP hand case to 1e-4; identity = 1.0; < 1 s."""
    started = time.monotonic()
    clip = bleu.sentence_stats(("the", "the", "the"), [("the", "cat")])
    assert clip.matches[0] == 1 and clip.totals[0] == 3
    assert clip.matches[0] / clip.totals[0] == 1 / 3

    bp_case = bleu.sentence_stats(("the", "cat", "sat"), [("the", "cat", "sat", "down")])
    assert bleu.corpus_bleu(bp_case, max_order=3) == pytest.approx(
        math.exp(1 - 4 / 3), abs=1e-4
    )

    ref = tuple("a b c d e".split())
    assert bleu.corpus_bleu(bleu.sentence_stats(ref, [ref])) == 1.0
    elapsed = time.monotonic() - started
    assert elapsed < 1.0
    _ok("BLEU oracle cases in %.3fs" % elapsed)


def test_phrase_extraction_oracle_200_pairs():
    """extract() equals the rectangle-consistency oracle on 200 random pairs."""
    rng = random.Random(404)
    for trial in range(200):
        n, m = rng.randint(1, 6), rng.randint(1, 6)
        pair = corpus.SentencePair(
            tuple("f%d" % i for i in range(n)), tuple("e%d" % j for j in range(m)), 0
        )
        matrix = align.AlignmentMatrix(0, random_alignment(rng, n, m), n, m)
        max_len = rng.choice([2, 3, 7])
        assert phrases.extract(pair, matrix, max_len) == brute_force_extract(
            pair, matrix, max_len
        ), trial
    _ok("phrase extraction equals brute-force oracle on 200 random pairs")


def _random_decoder_instance(rng):
    n = rng.randint(1, 5)
    source = tuple("f%d" % i for i in range(n))
    targets = ["x", "y", "z", "u", "v"]
    table = random_phrase_table(rng, list(source), targets, n_entries=5, max_len=2)
    sentences = [
        tuple(rng.choice(targets) for _ in range(rng.randint(1, 6))) for _ in range(20)
    ]
    model = lm.train(sentences, rng.choice([1, 2, 3]))
    weights = Weights(tuple(rng.uniform(0.02, 1.0) for _ in range(8)))
    return source, table, model, weights


def test_decoder_optimality_oracle_100_instances():
    """Unpruned decode equals exhaustive search exactly; same with limit 0."""
    rng = random.Random(505)
    for trial in range(100):
        sentence, table, model, weights = _random_decoder_instance(rng)
        got = Decoder(table, model, weights, UNPRUNED).decode(sentence)
        want, _ = exhaustive_decode(sentence, table, model, weights)
        assert got.score == want, trial

        monotone_cfg = DecoderConfig(10**6, None, 0)
        got0 = Decoder(table, model, weights, monotone_cfg).decode(sentence)
        want0, _ = exhaustive_decode(sentence, table, model, weights, distortion_limit=0)
        assert got0.score == want0, trial
    _ok("decoder equals exhaustive maximum exactly on 100 instances (free + monotone)")


def test_em_properties_on_toy(toy_runs):
    """Model 1 log-likelihood non-decreasing over 5 iterations; rows normalize."""
    work = toy_runs[0]["work"]
    corp = corpus.load_parallel(work / "corpus.train.en", work / "corpus.train.ar")
    lexicon = align.em_train(corp, 5)
    history = lexicon.log_likelihood_history
    assert len(history) == 5
    for earlier, later in zip(history, history[1:]):
        assert later >= earlier - 1e-9
    for row in lexicon.table.values():
        assert sum(row.values()) == pytest.approx(1.0, abs=1e-6)
    _ok("EM log-likelihood monotone over 5 iterations; conditionals normalize")


def test_mert_line_search_oracle_20_pools():
    """Envelope best BLEU matches a 1e-3 grid search; argmax scale-invariant."""
    rng = random.Random(606)
    base = Weights.uniform()
    for trial in range(20):
        pool = []
        for _ in range(rng.randint(1, 4)):
            ref = tuple(rng.choice("abcde") for _ in range(rng.randint(5, 8)))
            entries = []
            seen = set()
            while len(entries) < rng.randint(2, 5):
                tokens = tuple(rng.choice("abcde") for _ in range(rng.randint(4, 8)))
                if tokens in seen:
                    continue
                seen.add(tokens)
                features = tuple(rng.uniform(-2, 2) for _ in range(8))
                entries.append(mert.build_pool_entry(tokens, features, [ref]))
            pool.append(entries)
        direction = tuple(rng.uniform(-1, 1) for _ in range(8))
        result = mert.line_search(pool, base, direction)
        grid = grid_best_bleu(pool, base, direction)
        assert result.best_bleu >= grid - 1e-12, trial
        stepped = Weights(
            tuple(b + result.best_step * d for b, d in zip(base.values, direction))
        )
        assert mert.pool_bleu(pool, stepped) == pytest.approx(result.best_bleu, abs=1e-12)

    # decode argmax invariance under weight scaling
    rng2 = random.Random(707)
    for _ in range(10):
        sentence, table, model, weights = _random_decoder_instance(rng2)
        reference = Decoder(table, model, weights, UNPRUNED).decode(sentence).tokens
        for c in (0.1, 10.0):
            scaled = Decoder(table, model, weights.scaled(c), UNPRUNED).decode(sentence)
            assert scaled.tokens == reference
    _ok("MERT envelope matches grid oracle on 20 pools; argmax scale-invariant")


def test_tokenization_round_trip_fixture_set(
    bw_inventory, bw_lexicon, ar_inventory, ar_lexicon
):
    """detokenize(tokenize(s)) == scheme-normalized s; flagship fixtures split as specified."""
    atb = artok.tokenize(("wAlktAb",), artok.Scheme.ATB, bw_inventory, bw_lexicon)
    myd3 = artok.tokenize(("wAlktAb",), artok.Scheme.MYD3, bw_inventory, bw_lexicon)
    assert atb == ("w+", "AlktAb")
    assert myd3 == ("w+", "Al+", "ktAb")

    cases = [(s, bw_inventory, bw_lexicon) for s in BW_SENTENCES] + [
        (s, ar_inventory, ar_lexicon) for s in AR_SENTENCES
    ]
    for text, inventory, lexicon in cases:
        sentence = tuple(text.split())
        for scheme in artok.Scheme:
            restored = artok.detokenize(artok.tokenize(sentence, scheme, inventory, lexicon))
            expected = tuple(scheme_normal_form(t, scheme) for t in sentence)
            assert restored == expected, (text, scheme)
    _ok("tokenization round trip holds on the full fixture set, both schemes")
