import math
import random

import pytest

from minismt import bleu
from minismt.errors import ParameterError
from minismt.pipeline import parse_number


def test_identity_hypothesis_scores_one():
    ref = tuple("the quick brown fox jumps".split())
    stats = bleu.sentence_stats(ref, [ref])
    assert stats.matches == stats.totals
    assert bleu.corpus_bleu(stats) == 1.0


def test_canonical_clipping_case():
    stats = bleu.sentence_stats(("the", "the", "the"), [("the", "cat")])
    assert stats.matches[0] == 1  # clipped to the reference count
    assert stats.totals[0] == 3
    assert stats.matches[0] / stats.totals[0] == pytest.approx(1 / 3)


def test_effective_length_tie_prefers_shorter():
    refs = [tuple("r" for _ in range(4)), tuple("r" for _ in range(6))]
    stats = bleu.sentence_stats(tuple("h" for _ in range(5)), refs)
    assert stats.ref_len == 4


def test_brevity_penalty_hand_case():
    # hyp 'the cat sat' vs ref 'the cat sat down': p1..p3 perfect, no 4-grams
    stats = bleu.sentence_stats(("the", "cat", "sat"), [("the", "cat", "sat", "down")])
    assert bleu.corpus_bleu(stats) == 0.0  # strict mode: zero 4-gram matches
    score3 = bleu.corpus_bleu(stats, max_order=3)
    assert score3 == pytest.approx(math.exp(1 - 4 / 3), abs=1e-4)
    assert score3 == pytest.approx(0.7165, abs=1e-3)


def test_empty_hypothesis():
    stats = bleu.sentence_stats((), [("a", "b")])
    assert stats.hyp_len == 0 and all(m == 0 for m in stats.matches)
    assert bleu.corpus_bleu(stats) == 0.0


def test_stats_additive():
    refs = [[("a", "b", "c", "d", "e")], [("x", "y", "z", "w", "q")]]
    hyps = [("a", "b", "c", "d"), ("x", "y", "z", "w", "q")]
    joint = bleu.corpus_stats(hyps, refs)
    split = bleu.sentence_stats(hyps[0], refs[0]) + bleu.sentence_stats(hyps[1], refs[1])
    assert joint == split


def test_reference_order_invariance():
    rng = random.Random(3)
    refs = [tuple(rng.choice("abc") for _ in range(6)) for _ in range(3)]
    hyp = tuple(rng.choice("abc") for _ in range(6))
    base = bleu.sentence_stats(hyp, refs)
    assert bleu.sentence_stats(hyp, list(reversed(refs))) == base


def test_adding_reference_never_decreases_matches():
    rng = random.Random(4)
    hyp = tuple(rng.choice("abcd") for _ in range(8))
    refs = [tuple(rng.choice("abcd") for _ in range(8))]
    base = bleu.sentence_stats(hyp, refs)
    extended = bleu.sentence_stats(hyp, refs + [tuple(rng.choice("abcd") for _ in range(8))])
    for n in range(4):
        assert extended.matches[n] >= base.matches[n]


def test_bounds_random():
    rng = random.Random(5)
    total = bleu.BleuStats.zero()
    for _ in range(30):
        hyp = tuple(rng.choice("abcd") for _ in range(rng.randint(1, 9)))
        ref = tuple(rng.choice("abcd") for _ in range(rng.randint(1, 9)))
        total = total + bleu.sentence_stats(hyp, [ref])
    assert 0.0 <= bleu.corpus_bleu(total) <= 1.0


def test_requires_reference():
    with pytest.raises(ParameterError):
        bleu.sentence_stats(("a",), [])


def test_report_formatting():
    ref = tuple("a b c d e f g h".split())
    stats = bleu.sentence_stats(ref, [ref])
    line = bleu.format_report(stats)
    assert line.startswith("BLEU = 100.00, 100.0/100.0/100.0/100.0 (BP=1.000")
    assert "hyp_len=8" in line and "ref_len=8" in line
    # percentage renders with two decimals and a dot
    partial = bleu.sentence_stats(("a", "b"), [ref])
    line2 = bleu.format_report(partial)
    assert line2.split(",")[0] == "BLEU = 0.00"


def test_score_input_accepts_comma_decimal():
    assert parse_number("24,51") == pytest.approx(24.51)
    assert parse_number("24.51") == pytest.approx(24.51)
