"""Phrase pair extraction, relative-frequency + lexical scoring, distortion cost.

Extraction returns exactly the alignment-consistent rectangles: at least
one link inside, no link leaving the rectangle on either axis, spans
extended over unaligned boundary words, both sides at most `max_len`
tokens. Scoring produces the four standard values per pair: forward and
reverse phrase relative frequencies and forward and reverse lexical
weights computed from each pair's internal links.
"""

import math
from collections import Counter
from dataclasses import dataclass

from .align import NULL_WORD
from .errors import FormatError, ParameterError

DEFAULT_MAX_PHRASE_LEN = 7
TABLE_PRUNE_LIMIT = 20  # kept targets per source at serialization time


@dataclass(frozen=True)
class PhrasePair:
    source: tuple
    target: tuple
    source_span: tuple  # (i1, i2) inclusive
    target_span: tuple  # (j1, j2) inclusive
    links: frozenset  # internal links, relative to the spans


@dataclass(frozen=True)
class Scores:
    phi_fwd: float  # P(target | source), relative frequency
    lex_fwd: float
    phi_rev: float  # P(source | target)
    lex_rev: float

    def as_tuple(self):
        return (self.phi_fwd, self.lex_fwd, self.phi_rev, self.lex_rev)


def extract(pair, alignment, max_len=DEFAULT_MAX_PHRASE_LEN):
    """All alignment-consistent phrase pairs of one sentence pair."""
    if max_len < 1:
        raise ParameterError("max_len must be >= 1, got %r" % (max_len,))
    links = alignment.links
    n, m = len(pair.source), len(pair.target)
    aligned_src = {i for i, _ in links}
    out = []
    for j1 in range(m):
        for j2 in range(j1, min(m, j1 + max_len)):
            inside = [(i, j) for i, j in links if j1 <= j <= j2]
            if not inside:
                continue
            i1 = min(i for i, _ in inside)
            i2 = max(i for i, _ in inside)
            if any(i1 <= i <= i2 and not (j1 <= j <= j2) for i, j in links):
                continue
            # extend over unaligned source boundary words
            lo = i1
            while lo >= 0 and (lo == i1 or lo not in aligned_src):
                hi = i2
                while hi < n and (hi == i2 or hi not in aligned_src):
                    if hi - lo < max_len:
                        out.append(_make_pair(pair, (lo, hi), (j1, j2), links))
                    hi += 1
                lo -= 1
    return set(out)


def _make_pair(pair, source_span, target_span, links):
    (i1, i2), (j1, j2) = source_span, target_span
    internal = frozenset(
        (i - i1, j - j1) for i, j in links if i1 <= i <= i2 and j1 <= j <= j2
    )
    return PhrasePair(
        pair.source[i1 : i2 + 1],
        pair.target[j1 : j2 + 1],
        source_span,
        target_span,
        internal,
    )


def distortion_cost(prev_end, next_start):
    """Linear displacement penalty; zero only for monotone adjacency."""
    return abs(next_start - prev_end - 1)


class PhraseTable:
    """Scored phrase pairs indexed by source phrase."""

    def __init__(self, entries):
        # entries: dict[(source tuple, target tuple)] -> Scores
        self.entries = entries
        self.by_source = {}
        for (src, tgt), scores in sorted(entries.items()):
            self.by_source.setdefault(src, []).append((tgt, scores))
        self.max_source_len = max((len(s) for s, _ in entries), default=0)

    def options(self, source_phrase):
        return self.by_source.get(tuple(source_phrase), [])

    def __len__(self):
        return len(self.entries)


def score(extracted, lexicon_fwd, lexicon_bwd):
    """Build a PhraseTable from per-pair extraction results.

    `extracted` is an iterable of PhrasePair multisets (one per corpus
    pair). phi values are relative frequencies of the joint counts; lexical
    weights use each pair type's most frequent internal alignment (ties
    resolved by the lexicographically smallest link set).
    """
    joint = Counter()
    by_alignment = {}
    for pairs in extracted:
        for pp in pairs:
            key = (pp.source, pp.target)
            joint[key] += 1
            by_alignment.setdefault(key, Counter())[pp.links] += 1

    source_totals = Counter()
    target_totals = Counter()
    for (src, tgt), c in joint.items():
        source_totals[src] += c
        target_totals[tgt] += c

    entries = {}
    for (src, tgt), c in joint.items():
        links = min(
            by_alignment[(src, tgt)].items(),
            key=lambda item: (-item[1], sorted(item[0])),
        )[0]
        entries[(src, tgt)] = Scores(
            phi_fwd=c / source_totals[src],
            lex_fwd=_lexical_weight(src, tgt, links, lexicon_fwd),
            phi_rev=c / target_totals[tgt],
            lex_rev=_lexical_weight(tgt, src, frozenset((j, i) for i, j in links), lexicon_bwd),
        )
    return PhraseTable(entries)


def _lexical_weight(given_phrase, out_phrase, links, lexicon):
    """Product over out-words of the mean translation probability of their
    linked given-words (unaligned words score against the null word)."""
    weight = 1.0
    for j, out in enumerate(out_phrase):
        linked = [i for i, jj in links if jj == j]
        if linked:
            p = sum(lexicon.prob(out, given_phrase[i]) for i in linked) / len(linked)
        else:
            p = lexicon.prob(out, NULL_WORD)
        weight *= p
    return weight


def extract_corpus(corpus, alignments, max_len=DEFAULT_MAX_PHRASE_LEN):
    """Extraction over a corpus, as a list parallel to its pairs."""
    if len(alignments) != len(corpus.pairs):
        raise ParameterError(
            "%d alignments for %d sentence pairs" % (len(alignments), len(corpus.pairs))
        )
    return [extract(pair, matrix, max_len) for pair, matrix in zip(corpus.pairs, alignments)]


def write_table(table, path, prune=TABLE_PRUNE_LIMIT):
    """`source ||| target ||| phi_fwd lex_fwd phi_rev lex_rev` lines.

    Sorted by source then target, keeping the best `prune` targets per
    source by phi_fwd (score first, lexicographic target on ties).
    """
    with open(path, "w", encoding="utf-8") as f:
        for src in sorted(table.by_source):
            options = sorted(
                table.by_source[src], key=lambda item: (-item[1].phi_fwd, item[0])
            )[:prune]
            for tgt, s in sorted(options):
                f.write(
                    "%s ||| %s ||| %.10g %.10g %.10g %.10g\n"
                    % (" ".join(src), " ".join(tgt), s.phi_fwd, s.lex_fwd, s.phi_rev, s.lex_rev)
                )


def read_table(path):
    entries = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ||| ")
            if len(fields) != 3:
                raise FormatError("%s line %d: expected 3 ||| fields" % (path, lineno))
            values = fields[2].split()
            if len(values) != 4:
                raise FormatError("%s line %d: expected 4 scores" % (path, lineno))
            try:
                scores = Scores(*(float(v) for v in values))
            except ValueError:
                raise FormatError("%s line %d: bad score value" % (path, lineno))
            if not all(0.0 < v <= 1.0 for v in scores.as_tuple()):
                raise FormatError("%s line %d: scores must be in (0,1]" % (path, lineno))
            entries[(tuple(fields[0].split()), tuple(fields[1].split()))] = scores
    return PhraseTable(entries)


def log10_scores(scores):
    return tuple(math.log10(v) for v in scores.as_tuple())
