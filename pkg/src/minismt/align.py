"""IBM Model 1 word alignment: EM training, Viterbi links, symmetrization.

The lexicon is directional: em_train(corpus) learns P(target word | source
word) including a null source word, so each conditional distribution over
target words sums to one. Training the reverse direction just means
swapping the corpus sides (see `transpose_corpus`). Everything is
deterministic: fixed iteration order, ties resolved toward the null word
and then the smaller source index.
"""

import math
from dataclasses import dataclass, field

from .corpus import ParallelCorpus, SentencePair
from .errors import ParameterError, TrainingError

NULL_WORD = "<null>"


@dataclass(frozen=True)
class TranslationLexicon:
    """Conditional translation table: table[given][out] = P(out | given)."""

    table: dict
    log_likelihood_history: tuple = field(default=(), compare=False)

    def prob(self, out, given):
        return self.table.get(given, {}).get(out, 0.0)


@dataclass(frozen=True)
class AlignmentMatrix:
    pair_id: int
    links: frozenset  # (source index, target index)
    source_len: int
    target_len: int

    def __post_init__(self):
        for i, j in self.links:
            if not (0 <= i < self.source_len and 0 <= j < self.target_len):
                raise ParameterError(
                    "link (%d,%d) outside a %dx%d sentence pair"
                    % (i, j, self.source_len, self.target_len)
                )

    def transpose(self):
        return AlignmentMatrix(
            self.pair_id,
            frozenset((j, i) for i, j in self.links),
            self.target_len,
            self.source_len,
        )


def transpose_corpus(corpus):
    """Swap source and target sides (for training the reverse direction)."""
    pairs = tuple(SentencePair(p.target, p.source, p.pair_id) for p in corpus.pairs)
    return ParallelCorpus(pairs, corpus.target_lang, corpus.source_lang)


def em_train(corpus, iterations):
    """IBM Model 1 EM over a cleaned parallel corpus.

    Initialization is uniform over co-occurring pairs (and the null word);
    each iteration accumulates posterior-weighted counts and renormalizes.
    The per-iteration corpus log-likelihood (natural log, including the
    uniform alignment prior) is recorded on the returned lexicon and is
    non-decreasing.
    """
    if iterations < 1:
        raise ParameterError("iterations must be >= 1, got %r" % (iterations,))
    pairs = [p for p in corpus.pairs]
    if not pairs:
        raise TrainingError("cannot run EM on an empty corpus")

    table = {}
    for pair in pairs:
        for f in (NULL_WORD,) + pair.source:
            row = table.setdefault(f, {})
            for e in pair.target:
                row[e] = 0.0
    for f, row in table.items():
        uniform = 1.0 / len(row)
        for e in row:
            row[e] = uniform

    history = []
    for _ in range(iterations):
        expected = {f: dict.fromkeys(row, 0.0) for f, row in table.items()}
        log_likelihood = 0.0
        for pair in pairs:
            sources = (NULL_WORD,) + pair.source
            for e in pair.target:
                denom = 0.0
                for f in sources:
                    denom += table[f][e]
                log_likelihood += math.log(denom) - math.log(len(sources))
                for f in sources:
                    expected[f][e] += table[f][e] / denom
        history.append(log_likelihood)
        for f, row in expected.items():
            total = sum(row.values())
            for e in row:
                table[f][e] = row[e] / total

    return TranslationLexicon(table, tuple(history))


def viterbi_align(lexicon, pair):
    """Link each target word to its most probable source word.

    The null word wins ties (it sits at index -1), and among real source
    words the smaller index wins; null-aligned targets get no link.
    """
    links = set()
    for j, e in enumerate(pair.target):
        best_i = None
        best_p = lexicon.prob(e, NULL_WORD)
        for i, f in enumerate(pair.source):
            p = lexicon.prob(e, f)
            if p > best_p:
                best_i, best_p = i, p
        if best_i is not None:
            links.add((best_i, j))
    return AlignmentMatrix(pair.pair_id, frozenset(links), len(pair.source), len(pair.target))


HEURISTICS = ("intersection", "union", "grow-diag-final")

_NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def symmetrize(forward, backward, heuristic="grow-diag-final"):
    """Combine a forward and a (transposed) backward alignment of one pair."""
    if heuristic not in HEURISTICS:
        raise ParameterError("unknown symmetrization heuristic %r" % (heuristic,))
    flipped = backward.transpose()
    if (forward.source_len, forward.target_len) != (flipped.source_len, flipped.target_len):
        raise ParameterError(
            "alignment dimensions disagree: %dx%d vs %dx%d (after transposing backward)"
            % (forward.source_len, forward.target_len, flipped.source_len, flipped.target_len)
        )
    inter = forward.links & flipped.links
    union = forward.links | flipped.links
    if heuristic == "intersection":
        links = inter
    elif heuristic == "union":
        links = union
    else:
        links = _grow_diag_final(inter, union, forward.source_len, forward.target_len)
    return AlignmentMatrix(forward.pair_id, frozenset(links), forward.source_len, forward.target_len)


def _grow_diag_final(intersection, union, source_len, target_len):
    links = set(intersection)
    aligned_src = {i for i, _ in links}
    aligned_tgt = {j for _, j in links}

    changed = True
    while changed:
        changed = False
        for i, j in sorted(links):
            for di, dj in _NEIGHBORS:
                ni, nj = i + di, j + dj
                if (ni, nj) in union and (ni, nj) not in links:
                    if ni not in aligned_src or nj not in aligned_tgt:
                        links.add((ni, nj))
                        aligned_src.add(ni)
                        aligned_tgt.add(nj)
                        changed = True

    for i, j in sorted(union - links):
        if i not in aligned_src or j not in aligned_tgt:
            links.add((i, j))
            aligned_src.add(i)
            aligned_tgt.add(j)
    return links


def write_alignments(matrices, path):
    """Moses-style alignment file: one line per pair of space-separated i-j links."""
    with open(path, "w", encoding="utf-8") as f:
        for m in matrices:
            f.write(" ".join("%d-%d" % link for link in sorted(m.links)) + "\n")


def read_alignments(path, corpus):
    """Load an alignment file produced by write_alignments for `corpus`."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if len(lines) != len(corpus.pairs):
        raise ParameterError(
            "alignment file %s has %d lines but the corpus has %d pairs"
            % (path, len(lines), len(corpus.pairs))
        )
    matrices = []
    for pair, line in zip(corpus.pairs, lines):
        links = set()
        for chunk in line.split():
            i, j = chunk.split("-")
            links.add((int(i), int(j)))
        matrices.append(
            AlignmentMatrix(pair.pair_id, frozenset(links), len(pair.source), len(pair.target))
        )
    return matrices


def write_lexicon(lexicon, path):
    """Dump `given<TAB>out<TAB>prob` lines, sorted lexicographically."""
    with open(path, "w", encoding="utf-8") as f:
        for given in sorted(lexicon.table):
            for out in sorted(lexicon.table[given]):
                f.write("%s\t%s\t%.10g\n" % (given, out, lexicon.table[given][out]))


def read_lexicon(path):
    table = {}
    with open(path, encoding="utf-8") as f:
        for raw in f:
            given, out, prob = raw.rstrip("\n").split("\t")
            table.setdefault(given, {})[out] = float(prob)
    return TranslationLexicon(table)
