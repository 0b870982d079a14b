"""Stack-based beam-search decoding under a log-linear model.

Hypotheses are organized into stacks by the number of covered source
words. Expansion applies every phrase-table option over an uncovered span
within the distortion limit; hypotheses identical in (coverage, language
model context, last source position) are recombined, with the losers kept
as arcs so n-best lists can be read back out of the search graph.
Pruning is histogram (stack size) plus an optional relative score window,
both measured on score + admissible future-cost estimate.

The eight features, in order: language model log10 probability, forward
and reverse phrase translation log-probs, forward and reverse lexical
weights, negated distortion cost, negated word count (unknown-word
copies pay an extra penalty here), and negated phrase count. A
hypothesis score is always the full dot product of weights and
accumulated features, so reported scores are exactly reproducible from
the feature vector.
"""

import heapq
import math
from dataclasses import dataclass

from . import lm as lm_mod
from .errors import MinismtError, ParameterError
from .phrases import distortion_cost, log10_scores

FEATURE_NAMES = (
    "lm",
    "phi_fwd",
    "lex_fwd",
    "phi_rev",
    "lex_rev",
    "distortion",
    "word_penalty",
    "phrase_penalty",
)
N_FEATURES = 8
_LM, _DIST, _WORD, _PHRASE = 0, 5, 6, 7

UNKNOWN_WORD_PENALTY = 10.0  # extra word-penalty units per copied-through token

_ZERO = (0.0,) * N_FEATURES


@dataclass(frozen=True)
class Weights:
    values: tuple

    def __post_init__(self):
        if len(self.values) != N_FEATURES or not all(
            isinstance(v, float) and math.isfinite(v) for v in self.values
        ):
            raise ParameterError("weights must be %d finite floats" % N_FEATURES)

    @classmethod
    def uniform(cls):
        return cls((1.0 / N_FEATURES,) * N_FEATURES)

    def dot(self, features):
        total = 0.0
        for w, f in zip(self.values, features):
            total += w * f
        return total

    def scaled(self, c):
        return Weights(tuple(w * c for w in self.values))

    def l1_normalized(self):
        norm = sum(abs(w) for w in self.values)
        return self if norm == 0.0 else self.scaled(1.0 / norm)

    def to_file(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for name, value in zip(FEATURE_NAMES, self.values):
                f.write("%s %.12g\n" % (name, value))

    @classmethod
    def from_file(cls, path):
        seen = {}
        with open(path, encoding="utf-8") as f:
            for raw in f:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                name, value = line.split()
                seen[name] = float(value)
        missing = [n for n in FEATURE_NAMES if n not in seen]
        if missing:
            raise ParameterError("weights file %s is missing %s" % (path, ", ".join(missing)))
        return cls(tuple(seen[n] for n in FEATURE_NAMES))


@dataclass(frozen=True)
class DecoderConfig:
    stack_size: int = 100
    beam_threshold: float | None = None  # None disables threshold pruning
    distortion_limit: int | None = None  # None means unlimited reordering

    def __post_init__(self):
        if self.stack_size < 1:
            raise ParameterError("stack_size must be >= 1")
        if self.beam_threshold is not None and self.beam_threshold < 0:
            raise ParameterError("beam_threshold must be >= 0")
        if self.distortion_limit is not None and self.distortion_limit < 0:
            raise ParameterError("distortion_limit must be >= 0")


@dataclass(frozen=True)
class Option:
    start: int
    end: int  # exclusive
    target: tuple
    trans_logs: tuple  # log10 of the four phrase-table scores
    unknown: bool = False


@dataclass(frozen=True)
class DerivationStep:
    option: Option
    features: tuple  # feature increment contributed by this step


@dataclass(frozen=True)
class Translation:
    tokens: tuple
    features: tuple
    score: float
    derivation: tuple


class _Hyp:
    __slots__ = (
        "coverage",
        "context",
        "last_end",
        "features",
        "score",
        "inc_score",
        "future",
        "prev",
        "option",
        "inc",
        "arcs",
        "serial",
    )

    def __init__(
        self, coverage, context, last_end, features, score, inc_score, future, prev, option, inc, serial
    ):
        self.coverage = coverage
        self.context = context
        self.last_end = last_end
        self.features = features
        self.score = score
        self.inc_score = inc_score
        self.future = future
        self.prev = prev
        self.option = option
        self.inc = inc
        self.arcs = []
        self.serial = serial

    def path(self):
        steps = []
        node = self
        while node.prev is not None:
            steps.append(node)
            node = node.prev
        steps.reverse()
        return steps

    def partial_tokens(self):
        tokens = []
        for node in self.path():
            tokens.extend(node.option.target)
        return tuple(tokens)


def collect_options(sentence, table):
    """Applicable phrase options per span, plus copy-through unknowns.

    A source word with no single-word table entry gets an unknown option
    that copies it to the output at a fixed extra word penalty, so every
    sentence is fully coverable.
    """
    n = len(sentence)
    options = []
    max_len = max(table.max_source_len, 1)
    for i in range(n):
        for j in range(i + 1, min(n, i + max_len) + 1):
            for target, scores in table.options(sentence[i:j]):
                options.append(Option(i, j, target, log10_scores(scores)))
        if not table.options(sentence[i : i + 1]):
            options.append(Option(i, i + 1, (sentence[i],), (0.0, 0.0, 0.0, 0.0), unknown=True))
    options.sort(key=lambda o: (o.start, o.end, o.target))
    return options


def _lm_word_bounds(model, weights_lm):
    """Optimistic per-word LM contribution for the future-cost estimate.

    With non-positive backoff weights (true for Witten-Bell training) the
    best stored probability of a word bounds its conditional probability
    in any context from above; under a negative LM weight a crude lower
    bound is used instead so the estimate stays optimistic.
    """
    best = {}
    worst = {}
    for gram, prob in model.probs.items():
        w = gram[-1]
        if w not in best or prob > best[w]:
            best[w] = prob
        if w not in worst or prob < worst[w]:
            worst[w] = prob
    if weights_lm >= 0:
        return best
    slack = (model.order - 1) * min(0.0, min(model.backoffs.values(), default=0.0))
    return {w: worst[w] + slack for w in worst}


class Decoder:
    """Reusable search engine over one phrase table / LM / weight vector."""

    def __init__(self, table, model, weights, config=None):
        self.table = table
        self.model = model
        self.weights = weights
        self.config = config or DecoderConfig()
        self._bounds = _lm_word_bounds(model, weights.values[_LM])
        self._unk_bound = self._bounds.get(lm_mod.UNK, 0.0)

    # ---- future cost -------------------------------------------------

    def future_cost_table(self, sentence, options=None):
        """span (i, j exclusive) -> optimistic score for translating it."""
        n = len(sentence)
        if options is None:
            options = collect_options(sentence, self.table)
        best = {}
        for o in options:
            value = self._option_bound(o)
            key = (o.start, o.end)
            if key not in best or value > best[key]:
                best[key] = value
        table = {}
        for length in range(1, n + 1):
            for i in range(n - length + 1):
                j = i + length
                value = best.get((i, j), -math.inf)
                for k in range(i + 1, j):
                    split = table[(i, k)] + table[(k, j)]
                    if split > value:
                        value = split
                table[(i, j)] = value
        return table

    def _option_bound(self, option):
        features = list(_ZERO)
        features[1:5] = option.trans_logs
        lm_bound = 0.0
        for w in option.target:
            lm_bound += self._bounds.get(w, self._unk_bound)
        features[_LM] = lm_bound
        features[_WORD] = -float(len(option.target)) - (
            UNKNOWN_WORD_PENALTY if option.unknown else 0.0
        )
        features[_PHRASE] = -1.0
        return self.weights.dot(tuple(features))

    # ---- search ------------------------------------------------------

    def _expand(self, hyp, option, full_mask, future_table, serial):
        inc = list(_ZERO)
        inc[1:5] = option.trans_logs
        lm_score = 0.0
        context = hyp.context
        for w in option.target:
            lm_score += lm_mod.logprob(self.model, w, context)
            context = (context + (w,))[-(self.model.order - 1) :] if self.model.order > 1 else ()
        inc[_DIST] = -float(distortion_cost(hyp.last_end, option.start))
        inc[_WORD] = -float(len(option.target)) - (
            UNKNOWN_WORD_PENALTY if option.unknown else 0.0
        )
        inc[_PHRASE] = -1.0

        coverage = hyp.coverage | _span_mask(option.start, option.end)
        if coverage == full_mask:
            lm_score += lm_mod.logprob(self.model, lm_mod.END, context)
        inc[_LM] = lm_score
        inc = tuple(inc)
        features = tuple(f + d for f, d in zip(hyp.features, inc))
        # scores accumulate incrementally so that equal-state comparisons
        # carry over to completions exactly (float addition is monotone);
        # the dot product of weights and features agrees to ~1e-12
        inc_score = self.weights.dot(inc)
        score = hyp.score + inc_score
        future = _future_of(coverage, full_mask, future_table)
        return _Hyp(
            coverage, context, option.end - 1, features, score, inc_score, future, hyp, option,
            inc, serial
        )

    def _search(self, sentence):
        sentence = tuple(sentence)
        n = len(sentence)
        options = collect_options(sentence, self.table)
        future_table = self.future_cost_table(sentence, options)
        by_start = {}
        for o in options:
            by_start.setdefault(o.start, []).append(o)
        full_mask = (1 << n) - 1

        start_context = (lm_mod.START,) if self.model.order > 1 else ()
        root = _Hyp(
            0, start_context, -1, _ZERO, 0.0, 0.0, future_table.get((0, n), 0.0), None, None, _ZERO, 0
        )
        stacks = [dict() for _ in range(n + 1)]
        stacks[0][(0, root.context, -1)] = root
        serial = 1
        dl = self.config.distortion_limit

        for covered in range(n):
            for hyp in self._pruned(stacks[covered], final=False):
                start = 0
                while start < n:
                    if hyp.coverage >> start & 1:
                        start += 1
                        continue
                    for option in by_start.get(start, ()):
                        if hyp.coverage & _span_mask(option.start, option.end):
                            continue
                        if dl is not None and distortion_cost(hyp.last_end, option.start) > dl:
                            continue
                        new = self._expand(hyp, option, full_mask, future_table, serial)
                        serial += 1
                        self._insert(stacks[bin(new.coverage).count("1")], new)
                    start += 1
        return stacks

    def _pruned(self, stack, final):
        hyps = sorted(stack.values(), key=lambda h: (-(h.score + h.future), h.serial))
        if final:
            return hyps
        if self.config.beam_threshold is not None and hyps:
            cutoff = hyps[0].score + hyps[0].future - self.config.beam_threshold
            hyps = [h for h in hyps if h.score + h.future >= cutoff]
        return hyps[: self.config.stack_size]

    @staticmethod
    def _insert(stack, new):
        key = (new.coverage, new.context, new.last_end)
        cur = stack.get(key)
        if cur is None:
            stack[key] = new
            return
        better = new.score > cur.score or (
            new.score == cur.score and new.partial_tokens() < cur.partial_tokens()
        )
        if better:
            new.arcs = cur.arcs + [cur]
            cur.arcs = []
            stack[key] = new
        else:
            cur.arcs.append(new)

    # ---- public API ----------------------------------------------------

    def decode(self, sentence):
        """Best translation with its feature vector, score, and derivation."""
        sentence = tuple(sentence)
        if not sentence:
            return Translation((), _ZERO, 0.0, ())
        finals = self._search(sentence)[len(sentence)]
        if not finals:
            raise MinismtError("search produced no complete hypothesis")
        best = None
        best_tokens = None
        for hyp in sorted(finals.values(), key=lambda h: (-h.score, h.serial)):
            if best is not None and hyp.score < best.score:
                break
            tokens = hyp.partial_tokens()
            if best is None or tokens < best_tokens:
                best, best_tokens = hyp, tokens
        return _materialize(best)

    def nbest(self, sentence, n):
        """Up to n distinct translations, best score first.

        Ties are broken toward the lexicographically smaller target string;
        entry 1 always equals decode()'s result.
        """
        if n < 1:
            raise ParameterError("nbest size must be >= 1, got %r" % (n,))
        sentence = tuple(sentence)
        if not sentence:
            return [Translation((), _ZERO, 0.0, ())]
        finals = self._search(sentence)[len(sentence)]
        if not finals:
            raise MinismtError("search produced no complete hypothesis")
        paths = _KBestPaths()
        heap = []
        for rep in sorted(finals.values(), key=lambda h: h.serial):
            first = paths.kth(rep, 0)
            heapq.heappush(heap, (-first[0], rep.serial, rep, 0))

        found = {}
        order_guard = 0
        while heap and order_guard < 50 * n + 200:
            order_guard += 1
            neg, _, rep, rank = heapq.heappop(heap)
            entry = paths.kth(rep, rank)
            if entry is None:
                continue
            _, hyps = entry
            translation = _materialize_path(hyps)
            key = translation.tokens
            if key not in found or translation.score > found[key].score:
                found[key] = translation
            nxt = paths.kth(rep, rank + 1)
            if nxt is not None:
                heapq.heappush(heap, (-nxt[0], rep.serial, rep, rank + 1))
            if len(found) >= n and -neg < min(t.score for t in found.values()) - 1e-9:
                break
        ranked = sorted(found.values(), key=lambda t: (-t.score, t.tokens))
        return ranked[:n]

    def decode_batch(self, sentences):
        return [self.decode(s) for s in sentences]


class _KBestPaths:
    """Lazy k-best path enumeration over the recombination graph."""

    def __init__(self):
        self._state = {}

    def _ensure(self, rep):
        state = self._state.get(id(rep))
        if state is None:
            # every entry's rank-0 path goes through its predecessor's best
            # path, and predecessors are representatives, so the rank-0
            # value is just the entry's own search score
            heap = []
            for entry in [rep] + rep.arcs:
                heapq.heappush(heap, (-entry.score, entry.serial, entry, 0))
            state = {"found": [], "heap": heap}
            self._state[id(rep)] = state
        return state

    def kth(self, rep, k):
        """k-th best (score, hypothesis path) reaching rep's state, or None."""
        state = self._ensure(rep)
        found, heap = state["found"], state["heap"]
        while len(found) <= k and heap:
            neg, _, entry, rank = heapq.heappop(heap)
            if entry.prev is None:
                if rank == 0:
                    found.append((-neg, []))
            else:
                prev_entry = self.kth(entry.prev, rank)
                if prev_entry is not None:
                    found.append((-neg, prev_entry[1] + [entry]))
                    nxt = self.kth(entry.prev, rank + 1)
                    if nxt is not None:
                        heapq.heappush(
                            heap, (-(nxt[0] + entry.inc_score), entry.serial, entry, rank + 1)
                        )
        return found[k] if k < len(found) else None


def _span_mask(start, end):
    return ((1 << (end - start)) - 1) << start


def _future_of(coverage, full_mask, table):
    if coverage == full_mask:
        return 0.0
    total = 0.0
    i = 0
    n = full_mask.bit_length()
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j < n and not (coverage >> j & 1):
            j += 1
        total += table[(i, j)]
        i = j
    return total


def _materialize(hyp):
    return _materialize_path(hyp.path())


def _materialize_path(hyps):
    tokens = []
    features = list(_ZERO)
    steps = []
    score = 0.0
    for node in hyps:
        tokens.extend(node.option.target)
        features = [f + d for f, d in zip(features, node.inc)]
        steps.append(DerivationStep(node.option, node.inc))
        score += node.inc_score
    return Translation(tuple(tokens), tuple(features), score, tuple(steps))
