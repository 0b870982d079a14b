"""Backoff n-gram language models (orders 1-5) with ARPA serialization.

Sentences are padded with a single start symbol (contexts truncate near
the sentence start, the ARPA-ecosystem convention) and one end symbol,
which is a scored event. Two estimators:

* ``witten-bell`` -- interpolated Witten-Bell, stored in backoff form.
  The start symbol is context only, never a predicted event; the unknown
  symbol is reserved with a floor count of 1, so scoring is total and
  every observed context's conditional distribution sums to one over the
  event vocabulary.
* ``mle`` -- relative frequencies over the padded token stream, zero mass
  to unseen events. Hand-checkable; not for decoding.

All probabilities are log10.
"""

import math
from dataclasses import dataclass, field

from .errors import FormatError, ParameterError, TrainingError

START = "<s>"
END = "</s>"
UNK = "<unk>"

MAX_ORDER = 5
NEG_INF = float("-inf")
_NO_PROB = -99.0  # ARPA sentinel for the unscored start symbol


@dataclass(frozen=True)
class NGramModel:
    order: int
    smoothing: str
    probs: dict  # token tuple -> log10 conditional probability
    backoffs: dict  # context tuple -> log10 backoff weight
    vocab: frozenset = field(default=frozenset())

    def event_vocab(self):
        """Tokens that can be predicted: vocabulary minus the start symbol."""
        return self.vocab - {START}

    def logprob(self, word, context=()):
        return logprob(self, word, context)

    def sentence_logprob(self, sentence):
        return sentence_logprob(self, sentence)


def _count_windows(sentences, order):
    counts = [None] + [{} for _ in range(order)]
    for sentence in sentences:
        padded = (START,) + tuple(sentence) + (END,)
        for m in range(1, order + 1):
            table = counts[m]
            for i in range(len(padded) - m + 1):
                gram = padded[i : i + m]
                table[gram] = table.get(gram, 0) + 1
    return counts


def train(sentences, order, smoothing="witten-bell"):
    """Estimate an NGramModel from tokenized sentences."""
    if not 1 <= order <= MAX_ORDER:
        raise ParameterError("order must be in 1..%d, got %r" % (MAX_ORDER, order))
    if smoothing not in ("witten-bell", "mle"):
        raise ParameterError("smoothing must be 'witten-bell' or 'mle', got %r" % smoothing)
    sentences = [tuple(s) for s in sentences]
    if not sentences:
        raise TrainingError("cannot train a language model on an empty corpus")
    for i, s in enumerate(sentences):
        if len(s) == 0:
            raise TrainingError("sentence %d is empty; training requires nonempty sentences" % i)

    counts = _count_windows(sentences, order)
    if smoothing == "mle":
        probs = _estimate_mle(counts, order)
        backoffs = {}
        vocab = frozenset(w for (w,) in counts[1])
    else:
        probs, backoffs = _estimate_witten_bell(counts, order)
        vocab = frozenset(w for (w,) in counts[1]) | {UNK}
    return NGramModel(order, smoothing, probs, backoffs, vocab)


def _estimate_mle(counts, order):
    probs = {}
    total = sum(counts[1].values())  # padded stream length, start symbol included
    for gram, c in counts[1].items():
        probs[gram] = math.log10(c / total)
    for m in range(2, order + 1):
        for gram, c in counts[m].items():
            probs[gram] = math.log10(c / counts[m - 1][gram[:-1]])
    return probs


def _estimate_witten_bell(counts, order):
    # unigram base: event counts over everything but the start symbol,
    # with a floor count of 1 for the unknown symbol
    events = {w: c for (w,), c in counts[1].items() if w != START}
    events[UNK] = events.get(UNK, 0) + 1
    total = sum(events.values())
    linear = {(w,): c / total for w, c in events.items()}

    for m in range(2, order + 1):
        by_context = {}
        for gram, c in counts[m].items():
            by_context.setdefault(gram[:-1], {})[gram[-1]] = c
        for context, continuations in by_context.items():
            ctx_total = sum(continuations.values())
            types = len(continuations)
            denom = ctx_total + types
            for w, c in continuations.items():
                linear[context + (w,)] = (c + types * linear[context[1:] + (w,)]) / denom

    probs = {gram: math.log10(p) for gram, p in linear.items()}

    backoffs = {}
    for m in range(2, order + 1):
        seen = {}
        for gram, c in counts[m].items():
            seen.setdefault(gram[:-1], [0, 0])
            seen[gram[:-1]][0] += c
            seen[gram[:-1]][1] += 1
        for context, (ctx_total, types) in seen.items():
            backoffs[context] = math.log10(types / (ctx_total + types))
    return probs, backoffs


def logprob(model, word, context=()):
    """log10 P(word | context); contexts longer than order-1 are truncated.

    Witten-Bell models resolve unseen n-grams through backoff weights and
    map out-of-vocabulary words to the unknown symbol; mle models assign
    them zero probability (-inf).
    """
    ctx = tuple(context)
    if model.order > 1:
        ctx = ctx[-(model.order - 1) :]
    else:
        ctx = ()
    if word == START or (word,) not in model.probs:
        word = UNK

    if model.smoothing == "mle":
        return model.probs.get(ctx + (word,), NEG_INF)

    score = 0.0
    while True:
        hit = model.probs.get(ctx + (word,))
        if hit is not None:
            return score + hit
        if not ctx:
            return NEG_INF  # only reachable for models without <unk>
        score += model.backoffs.get(ctx, 0.0)
        ctx = ctx[1:]


def sentence_logprob(model, sentence):
    """log10 probability of a sentence: the sum of per-event logprob calls.

    Events are each sentence token plus the end symbol, conditioned on the
    padded history.
    """
    padded = (START,) + tuple(sentence) + (END,)
    total = 0.0
    for i in range(1, len(padded)):
        total += logprob(model, padded[i], padded[:i])
    return total


def perplexity(model, sentences):
    """10^(-logprob/events) over a corpus; events include each end symbol."""
    sentences = [tuple(s) for s in sentences]
    if not sentences:
        raise ParameterError("perplexity needs a nonempty corpus")
    total = 0.0
    events = 0
    for s in sentences:
        total += sentence_logprob(model, s)
        events += len(s) + 1
    if total == NEG_INF:
        return float("inf")
    return 10.0 ** (-total / events)


def conditional_sum(model, context):
    """Sum of the backoff-resolved conditional distribution over the event vocabulary."""
    return sum(10.0 ** logprob(model, w, context) for w in sorted(model.event_vocab()))


def write_arpa(model, path):
    """Serialize in the standard ARPA text layout (log10, tab-separated)."""
    grams_by_order = [[] for _ in range(model.order + 1)]
    for gram in model.probs:
        grams_by_order[len(gram)].append(gram)
    if model.smoothing != "mle" and (START,) not in model.probs and START in model.vocab:
        grams_by_order[1].append((START,))
    for grams in grams_by_order[1:]:
        grams.sort()

    lines = ["\\data\\"]
    for m in range(1, model.order + 1):
        lines.append("ngram %d=%d" % (m, len(grams_by_order[m])))
    for m in range(1, model.order + 1):
        lines.append("")
        lines.append("\\%d-grams:" % m)
        for gram in grams_by_order[m]:
            prob = model.probs.get(gram, _NO_PROB)
            entry = "%.7f\t%s" % (prob, " ".join(gram))
            if gram in model.backoffs:
                entry += "\t%.7f" % model.backoffs[gram]
            lines.append(entry)
    lines.append("")
    lines.append("\\end\\")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def read_arpa(path):
    """Parse an ARPA file back into an NGramModel; malformed input raises FormatError."""
    with open(path, encoding="utf-8") as f:
        raw = f.read().splitlines()

    def fail(lineno, message):
        raise FormatError("%s line %d: %s" % (path, lineno + 1, message))

    idx = 0
    while idx < len(raw) and raw[idx].strip() != "\\data\\":
        if raw[idx].strip():
            fail(idx, "expected \\data\\ header, found %r" % raw[idx])
        idx += 1
    if idx == len(raw):
        raise FormatError("%s: missing \\data\\ header" % path)
    idx += 1

    declared = {}
    while idx < len(raw) and raw[idx].strip():
        line = raw[idx].strip()
        if not line.startswith("ngram "):
            fail(idx, "expected 'ngram N=count', found %r" % line)
        try:
            left, right = line[len("ngram ") :].split("=")
            declared[int(left)] = int(right)
        except ValueError:
            fail(idx, "malformed count line %r" % line)
        idx += 1
    if not declared or sorted(declared) != list(range(1, max(declared) + 1)):
        raise FormatError("%s: malformed \\data\\ section (orders %s)" % (path, sorted(declared)))
    order = max(declared)

    probs, backoffs = {}, {}
    listed = dict.fromkeys(declared, 0)
    current = None
    ended = False
    for lineno in range(idx, len(raw)):
        line = raw[lineno].strip()
        if not line:
            continue
        if line == "\\end\\":
            ended = True
            break
        if line.endswith("-grams:") and line.startswith("\\"):
            try:
                current = int(line[1:].split("-")[0])
            except ValueError:
                fail(lineno, "bad section header %r" % line)
            if current not in declared:
                fail(lineno, "section %r was not declared" % line)
            continue
        if current is None:
            fail(lineno, "entry before any n-gram section: %r" % line)
        fields = raw[lineno].strip().split("\t")
        if len(fields) not in (2, 3):
            fail(lineno, "expected 2 or 3 tab-separated fields, got %d" % len(fields))
        try:
            prob = float(fields[0])
        except ValueError:
            fail(lineno, "bad probability %r" % fields[0])
        gram = tuple(fields[1].split())
        if len(gram) != current:
            fail(lineno, "%d-gram %r in \\%d-grams: section" % (len(gram), fields[1], current))
        probs[gram] = prob
        if len(fields) == 3:
            try:
                backoffs[gram] = float(fields[2])
            except ValueError:
                fail(lineno, "bad backoff weight %r" % fields[2])
        listed[current] += 1
    if not ended:
        raise FormatError("%s: missing \\end\\ marker" % path)
    for m, n in declared.items():
        if listed[m] != n:
            raise FormatError(
                "%s: declared %d %d-grams but listed %d" % (path, n, m, listed[m])
            )

    vocab = frozenset(g[0] for g in probs if len(g) == 1)
    # pure-lookup entries: drop the start symbol's placeholder probability
    if (START,) in probs and probs[(START,)] <= _NO_PROB:
        probs = dict(probs)
        del probs[(START,)]
    return NGramModel(order, "witten-bell", probs, backoffs, vocab)
