"""Sentence-aligned parallel corpora: loading, cleaning, statistics, markup stripping.

Tokenization here is whitespace splitting only; language-specific
segmentation lives in `artok`. All containers are immutable after
construction and safe to share across threads.
"""

import logging
import re
from dataclasses import dataclass

from .errors import CorpusAlignmentError, ParameterError

log = logging.getLogger(__name__)

Sentence = tuple  # tuple of whitespace-free token strings


@dataclass(frozen=True)
class SentencePair:
    source: Sentence
    target: Sentence
    pair_id: int


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple
    source_lang: str = "src"
    target_lang: str = "tgt"

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class SideStats:
    lines: int
    tokens: int
    vocabulary: int
    max_len: int
    mean_len: float


@dataclass(frozen=True)
class CorpusStats:
    source: SideStats
    target: SideStats


def tokenize_line(line):
    """Whitespace tokenization; empty lines give an empty sentence."""
    return tuple(line.split())


def load_parallel(source_path, target_path, source_lang=None, target_lang=None):
    """Pair up two one-sentence-per-line UTF-8 files, preserving line order.

    Raises CorpusAlignmentError (naming both counts) when the files have
    different numbers of lines; I/O problems surface as OSError.
    """
    with open(source_path, encoding="utf-8") as f:
        source_lines = f.read().splitlines()
    with open(target_path, encoding="utf-8") as f:
        target_lines = f.read().splitlines()
    if len(source_lines) != len(target_lines):
        raise CorpusAlignmentError(
            "line count mismatch: %s has %d lines, %s has %d lines"
            % (source_path, len(source_lines), target_path, len(target_lines))
        )
    pairs = tuple(
        SentencePair(tokenize_line(s), tokenize_line(t), i)
        for i, (s, t) in enumerate(zip(source_lines, target_lines))
    )
    return ParallelCorpus(
        pairs,
        source_lang or _suffix(source_path),
        target_lang or _suffix(target_path),
    )


def _suffix(path):
    name = str(path)
    return name.rsplit(".", 1)[1] if "." in name else "src"


def clean(corpus, max_len=80, max_ratio=9.0):
    """Drop pairs with an empty side, an over-long side, or an extreme length ratio.

    Surviving pairs keep their order and are re-numbered densely from 0.
    Idempotent.
    """
    if max_len < 1:
        raise ParameterError("max_len must be >= 1, got %r" % (max_len,))
    if max_ratio < 1.0:
        raise ParameterError("max_ratio must be >= 1.0, got %r" % (max_ratio,))
    kept = []
    for pair in corpus.pairs:
        ls, lt = len(pair.source), len(pair.target)
        if ls == 0 or lt == 0:
            continue
        if ls > max_len or lt > max_len:
            continue
        if max(ls / lt, lt / ls) > max_ratio:
            continue
        kept.append(SentencePair(pair.source, pair.target, len(kept)))
    return ParallelCorpus(tuple(kept), corpus.source_lang, corpus.target_lang)


def stats(corpus):
    """Exact line/token/vocabulary/length statistics for both sides."""
    return CorpusStats(
        _side_stats([p.source for p in corpus.pairs]),
        _side_stats([p.target for p in corpus.pairs]),
    )


def _side_stats(sentences):
    tokens = sum(len(s) for s in sentences)
    vocab = set()
    for s in sentences:
        vocab.update(s)
    max_len = max((len(s) for s in sentences), default=0)
    mean_len = tokens / len(sentences) if sentences else 0.0
    return SideStats(len(sentences), tokens, len(vocab), max_len, mean_len)


def format_stats_table(cs, source_lang="source", target_lang="target"):
    """Two-column words/lines table plus machine-readable key=value lines."""
    rows = [
        ("", "words", "lines"),
        (source_lang, str(cs.source.tokens), str(cs.source.lines)),
        (target_lang, str(cs.target.tokens), str(cs.target.lines)),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    for side, ss in (("source", cs.source), ("target", cs.target)):
        lines.append("%s_lines=%d" % (side, ss.lines))
        lines.append("%s_tokens=%d" % (side, ss.tokens))
        lines.append("%s_vocabulary=%d" % (side, ss.vocabulary))
        lines.append("%s_max_len=%d" % (side, ss.max_len))
        lines.append("%s_mean_len=%.4f" % (side, ss.mean_len))
    return "\n".join(lines) + "\n"


_TAG = re.compile(r"<(/?)([A-Za-z][-\w.]*)((?:[^>\"']|\"[^\"]*\"|'[^']*')*)>")
_ENTITY = re.compile(r"&(amp|lt|gt);")
_ENTITY_MAP = {"amp": "&", "lt": "<", "gt": ">"}

SEGMENT_ELEMENTS = frozenset({"seg"})


def strip_markup(document, segment_elements=SEGMENT_ELEMENTS):
    """Extract the text of segment-bearing elements from shallow SGML/XML.

    Tags inside a segment are dropped; `&amp;` `&lt;` `&gt;` are decoded once;
    whitespace is collapsed. Anything that does not scan as a tag (a lone
    `<`, for instance) is literal text. A closing tag with no matching open
    tag is logged and treated as literal text; a segment left open at end of
    document is logged and its buffered text is still returned.
    """
    segments = []
    buf = []
    in_seg = False
    pos = 0
    for m in _TAG.finditer(document):
        if in_seg:
            buf.append(document[pos : m.start()])
        pos = m.end()
        closing, name = m.group(1) == "/", m.group(2).lower()
        if name not in segment_elements:
            continue  # non-segment tags are simply dropped
        if not closing:
            if in_seg:
                log.warning("nested <%s> tag treated as literal text", name)
                buf.append(m.group(0))
            else:
                in_seg, buf = True, []
        else:
            if in_seg:
                segments.append(_finish_segment(buf))
                in_seg = False
            else:
                log.warning("unbalanced closing tag %s treated as literal text", m.group(0))
    if in_seg:
        buf.append(document[pos:])
        log.warning("segment still open at end of document; emitting buffered text")
        segments.append(_finish_segment(buf))
    return segments


def _finish_segment(parts):
    text = _ENTITY.sub(lambda m: _ENTITY_MAP[m.group(1)], "".join(parts))
    return " ".join(text.split())
