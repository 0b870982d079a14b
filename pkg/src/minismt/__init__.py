"""minismt: a miniature phrase-based statistical machine translation toolkit.

Covers the classic pipeline end to end at desk scale: parallel corpus
handling, rule-based Arabic clitic tokenization, backoff n-gram language
models (ARPA), IBM Model 1 word alignment, phrase extraction and scoring,
stack-based beam-search decoding, MERT weight tuning, and BLEU evaluation.
"""

__version__ = "0.1.0"
