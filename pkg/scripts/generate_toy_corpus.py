#!/usr/bin/env python3
"""Regenerate the bundled synthetic English-Arabic toy corpus.

Sentences come from a small template grammar over a Buckwalter-
transliterated Arabic vocabulary: VSO order, definite articles, attached
conjunction/preposition/question proclitics, pronominal enclitics, and the
l+Al contraction, so the full tokenization pipeline gets exercised. The
output is deterministic for the fixed seed; run from the repo root:

    python scripts/generate_toy_corpus.py
"""

import random
from pathlib import Path

SEED = 20240601
SPLITS = (("train", 1000), ("dev", 120), ("test", 120))
OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "minismt" / "data"

# (english, buckwalter stem, gender)
NOUNS = [
    ("book", "ktAb", "m"),
    ("pen", "qlm", "m"),
    ("boy", "wld", "m"),
    ("girl", "bnt", "f"),
    ("house", "byt", "m"),
    ("school", "mdrsp", "f"),
    ("teacher", "mElm", "m"),
    ("car", "syArp", "f"),
    ("city", "mdynp", "f"),
    ("garden", "Hdyqp", "f"),
    ("lesson", "drs", "m"),
    ("story", "qSp", "f"),
    ("child", "Tfl", "m"),
    ("mountain", "jbl", "m"),
    ("river", "nhr", "m"),
    ("picture", "Swrp", "f"),
    ("man", "rjl", "m"),
    ("day", "ywm", "m"),
]
# masculine stems are safe hosts for pronominal enclitics (no ta-marbuta)
POSSESSABLE = [n for n in NOUNS if n[2] == "m"]

VERBS = [
    ("read", "qrA"),
    ("wrote", "ktb"),
    ("watched", "$Ahd"),
    ("visited", "zAr"),
    ("loved", "AHb"),
    ("opened", "ftH"),
    ("entered", "dxl"),
]

ADJECTIVES = [
    ("big", "kbyr"),
    ("small", "Sgyr"),
    ("new", "jdyd"),
    ("old", "qdym"),
    ("beautiful", "jmyl"),
    ("long", "Twyl"),
    ("short", "qSyr"),
]

POSSESSIVES = [
    ("his", "h"),
    ("her", "hA"),
    ("their", "hm"),
    ("our", "nA"),
    ("my", "y"),
]

PLACES = [("here", "hnA"), ("there", "hnAk")]


def verb_form(verb_ar, gender):
    return verb_ar + "t" if gender == "f" else verb_ar


def adj_form(adj_ar, gender):
    return adj_ar + "p" if gender == "f" else adj_ar


def make_pair(rng):
    n1 = rng.choice(NOUNS)
    n2 = rng.choice([n for n in NOUNS if n != n1])
    en_v, ar_v = rng.choice(VERBS)
    v = verb_form(ar_v, n1[2])
    template = rng.choices(range(10), weights=(20, 10, 10, 12, 10, 8, 8, 8, 8, 6))[0]

    if template == 0:  # the N1 V the N2 .
        return ("the %s %s the %s ." % (n1[0], en_v, n2[0]), "%s Al%s Al%s ." % (v, n1[1], n2[1]))
    if template == 1:  # the N1 V POS N2 .
        n2 = rng.choice([n for n in POSSESSABLE if n != n1])
        en_p, ar_p = rng.choice(POSSESSIVES)
        return (
            "the %s %s %s %s ." % (n1[0], en_v, en_p, n2[0]),
            "%s Al%s %s%s ." % (v, n1[1], n2[1], ar_p),
        )
    if template == 2:  # and the N1 V the N2 .
        return (
            "and the %s %s the %s ." % (n1[0], en_v, n2[0]),
            "w%s Al%s Al%s ." % (v, n1[1], n2[1]),
        )
    if template == 3:  # the N1 is ADJ .
        en_a, ar_a = rng.choice(ADJECTIVES)
        return ("the %s is %s ." % (n1[0], en_a), "Al%s %s ." % (n1[1], adj_form(ar_a, n1[2])))
    if template == 4:  # the N1 V in the N2 .
        return (
            "the %s %s in the %s ." % (n1[0], en_v, n2[0]),
            "%s Al%s bAl%s ." % (v, n1[1], n2[1]),
        )
    if template == 5:  # did the N1 V the N2 ?
        return (
            "did the %s %s the %s ?" % (n1[0], en_v, n2[0]),
            ">%s Al%s Al%s ?" % (verb_form(ar_v, n1[2]), n1[1], n2[1]),
        )
    if template == 6:  # the N1 V the N2 and the N3 .
        n3 = rng.choice([n for n in NOUNS if n not in (n1, n2)])
        return (
            "the %s %s the %s and the %s ." % (n1[0], en_v, n2[0], n3[0]),
            "%s Al%s Al%s wAl%s ." % (v, n1[1], n2[1], n3[1]),
        )
    if template == 7:  # the N1 V for the N2 .  (l + Al contracts to ll)
        return (
            "the %s %s for the %s ." % (n1[0], en_v, n2[0]),
            "%s Al%s ll%s ." % (v, n1[1], n2[1]),
        )
    if template == 8:  # the ADJ N1 V the N2 .
        en_a, ar_a = rng.choice(ADJECTIVES)
        return (
            "the %s %s %s the %s ." % (en_a, n1[0], en_v, n2[0]),
            "%s Al%s Al%s Al%s ." % (v, n1[1], adj_form(ar_a, n1[2]), n2[1]),
        )
    # the N1 V the N2 PLACE .
    en_pl, ar_pl = rng.choice(PLACES)
    return (
        "the %s %s the %s %s ." % (n1[0], en_v, n2[0], en_pl),
        "%s Al%s Al%s %s ." % (v, n1[1], n2[1], ar_pl),
    )


def main():
    rng = random.Random(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for split, count in SPLITS:
        en_lines, ar_lines = [], []
        for _ in range(count):
            en, ar = make_pair(rng)
            en_lines.append(en)
            ar_lines.append(ar)
        (OUT_DIR / ("toy.%s.en" % split)).write_text("\n".join(en_lines) + "\n", encoding="utf-8")
        (OUT_DIR / ("toy.%s.ar" % split)).write_text("\n".join(ar_lines) + "\n", encoding="utf-8")
        print("wrote %d pairs for %s" % (count, split))


if __name__ == "__main__":
    main()
