"""Writes tests/data/hash_golden.tsv from an independent FNV-1a implementation.

Each line: <text>\t<space-separated bucket indices> for the default featurizer
settings (dim 2^18, unigrams + bigrams, lowercase). The file is frozen; the
C++ featurizer must keep reproducing it.
"""
import re
import sys

DIM = 1 << 18

def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h

def tokens(text: str):
    raw = text.encode("utf-8")
    out, cur = [], bytearray()
    for b in raw:
        if (48 <= b <= 57) or (65 <= b <= 90) or (97 <= b <= 122) or b >= 0x80:
            cur.append(b + 32 if 65 <= b <= 90 else b)
        elif cur:
            out.append(bytes(cur)); cur = bytearray()
    if cur:
        out.append(bytes(cur))
    return out

def buckets(text: str):
    toks = tokens(text)
    grams = list(toks) + [toks[i] + b"\x1f" + toks[i + 1] for i in range(len(toks) - 1)]
    return sorted({fnv1a64(g) % DIM for g in grams})

TEXTS = [
    "The farmworkers' strike resumed on Tuesday when their demands were not met.",
    "The strike resumed.",
    "a b",
    "b a",
    "Police fired tear gas after protesters blocked the highway.",
    "Thousands marched in the capital on Sunday.",
    "demands-were-not met",
    "UPPER lower MiXeD",
    "Workers walked out because wages had not been paid for months.",
    "The rally ended peacefully.",
    "Students protested the tuition hike, which led to clashes.",
    "123 456 7890",
    "Café workers went on strike",
    "x",
    "Due to the lockdown, the protest was cancelled.",
    "Farmers blocked roads to demand higher prices.",
    "The union called off the strike after talks.",
    "Hundreds were arrested as a result of the demonstrations.",
    "no,punctuation;between:tokens",
    "Teachers rallied; schools closed.",
]

for t in TEXTS:
    sys.stdout.write(t + "\t" + " ".join(str(b) for b in buckets(t)) + "\n")
