#!/usr/bin/env python3
"""Brute-force reference values for BLEU and ROUGE-L.

Written straight from the metric definitions and deliberately naive:
n-grams are counted by slicing, and the LCS is found by enumerating every
subsequence of the shorter sentence. The output is frozen into
tests/data/metrics_fixture/expected.json and compared against the library.

usage: metrics_oracle.py hyp.txt ref.txt > expected.json
"""

import itertools
import json
import math
import sys

EPS = 1e-9
MAX_ORDER = 4


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def clipped_matches(hyp, ref, n):
    hyp_grams = ngrams(hyp, n)
    ref_grams = ngrams(ref, n)
    total = 0
    for gram in set(hyp_grams):
        total += min(hyp_grams.count(gram), ref_grams.count(gram))
    return total, len(hyp_grams)


def corpus_bleu(pairs):
    c = sum(len(h) for h, _ in pairs)
    r = sum(len(rf) for _, rf in pairs)
    if c == 0:
        return 0.0
    logs = []
    for n in range(1, MAX_ORDER + 1):
        matched = 0
        candidates = 0
        for h, rf in pairs:
            m, k = clipped_matches(h, rf, n)
            matched += m
            candidates += k
        if candidates == 0:
            continue
        p = matched / candidates if matched > 0 else EPS
        logs.append(math.log(p))
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(logs) / len(logs))


def is_subsequence(sub, seq):
    it = iter(seq)
    return all(tok in it for tok in sub)


def lcs_brute(a, b):
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for size in range(len(short), 0, -1):
        for idx in itertools.combinations(range(len(short)), size):
            if is_subsequence([short[i] for i in idx], long_):
                return size
    return 0


def rouge_l(hyp, ref):
    if not hyp or not ref:
        return 0.0, 0.0, 0.0
    lcs = lcs_brute(hyp, ref)
    p = lcs / len(hyp)
    r = lcs / len(ref)
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f


def main():
    with open(sys.argv[1], encoding="utf-8") as f:
        hyps = [line.rstrip("\n").split() for line in f]
    with open(sys.argv[2], encoding="utf-8") as f:
        refs = [line.rstrip("\n").split() for line in f]
    assert len(hyps) == len(refs)
    pairs = list(zip(hyps, refs))
    sentences = []
    for h, rf in pairs:
        p, r, f = rouge_l(h, rf)
        sentences.append({
            "bleu": corpus_bleu([(h, rf)]),
            "rouge_l_p": p,
            "rouge_l_r": r,
            "rouge_l_f": f,
        })
    n = len(pairs)
    out = {
        "n_sentences": n,
        "bleu": corpus_bleu(pairs),
        "rouge_l_p": sum(s["rouge_l_p"] for s in sentences) / n,
        "rouge_l_r": sum(s["rouge_l_r"] for s in sentences) / n,
        "rouge_l_f": sum(s["rouge_l_f"] for s in sentences) / n,
        "sentences": sentences,
    }
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
