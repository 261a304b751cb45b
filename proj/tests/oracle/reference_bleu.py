"""Reference corpus BLEU, independent of the C++ implementation.

Implements the standard mteval-13a tokenization and corpus BLEU with
"exp" smoothing and the usual brevity penalty, following the public
reference scorer's algorithm. Used once to freeze the expected values in
tests/data/bleu_oracle.json; the C++ tests compare against those frozen
numbers, never against this module at runtime.
"""

import math
import re
from collections import Counter

_RULES = [
    # language-dependent part (Western languages): pad ASCII symbols
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    # tokenize period and comma unless preceded by a digit
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    # tokenize period and comma unless followed by a digit
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    # tokenize dash when preceded by a digit
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
]


def tokenize_13a(line):
    line = line.replace("<skipped>", "")
    line = line.replace("-\n", "")
    line = line.replace("\n", " ")
    if "&" in line:
        line = line.replace("&quot;", '"')
        line = line.replace("&amp;", "&")
        line = line.replace("&lt;", "<")
        line = line.replace("&gt;", ">")
    line = f" {line} "
    for pattern, repl in _RULES:
        line = pattern.sub(repl, line)
    return line.split()


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _my_log(x):
    return -9999999999 if x == 0.0 else math.log(x)


def corpus_bleu(hypotheses, references, max_order=4):
    """Returns (bleu_by_order_1..max_order, precisions, bp, hyp_len, ref_len)."""
    assert len(hypotheses) == len(references) and hypotheses
    correct = [0] * max_order
    total = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h = tokenize_13a(hyp)
        r = tokenize_13a(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_order + 1):
            hyp_ngrams = _ngrams(h, n)
            ref_ngrams = _ngrams(r, n)
            for gram, count in hyp_ngrams.items():
                total[n - 1] += count
                correct[n - 1] += min(count, ref_ngrams.get(gram, 0))

    if hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    else:
        bp = 1.0

    def precisions_at(order):
        precs = [0.0] * order
        smooth_mteval = 1.0
        for n in range(1, order + 1):
            if total[n - 1] == 0:
                break
            if correct[n - 1] == 0:
                smooth_mteval *= 2
                precs[n - 1] = 100.0 / (smooth_mteval * total[n - 1])
            else:
                precs[n - 1] = 100.0 * correct[n - 1] / total[n - 1]
        return precs

    scores = []
    for order in range(1, max_order + 1):
        precs = precisions_at(order)
        scores.append(bp * math.exp(sum(_my_log(p) for p in precs) / order))
    return scores, precisions_at(max_order), bp, hyp_len, ref_len
