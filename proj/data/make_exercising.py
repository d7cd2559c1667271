"""Writes exercising.json, the hand-built premise/hypothesis pair used by the
regression tests for joint decoding.

Premise T: "a man is exercising", tagged confidently.
Hypothesis H: "there is no man exercising". The tagger prefers the correct
categories (man = N, exercising = S[ng]\\NP), but the head scores favour the
misparse (man = N/N, exercising = N) by slightly more, so the baseline parse
is the misparse by about 0.001. In the joint objective the tag scores of
words in a context count twice, which is enough to bring back the correct
parse.
"""

import json
import math
import os

EPS = 1e-7


def tag_row(vocab, probs):
    """Log row over `vocab`; unlisted categories get EPS, the listed ones
    share the rest in proportion to `probs`."""
    rest = 1.0 - EPS * (len(vocab) - len(probs))
    total = sum(probs.values())
    return [math.log(probs[c] / total * rest) if c in probs else math.log(EPS) for c in vocab]


def dep_row(m, heads):
    """Log row over [root, tok0, ..., tok{m-1}]; `heads` maps column -> prob."""
    rest = 1.0 - EPS * (m + 1 - len(heads))
    total = sum(heads.values())
    return [math.log(heads[j] / total * rest) if j in heads else math.log(EPS) for j in range(m + 1)]


def premise():
    vocab = ["NP/N", "N", "(S[dcl]\\NP)/(S[ng]\\NP)", "S[ng]\\NP"]
    tags = [
        tag_row(vocab, {"NP/N": 1.0}),
        tag_row(vocab, {"N": 1.0}),
        tag_row(vocab, {"(S[dcl]\\NP)/(S[ng]\\NP)": 1.0}),
        tag_row(vocab, {"S[ng]\\NP": 1.0}),
    ]
    # a -> is, man -> a, is -> root, exercising -> is
    deps = [dep_row(4, {3: 1.0}), dep_row(4, {1: 1.0}), dep_row(4, {0: 1.0}), dep_row(4, {3: 1.0})]
    return {
        "role": "T",
        "tokens": ["A", "man", "is", "exercising"],
        "lemmas": ["a", "man", "be", "exercise"],
        "categories": vocab,
        "tag_log_prob": tags,
        "dep_log_prob": deps,
    }


def hypothesis():
    vocab = ["NP[thr]", "(S[dcl]\\NP[thr])/NP", "NP/N", "N", "N/N", "S[ng]\\NP"]
    man_tags = {"N": 0.55, "N/N": 0.45}
    ex_tags = {"N": 0.4, "S[ng]\\NP": 0.6}
    tags = [
        tag_row(vocab, {"NP[thr]": 1.0}),
        tag_row(vocab, {"(S[dcl]\\NP[thr])/NP": 1.0}),
        tag_row(vocab, {"NP/N": 1.0}),
        tag_row(vocab, man_tags),
        tag_row(vocab, ex_tags),
    ]
    # Correct parse: exercising -> man, man -> no. Misparse: exercising ->
    # no, and man -> no or man -> exercising (equal scores). The tags favour
    # the correct parse by tag_gap; the exercising row takes back tag_gap
    # plus 0.001.
    tag_gap = math.log(0.55 / 0.45) + math.log(0.6 / 0.4)
    p = 1.0 / (1.0 + math.exp(tag_gap + 0.001))
    deps = [
        dep_row(5, {2: 1.0}),              # there -> is
        dep_row(5, {0: 1.0}),              # is -> root
        dep_row(5, {2: 1.0}),              # no -> is
        dep_row(5, {3: 0.5, 5: 0.5}),      # man -> no | exercising
        dep_row(5, {4: p, 3: 1.0 - p}),    # exercising -> man | no
    ]
    return {
        "role": "H",
        "tokens": ["There", "is", "no", "man", "exercising"],
        "lemmas": ["there", "be", "no", "man", "exercise"],
        "categories": vocab,
        "tag_log_prob": tags,
        "dep_log_prob": deps,
    }


def main():
    doc = {
        "description": (
            "Hand-built scores. Baseline H: man = N/N, exercising = N, ahead of the "
            "correct parse by about 0.001 because the head scores outweigh the tags. "
            "Joint decoding with T restores man = N, exercising = S[ng]\\NP. "
            "Generated by make_exercising.py."
        ),
        "sentences": [premise(), hypothesis()],
    }
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "exercising.json")
    with open(out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
