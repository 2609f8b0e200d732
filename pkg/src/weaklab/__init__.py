"""Weakly-supervised text triage toolkit.

Pipeline: expand label names into scored phrase vocabularies, pseudo-label
an unlabelled corpus by cumulative vocabulary matching, train a probabilistic
classifier on the pseudo-labels, refine it by soft-label self-training, and
optionally merge predictions from several triage models. A full evaluation
metric suite is included.
"""

__version__ = "0.1.0"
