"""Perceptron mistake bounds.

Thin layer over the compiled ``_core`` module. Streams are lists of
``LabeledExample``; ``make_stream`` builds one from array-likes.
"""

from ._core import *  # noqa: F401,F403
from ._core import LabeledExample

__version__ = "0.1.0"


def make_stream(X, y):
    """Builds a stream from an (n_rounds, n_features) array-like and labels in {-1, +1}."""
    rows = [list(map(float, x)) for x in X]
    labels = [int(v) for v in y]
    if len(rows) != len(labels):
        raise ValueError(f"{len(rows)} rows but {len(labels)} labels")
    return [LabeledExample(x, v) for x, v in zip(rows, labels)]
