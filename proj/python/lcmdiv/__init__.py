"""Minimum phi-divergence estimation for constrained latent class models.

Thin wrapper over the C++ core; model documents and pattern-count CSVs use
the same formats as the `lcm` command line tool.
"""

from ._core import (
    ModelSpec,
    ParseError,
    asymptotics,
    class_weights,
    content_hash,
    fit,
    item_probabilities,
    log_likelihood,
    manifest_distribution,
    manifest_jacobian,
    parse_counts,
    parse_model_spec,
    parse_real,
    power_divergence,
    run_study,
    sample_dataset,
    serialize_model_spec,
)

__all__ = [
    "ModelSpec",
    "ParseError",
    "asymptotics",
    "class_weights",
    "content_hash",
    "fit",
    "item_probabilities",
    "log_likelihood",
    "manifest_distribution",
    "manifest_jacobian",
    "parse_counts",
    "parse_model_spec",
    "parse_real",
    "power_divergence",
    "run_study",
    "sample_dataset",
    "serialize_model_spec",
    "load_model",
    "load_counts",
]

__version__ = "0.1.0"


def load_model(path):
    """Parse a model spec JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model_spec(fh.read())


def load_counts(path, k):
    """Parse a pattern-count CSV file for a k-item model."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_counts(fh.read(), k)
