"""Python access to the word-guessing experiment core."""

import json as _json

from ._core import (
    ClozeError,
    analyze_csv,
    binomial_ci,
    bpc_to_bpw,
    content_hash,
    count_syllables,
    entropy_mean_log,
    ergodic_sequence_probability,
    extract_words,
    ingest,
    linear_fit,
    unpredictability,
    word_entropy_from_letter_entropies,
    zipf_rank_probabilities,
    zipf_word_entropy,
)
from . import _core


def analyze(log, unit="chars", kind="all", trial_type="1", fit_range="", z=1.0, min_bucket_trials=30):
    """Unpredictability by word length over an event log, as a dict."""
    return _json.loads(_core.analyze_json(str(log), unit, kind, str(trial_type), fit_range, z, min_bucket_trials))


def simulate(log, subject, n_trials, seed=0, mix=(1, 1, 1), curve="pow2:0.3", session=""):
    """Play n_trials with an automated subject and append them to the log."""
    return _json.loads(
        _core.simulate_json(str(log), subject, n_trials, seed, list(mix), curve, "cyrillic", 5, session)
    )


__all__ = [
    "ClozeError",
    "analyze",
    "analyze_csv",
    "binomial_ci",
    "bpc_to_bpw",
    "content_hash",
    "count_syllables",
    "entropy_mean_log",
    "ergodic_sequence_probability",
    "extract_words",
    "ingest",
    "linear_fit",
    "simulate",
    "unpredictability",
    "word_entropy_from_letter_entropies",
    "zipf_rank_probabilities",
    "zipf_word_entropy",
]
