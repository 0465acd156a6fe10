"""Reference implementation of the summed negative log-likelihood."""

from __future__ import annotations

import numpy as np

_ROW_SUM_TOL = 1e-6


def nll_loss(predicted_distributions, reference_tokens) -> float:
    """Summed NLL of the reference tokens under per-step distributions.

    ``predicted_distributions`` is a (T, V) array of probability rows, one per
    reference token; the loss is ``-sum_t log p_t[reference_t]`` (summed over
    steps, not averaged). Rows must sum to 1 within 1e-6; a zero probability
    at a reference token is rejected rather than returned as infinity.
    """
    rows = np.asarray(predicted_distributions, dtype=np.float64)
    refs = np.asarray(reference_tokens, dtype=np.int64)
    if rows.ndim != 2:
        raise ValueError("predicted_distributions must be a (steps, vocab) array")
    if refs.ndim != 1 or rows.shape[0] != refs.shape[0]:
        raise ValueError(
            f"need one distribution row per reference token "
            f"(got {rows.shape[0]} rows, {refs.shape[0]} tokens)"
        )
    if refs.size and (refs.min() < 0 or refs.max() >= rows.shape[1]):
        raise ValueError("reference token id outside the vocabulary")
    sums = rows.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=_ROW_SUM_TOL):
        raise ValueError("each probability row must sum to 1 within 1e-6")
    picked = rows[np.arange(refs.shape[0]), refs]
    if np.any(picked <= 0.0):
        step = int(np.argmax(picked <= 0.0))
        raise ValueError(f"zero probability at reference token (step {step})")
    return float(-np.log(picked).sum())
