"""Subsystem combination: embedding averaging, cosine scoring, score fusion.

Two fusion rules are provided. Linear fusion is a plain weighted sum of
subsystem scores. The weighted negative-LogSumExp rule is a smooth minimum
of calibrated LLRs:

    fused = -log(p * exp(-llr_asv) + (1 - p) * exp(-llr_cm))

with the convex weight p on the verification subsystem. It is exact for
identical inputs (weights sum to one), reduces to either input at p = 1 or
p = 0, and is evaluated in shifted form so |llr| up to 700 stays finite.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import DataError, ValidationError
from .io import SasvTrialSet
from .metrics import CostModel, SasvScores, TandemScores, a_dcf


def enroll_average(embeddings: Sequence[np.ndarray]) -> np.ndarray:
    """Componentwise mean of enrollment embeddings."""
    if len(embeddings) == 0:
        raise DataError("no enrollment embeddings to average")
    stacked = [np.asarray(e, dtype=np.float64).ravel() for e in embeddings]
    dim = stacked[0].size
    if any(e.size != dim for e in stacked):
        raise ValidationError("enrollment embeddings have mismatched dimensions")
    return np.mean(stacked, axis=0)


def cosine_score(e1: np.ndarray, e2: np.ndarray) -> float:
    """Cosine similarity, clamped into [-1, 1] against rounding."""
    a = np.asarray(e1, dtype=np.float64).ravel()
    b = np.asarray(e2, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValidationError("embeddings have mismatched dimensions")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValidationError("cannot score a zero-norm embedding")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def linear_fuse(scores: Sequence, weights: Sequence[float]):
    """Weighted sum of per-subsystem scores (scalars or aligned arrays)."""
    if len(scores) != len(weights):
        raise ValidationError(
            f"{len(scores)} score sets for {len(weights)} weights"
        )
    if len(weights) == 0 or all(w == 0 for w in weights):
        raise ValidationError("need at least one non-zero weight")
    arrays = [np.asarray(s, dtype=np.float64) for s in scores]
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValidationError("subsystem score lists have mismatched lengths")
    fused = sum(w * a for w, a in zip(weights, arrays))
    return float(fused) if fused.ndim == 0 else fused


def lse_fuse(llr_cm, llr_asv, p: float):
    """Smooth-minimum fusion of calibrated CM and ASV LLRs.

    p weights the ASV term, 1 - p the CM term; p = 1 and p = 0 pass the
    respective input through exactly. Accepts scalars or aligned arrays.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"fusion weight p must lie in [0, 1], got {p}")
    cm = np.asarray(llr_cm, dtype=np.float64)
    asv = np.asarray(llr_asv, dtype=np.float64)
    scalar = cm.ndim == 0 and asv.ndim == 0
    if p == 1.0:
        fused = np.broadcast_arrays(asv, cm)[0]
    elif p == 0.0:
        fused = np.broadcast_arrays(cm, asv)[0]
    else:
        neg_asv = -asv
        neg_cm = -cm
        shift = np.maximum(neg_asv, neg_cm)
        fused = -(
            shift
            + np.log(p * np.exp(neg_asv - shift) + (1.0 - p) * np.exp(neg_cm - shift))
        )
    return float(fused) if scalar else np.array(fused, dtype=np.float64)


def fuse_trials(trials: SasvTrialSet, p: float) -> SasvScores:
    """LSE-fuse the paired scores of a trial set into per-class fused scores."""
    tandem = TandemScores.from_trials(trials)
    return SasvScores(
        target=lse_fuse(tandem.target_cm, tandem.target_asv, p),
        nontarget=lse_fuse(tandem.nontarget_cm, tandem.nontarget_asv, p),
        spoof=lse_fuse(tandem.spoof_cm, tandem.spoof_asv, p),
    )


def weight_grid(grid: tuple[float, float, float]) -> list[float]:
    """Expand a (start, stop, step) grid, endpoints inclusive."""
    start, stop, step = grid
    if step <= 0:
        raise ValidationError("grid step must be positive")
    if not 0.0 <= start <= stop <= 1.0:
        raise ValidationError("grid must satisfy 0 <= start <= stop <= 1")
    n = int((stop - start) / step + 1e-9) + 1
    points = [start + k * step for k in range(n)]
    if not points:
        raise ValidationError("empty weight grid")
    return points


def evaluate_weight_grid(
    trials: SasvTrialSet,
    objective: Callable[[SasvScores, float], float] | None = None,
    cost: CostModel | None = None,
    grid: tuple[float, float, float] = (0.0, 1.0, 0.05),
) -> list[tuple[float, float]]:
    """Objective value of the LSE fusion at every grid weight.

    The default objective is the minimum a-DCF of the fused scores, which
    requires a cost model; a custom objective receives the fused scores and
    the weight.
    """
    if objective is None:
        if cost is None:
            raise ValidationError("provide an objective or a cost model")

        def objective(fused: SasvScores, _p: float) -> float:
            return a_dcf(fused, cost)[0]

    return [(p, float(objective(fuse_trials(trials, p), p))) for p in weight_grid(grid)]


def grid_search_weight(
    trials: SasvTrialSet,
    objective: Callable[[SasvScores, float], float] | None = None,
    cost: CostModel | None = None,
    grid: tuple[float, float, float] = (0.0, 1.0, 0.05),
) -> tuple[float, float]:
    """Best LSE weight on a grid: (weight, objective value).

    Deterministic and invariant to evaluation order; ties resolve to the
    smallest weight.
    """
    table = evaluate_weight_grid(trials, objective, cost, grid)
    return min(table, key=lambda row: (row[1], row[0]))
