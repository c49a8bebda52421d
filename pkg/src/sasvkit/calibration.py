"""Monotone-rising raw-score to LLR calibrators.

Two parametric families are provided, both with a non-negative slope so the
fitted map never reverses score order:

* logistic regression: ``llr = w * s + b`` fitted on raw scores;
* univariate beta calibration: ``llr = a * log(s' / (1 - s')) + c`` where
  ``s'`` is the score scaled into the unit interval. Fitting reduces to
  logistic regression on the log-odds feature.

A pool-adjacent-violators step calibrator is included as the optimal
monotone reference for testing the parametric fits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SolverError, ValidationError

SCALING_KINDS = ("cosine_affine", "logistic", "identity")


@dataclass(frozen=True)
class ScoreScaling:
    """Map raw scores into [epsilon, 1 - epsilon] before beta calibration."""

    kind: str = "cosine_affine"
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.kind not in SCALING_KINDS:
            raise ValidationError(f"unknown scaling kind '{self.kind}'")
        if not 0.0 < self.epsilon < 0.5:
            raise ValidationError("epsilon must lie in (0, 0.5)")


def scale_to_unit(scores, scaling: ScoreScaling) -> np.ndarray:
    """Scale scores into the clamped unit interval.

    cosine_affine maps [-1, 1] affinely via (s + 1) / 2 (values outside are
    clamped); logistic applies the standard sigmoid; identity only clamps.
    """
    s = np.asarray(scores, dtype=np.float64)
    if scaling.kind == "cosine_affine":
        unit = (s + 1.0) / 2.0
    elif scaling.kind == "logistic":
        # stable sigmoid
        unit = np.where(s >= 0, 1.0 / (1.0 + np.exp(-s)), np.exp(s) / (1.0 + np.exp(s)))
    else:
        unit = s
    return np.clip(unit, scaling.epsilon, 1.0 - scaling.epsilon)


def _logit(p: np.ndarray) -> np.ndarray:
    return np.log(p) - np.log1p(-p)


@dataclass(frozen=True)
class TrainConfig:
    """Solver settings for the calibrator fits."""

    effective_prior: float = 0.5
    max_iters: int = 100
    tol: float = 1e-8  # on the projected gradient norm

    def __post_init__(self):
        if not 0.0 < self.effective_prior < 1.0:
            raise ValidationError("effective_prior must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class CalibrationModel:
    """Fitted monotone score-to-LLR map; slope is constrained non-negative."""

    kind: str  # 'logreg' | 'beta'
    slope: float
    offset: float
    scaling: ScoreScaling | None = None  # beta only

    def __post_init__(self):
        if self.kind not in ("logreg", "beta"):
            raise ValidationError(f"unknown calibration kind '{self.kind}'")
        if self.slope < 0:
            raise ValidationError("slope must be non-negative")
        if self.kind == "beta" and self.scaling is None:
            raise ValidationError("beta calibration requires a scaling")

    def to_json(self) -> str:
        """Serialize with 17 significant digits so load/save is exact."""
        if self.scaling is None:
            scaling = "null"
        else:
            scaling = (
                f'{{"kind": "{self.scaling.kind}", '
                f'"epsilon": {format(self.scaling.epsilon, ".17g")}}}'
            )
        return (
            f'{{"kind": "{self.kind}", "scaling": {scaling}, '
            f'"slope": {format(self.slope, ".17g")}, '
            f'"offset": {format(self.offset, ".17g")}}}\n'
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationModel":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid model file: {exc}") from None
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError("invalid model file: expected an object with 'kind'")
        scaling = obj.get("scaling")
        return cls(
            kind=obj["kind"],
            slope=float(obj["slope"]),
            offset=float(obj["offset"]),
            scaling=None
            if scaling is None
            else ScoreScaling(scaling["kind"], float(scaling["epsilon"])),
        )


def apply_calibration(model: CalibrationModel, scores) -> np.ndarray:
    """Map raw scores to LLRs; order-preserving whenever slope > 0."""
    s = np.asarray(scores, dtype=np.float64)
    if model.kind == "logreg":
        return model.slope * s + model.offset
    feature = _logit(scale_to_unit(s, model.scaling))
    return model.slope * feature + model.offset


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


def _fit_slope_offset(
    pos: np.ndarray, neg: np.ndarray, tc: TrainConfig
) -> tuple[float, float]:
    """Minimize the prior-weighted logistic loss subject to slope >= 0.

    Damped Newton on the two-parameter convex objective; the slope is
    projected back onto [0, inf) after every step. Convergence is declared
    on the projected gradient norm.
    """
    if np.unique(np.concatenate([pos, neg])).size == 1:
        raise DataError("degenerate fit: scores take a single value")

    pi = tc.effective_prior
    shift = math.log(pi) - math.log1p(-pi)  # logit of the effective prior

    def objective(w: float, b: float) -> float:
        pos_loss = np.mean(_softplus(-(w * pos + b + shift)))
        neg_loss = np.mean(_softplus(w * neg + b + shift))
        return pi * float(pos_loss) + (1.0 - pi) * float(neg_loss)

    w, b = 0.0, 0.0
    grad_norm = math.inf
    for _ in range(tc.max_iters):
        s_pos = _sigmoid(-(w * pos + b + shift))  # residual weight on positives
        s_neg = _sigmoid(w * neg + b + shift)
        g_w = -pi * float(np.mean(pos * s_pos)) + (1.0 - pi) * float(np.mean(neg * s_neg))
        g_b = -pi * float(np.mean(s_pos)) + (1.0 - pi) * float(np.mean(s_neg))
        pg_w = 0.0 if (w == 0.0 and g_w > 0.0) else g_w
        grad_norm = math.hypot(pg_w, g_b)
        if grad_norm <= tc.tol:
            return w, b

        h_pos = s_pos * (1.0 - s_pos)
        h_neg = s_neg * (1.0 - s_neg)
        h_ww = pi * float(np.mean(pos * pos * h_pos)) + (1.0 - pi) * float(
            np.mean(neg * neg * h_neg)
        )
        h_wb = pi * float(np.mean(pos * h_pos)) + (1.0 - pi) * float(np.mean(neg * h_neg))
        h_bb = pi * float(np.mean(h_pos)) + (1.0 - pi) * float(np.mean(h_neg))
        det = h_ww * h_bb - h_wb * h_wb
        if det <= 0 or not math.isfinite(det):
            det = det + 1e-12
        d_w = -(h_bb * g_w - h_wb * g_b) / det
        d_b = -(h_ww * g_b - h_wb * g_w) / det

        current = objective(w, b)
        step = 1.0
        accepted = False
        for _ in range(60):
            w_new = max(w + step * d_w, 0.0)
            b_new = b + step * d_b
            if objective(w_new, b_new) < current:
                w, b = w_new, b_new
                accepted = True
                break
            step /= 2.0
        if not accepted:
            # no descent left at floating-point resolution
            return w, b
    raise SolverError(
        f"calibration fit did not converge in {tc.max_iters} iterations",
        grad_norm=grad_norm,
    )


def fit_logreg(pos, neg, tc: TrainConfig = TrainConfig()) -> CalibrationModel:
    """Fit the affine LLR calibrator ``llr = w * s + b`` with w >= 0."""
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise DataError("both classes must be non-empty")
    slope, offset = _fit_slope_offset(pos, neg, tc)
    return CalibrationModel(kind="logreg", slope=slope, offset=offset)


def fit_beta(
    pos,
    neg,
    scaling: ScoreScaling = ScoreScaling(),
    tc: TrainConfig = TrainConfig(),
) -> CalibrationModel:
    """Fit the univariate beta calibrator on unit-scaled scores.

    Identical to :func:`fit_logreg` applied to the log-odds feature
    ``log(s' / (1 - s'))``, so the two share solver and guarantees.
    """
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise DataError("both classes must be non-empty")
    base = fit_logreg(_logit(scale_to_unit(pos, scaling)), _logit(scale_to_unit(neg, scaling)), tc)
    return CalibrationModel(
        kind="beta", slope=base.slope, offset=base.offset, scaling=scaling
    )


@dataclass(frozen=True)
class PavCalibrator:
    """Monotone step calibrator from pool-adjacent-violators.

    ``knots`` are the distinct training scores; a new score takes the LLR of
    the rightmost knot at or below it (scores below the first knot take the
    first value). Intervals are half-open, closed on the knot.
    """

    knots: np.ndarray
    llrs: np.ndarray

    def apply(self, scores) -> np.ndarray:
        s = np.asarray(scores, dtype=np.float64)
        idx = np.searchsorted(self.knots, s, side="right") - 1
        return self.llrs[np.clip(idx, 0, self.knots.size - 1)]


def pav_llr(pos, neg, epsilon: float = 1e-6) -> PavCalibrator:
    """Optimal monotone LLR map on a sample, by isotonic regression.

    Classes are weighted equally (effective prior one half), so the fitted
    posterior converts to an LLR by a plain logit; posteriors are clamped to
    [epsilon, 1 - epsilon] before the logit.
    """
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise DataError("both classes must be non-empty")

    scores = np.concatenate([pos, neg])
    is_pos = np.concatenate([np.ones(pos.size), np.zeros(neg.size)])
    weights = np.concatenate(
        [np.full(pos.size, 1.0 / pos.size), np.full(neg.size, 1.0 / neg.size)]
    )

    knots, inverse = np.unique(scores, return_inverse=True)
    w_tot = np.bincount(inverse, weights=weights, minlength=knots.size)
    w_pos = np.bincount(inverse, weights=weights * is_pos, minlength=knots.size)

    # pool adjacent violators: merge blocks while the mean would decrease
    block_w: list[float] = []
    block_wp: list[float] = []
    block_n: list[int] = []  # how many knots each block spans
    for i in range(knots.size):
        cur_w, cur_wp, cur_n = w_tot[i], w_pos[i], 1
        while block_w and block_wp[-1] * cur_w >= cur_wp * block_w[-1]:
            # previous mean >= current mean: pool
            cur_w += block_w.pop()
            cur_wp += block_wp.pop()
            cur_n += block_n.pop()
        block_w.append(cur_w)
        block_wp.append(cur_wp)
        block_n.append(cur_n)

    posterior = np.repeat(
        np.array(block_wp) / np.array(block_w), np.array(block_n)
    )
    posterior = np.clip(posterior, epsilon, 1.0 - epsilon)
    return PavCalibrator(knots=knots, llrs=_logit(posterior))
