"""Detection and tandem metrics over scores and log-likelihood ratios.

All metrics share one decision convention: a trial is accepted iff its score
is greater than or equal to the threshold. Threshold sweeps enumerate minus
infinity, the midpoints between adjacent distinct pooled scores, and plus
infinity; that set realizes every achievable decision rule exactly, so small
fixtures can be checked against brute-force oracles without tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import io
from .errors import DataError, NoConcurrentPointError, ValidationError

_LN2 = math.log(2.0)


def _score_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise DataError(f"empty {name} score list")
    if not np.isfinite(arr).all():
        raise ValidationError(f"non-finite value in {name} scores")
    return arr


@dataclass(frozen=True)
class BinaryScores:
    """Positive-class (bonafide/target) vs negative-class scores."""

    pos: np.ndarray
    neg: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pos", _score_array(self.pos, "positive"))
        object.__setattr__(self, "neg", _score_array(self.neg, "negative"))


@dataclass(frozen=True)
class SasvScores:
    """One fused score per trial for the three SASV trial classes."""

    target: np.ndarray
    nontarget: np.ndarray
    spoof: np.ndarray

    def __post_init__(self):
        for name in ("target", "nontarget", "spoof"):
            object.__setattr__(self, name, _score_array(getattr(self, name), name))

    @classmethod
    def from_trials(cls, trials: io.SasvTrialSet, which: str = "asv") -> "SasvScores":
        return cls(
            target=trials.scores_of("target", which),
            nontarget=trials.scores_of("nontarget", which),
            spoof=trials.scores_of("spoof", which),
        )


@dataclass(frozen=True)
class TandemScores:
    """Aligned (asv, cm) score pairs per SASV trial class."""

    target_asv: np.ndarray
    target_cm: np.ndarray
    nontarget_asv: np.ndarray
    nontarget_cm: np.ndarray
    spoof_asv: np.ndarray
    spoof_cm: np.ndarray

    def __post_init__(self):
        for name in (
            "target_asv",
            "target_cm",
            "nontarget_asv",
            "nontarget_cm",
            "spoof_asv",
            "spoof_cm",
        ):
            object.__setattr__(self, name, _score_array(getattr(self, name), name))
        for cls_name in ("target", "nontarget", "spoof"):
            asv = getattr(self, f"{cls_name}_asv")
            cm = getattr(self, f"{cls_name}_cm")
            if asv.size != cm.size:
                raise ValidationError(f"misaligned asv/cm pairs for class {cls_name}")

    @classmethod
    def from_trials(cls, trials: io.SasvTrialSet) -> "TandemScores":
        return cls(
            target_asv=trials.scores_of("target", "asv"),
            target_cm=trials.scores_of("target", "cm"),
            nontarget_asv=trials.scores_of("nontarget", "asv"),
            nontarget_cm=trials.scores_of("nontarget", "cm"),
            spoof_asv=trials.scores_of("spoof", "asv"),
            spoof_cm=trials.scores_of("spoof", "cm"),
        )


@dataclass(frozen=True)
class CostModel:
    """Priors and costs for the DCF-family metrics.

    Binary metrics use (pi_target, pi_nontarget) which must sum to 1; the
    SASV metrics additionally use (c_fa_spoof, pi_spoof) and require all
    three priors to sum to 1. No challenge constants are baked in; shipped
    profiles (see :mod:`sasvkit.profiles`) are examples only.
    """

    c_miss: float = 1.0
    c_fa: float = 1.0
    c_fa_spoof: float = 0.0
    pi_target: float = 0.5
    pi_nontarget: float = 0.5
    pi_spoof: float = 0.0

    def __post_init__(self):
        for name in ("c_miss", "c_fa", "c_fa_spoof"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.c_miss == 0 and self.c_fa == 0 and self.c_fa_spoof == 0:
            raise ValidationError("at least one cost must be positive")
        for name in ("pi_target", "pi_nontarget", "pi_spoof"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")

    def require_binary(self) -> None:
        if abs(self.pi_target + self.pi_nontarget - 1.0) > 1e-9:
            raise ValidationError(
                "binary metrics need pi_target + pi_nontarget = 1 "
                f"(got {self.pi_target} + {self.pi_nontarget})"
            )

    def require_sasv(self) -> None:
        total = self.pi_target + self.pi_nontarget + self.pi_spoof
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"SASV priors must sum to 1 (got {total})")


def _sweep_thresholds(pooled: np.ndarray) -> np.ndarray:
    """-inf, midpoints between adjacent distinct scores, +inf.

    Midpoints are computed overflow-safe; where one would round onto the
    lower score the upper score stands in (identical accept set under the
    accept-at-equality rule), so no decision point is ever lost.
    """
    distinct = np.unique(pooled)
    lower, upper = distinct[:-1], distinct[1:]
    mids = lower / 2.0 + upper / 2.0
    collapsed = mids <= lower
    mids[collapsed] = upper[collapsed]
    return np.concatenate(([-np.inf], mids, [np.inf]))


def _rates(sorted_scores: np.ndarray, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(fraction below, fraction at-or-above) each threshold."""
    below = np.searchsorted(sorted_scores, thresholds, side="left")
    n = sorted_scores.size
    return below / n, (n - below) / n


def det_curve(scores: BinaryScores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Detection error trade-off under the accept-at-or-above rule.

    Returns aligned arrays (thresholds, p_miss, p_fa) with thresholds
    ascending, p_miss non-decreasing and p_fa non-increasing. The endpoints
    are always (p_miss, p_fa) = (0, 1) and (1, 0).
    """
    pos = np.sort(scores.pos)
    neg = np.sort(scores.neg)
    thresholds = _sweep_thresholds(np.concatenate([pos, neg]))
    p_miss, _ = _rates(pos, thresholds)
    _, p_fa = _rates(neg, thresholds)
    return thresholds, p_miss, p_fa


def _eer_from_curve(p_miss: np.ndarray, p_fa: np.ndarray) -> tuple[float, int, float]:
    """Interpolated equal-error rate plus its bracketing index and weight.

    Returns (eer, idx, t) where the crossing lies between curve points
    idx-1 and idx at interpolation weight t (t == 0 means exactly at idx).
    """
    diff = p_miss - p_fa  # non-decreasing, diff[0] = -1, diff[-1] = +1
    idx = int(np.argmax(diff >= 0.0))
    if diff[idx] == 0.0:
        return float(p_miss[idx]), idx, 0.0
    t = -diff[idx - 1] / (diff[idx] - diff[idx - 1])
    value = p_miss[idx - 1] + t * (p_miss[idx] - p_miss[idx - 1])
    return float(value), idx, float(t)


def eer(scores: BinaryScores) -> float:
    """Equal error rate on the linearly interpolated DET curve."""
    _, p_miss, p_fa = det_curve(scores)
    return _eer_from_curve(p_miss, p_fa)[0]


def eer_threshold(scores: BinaryScores) -> float:
    """Sweep threshold closest to the equal-error point (ties: smallest)."""
    thresholds, p_miss, p_fa = det_curve(scores)
    return float(thresholds[int(np.argmin(np.abs(p_miss - p_fa)))])


def min_dcf(scores: BinaryScores, cost: CostModel) -> tuple[float, float]:
    """Minimum normalized detection cost and the threshold achieving it.

    Cost is c_miss*pi*p_miss + c_fa*(1-pi)*p_fa normalized by the better of
    the accept-all / reject-all systems; ties resolve to the smallest
    threshold.
    """
    cost.require_binary()
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    norm = min(w_miss, w_fa)
    if norm <= 0.0:
        raise ValidationError("degenerate cost model: zero normalizer")
    thresholds, p_miss, p_fa = det_curve(scores)
    dcf = (w_miss * p_miss + w_fa * p_fa) / norm
    idx = int(np.argmin(dcf))
    return float(dcf[idx]), float(thresholds[idx])


def act_dcf(llrs: BinaryScores, cost: CostModel) -> float:
    """Normalized detection cost at the Bayes threshold of the cost model.

    Inputs must be calibrated log-likelihood ratios; decisions accept at or
    above log(c_fa * pi_nontarget) - log(c_miss * pi_target).
    """
    cost.require_binary()
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    norm = min(w_miss, w_fa)
    if norm <= 0.0:
        raise ValidationError("degenerate cost model: zero normalizer")
    bayes = math.log(w_fa) - math.log(w_miss)
    p_miss = float(np.mean(llrs.pos < bayes))
    p_fa = float(np.mean(llrs.neg >= bayes))
    return (w_miss * p_miss + w_fa * p_fa) / norm


def cllr(llrs: BinaryScores) -> float:
    """Cost of log-likelihood ratios, in bits.

    Half the mean positive-class softplus(-llr) plus half the mean
    negative-class softplus(llr), base 2. Zero for perfectly calibrated,
    perfectly separating LLRs; 1 bit for uninformative all-zero LLRs.
    """
    pos_term = float(np.mean(np.logaddexp(0.0, -llrs.pos)))
    neg_term = float(np.mean(np.logaddexp(0.0, llrs.neg)))
    return 0.5 * (pos_term + neg_term) / _LN2


def a_dcf(scores: SasvScores, cost: CostModel) -> tuple[float, float]:
    """Minimum normalized SASV detection cost over a single fused score.

    Sums the prior- and cost-weighted target miss rate, nontarget false
    alarm rate and spoof false alarm rate; normalized by the best trivial
    system; minimized over the pooled-score threshold sweep.
    """
    cost.require_sasv()
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    w_spf = cost.c_fa_spoof * cost.pi_spoof
    norm = min(w_miss, w_fa + w_spf)
    if norm <= 0.0:
        raise ValidationError("degenerate cost model: zero normalizer")
    thresholds = _sweep_thresholds(
        np.concatenate([scores.target, scores.nontarget, scores.spoof])
    )
    p_miss, _ = _rates(np.sort(scores.target), thresholds)
    _, p_fa_non = _rates(np.sort(scores.nontarget), thresholds)
    _, p_fa_spf = _rates(np.sort(scores.spoof), thresholds)
    curve = (w_miss * p_miss + w_fa * p_fa_non + w_spf * p_fa_spf) / norm
    idx = int(np.argmin(curve))
    return float(curve[idx]), float(thresholds[idx])


class _TandemSweeper:
    """Tandem accept counts over the pooled cm-threshold sweep.

    Per class, trials are ordered by cm score once; a gate evaluation is
    then a boolean mask plus a prefix sum, so sweeping many ASV thresholds
    (as t-EER does) stays cheap. Rates derive from integer counts, keeping
    them bitwise comparable with the single-score sweeps.
    """

    def __init__(self, tandem: TandemScores):
        self.thresholds = _sweep_thresholds(
            np.concatenate([tandem.target_cm, tandem.nontarget_cm, tandem.spoof_cm])
        )
        self._classes = {}
        for name in ("target", "nontarget", "spoof"):
            asv = getattr(tandem, f"{name}_asv")
            cm = getattr(tandem, f"{name}_cm")
            order = np.argsort(cm, kind="stable")
            cm_sorted = cm[order]
            idx = np.searchsorted(cm_sorted, self.thresholds, side="left")
            self._classes[name] = (asv[order], idx, cm.size)

    def _accepted(self, name: str, asv_threshold: float) -> tuple[np.ndarray, int]:
        asv_by_cm, idx, n = self._classes[name]
        passed = np.concatenate(([0], np.cumsum(asv_by_cm >= asv_threshold)))
        return passed[-1] - passed[idx], n

    def rates(
        self, asv_threshold: float
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(p_miss, p_fa_nontarget, p_fa_spoof) per cm threshold."""
        acc_tar, n_tar = self._accepted("target", asv_threshold)
        acc_non, n_non = self._accepted("nontarget", asv_threshold)
        acc_spf, n_spf = self._accepted("spoof", asv_threshold)
        return (n_tar - acc_tar) / n_tar, acc_non / n_non, acc_spf / n_spf


def t_dcf(
    tandem: TandemScores,
    cost: CostModel,
    asv_threshold: float | None = None,
) -> tuple[float, float]:
    """Minimum tandem detection cost at a fixed ASV operating point.

    The ASV gate defaults to the equal-error threshold of the target vs
    nontarget asv scores; the cm threshold is swept. Returns the minimum
    normalized cost and the cm threshold achieving it (ties: smallest).
    """
    cost.require_sasv()
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    w_spf = cost.c_fa_spoof * cost.pi_spoof
    norm = min(w_miss, w_fa + w_spf)
    if norm <= 0.0:
        raise ValidationError("degenerate cost model: zero normalizer")
    if asv_threshold is None:
        asv_threshold = eer_threshold(
            BinaryScores(tandem.target_asv, tandem.nontarget_asv)
        )
    sweeper = _TandemSweeper(tandem)
    p_miss, p_fa_non, p_fa_spf = sweeper.rates(asv_threshold)
    curve = (w_miss * p_miss + w_fa * p_fa_non + w_spf * p_fa_spf) / norm
    idx = int(np.argmin(curve))
    return float(curve[idx]), float(sweeper.thresholds[idx])


@dataclass(frozen=True)
class TeerGrid:
    """Search resolution for the concurrent tandem equal-error rate."""

    n_points: int = 257
    tol: float = 1e-6  # bisection interval width, relative to the asv range

    def __post_init__(self):
        if self.n_points < 2:
            raise ValidationError("t-EER grid needs at least 2 points")
        if self.tol <= 0:
            raise ValidationError("t-EER tolerance must be positive")


def _teer_inner(sweeper: _TandemSweeper, asv_threshold: float) -> tuple[float, float]:
    """At a fixed ASV gate, equalize tandem miss vs nontarget false alarm.

    Returns (rate, spoof false-alarm rate) at that cm operating point,
    linearly interpolated between sweep points. When the gate alone already
    misses more targets than it admits nontargets, the boundary point
    (cm threshold at -inf) is used with rates averaged.
    """
    p_miss, p_fa_non, p_fa_spf = sweeper.rates(asv_threshold)
    diff = p_miss - p_fa_non  # non-decreasing in the cm threshold
    if diff[0] >= 0.0:
        return float((p_miss[0] + p_fa_non[0]) / 2.0), float(p_fa_spf[0])
    idx = int(np.argmax(diff >= 0.0))
    if diff[idx] == 0.0:
        return float(p_miss[idx]), float(p_fa_spf[idx])
    t = -diff[idx - 1] / (diff[idx] - diff[idx - 1])
    rate = p_miss[idx - 1] + t * (p_miss[idx] - p_miss[idx - 1])
    spf = p_fa_spf[idx - 1] + t * (p_fa_spf[idx] - p_fa_spf[idx - 1])
    return float(rate), float(spf)


def t_eer(tandem: TandemScores, grid: TeerGrid = TeerGrid()) -> float:
    """Concurrent tandem equal-error rate.

    Searches the ASV operating point at which the tandem target miss rate,
    nontarget false-alarm rate and spoof false-alarm rate coincide: for each
    gate threshold on a uniform grid over the observed asv scores the first
    two rates are equalized in the cm threshold, then the gate where the
    spoof rate meets them is located by sign change and refined by
    bisection. Raises NoConcurrentPointError when no sign change exists on
    the grid.
    """

    sweeper = _TandemSweeper(tandem)

    def gap(asv_threshold: float) -> tuple[float, float]:
        rate, spf = _teer_inner(sweeper, asv_threshold)
        return spf - rate, rate

    pooled_asv = np.concatenate(
        [tandem.target_asv, tandem.nontarget_asv, tandem.spoof_asv]
    )
    lo = float(pooled_asv.min())
    hi = float(pooled_asv.max())
    taus = (
        np.array([lo]) if lo == hi else np.linspace(lo, hi, grid.n_points)
    )

    gaps_rates = [gap(float(tau)) for tau in taus]
    for g, rate in gaps_rates:
        if g == 0.0:
            return rate

    gaps = [g for g, _ in gaps_rates]
    bracket = None
    for i in range(len(taus) - 1):
        if (gaps[i] < 0.0) != (gaps[i + 1] < 0.0):
            bracket = i
            break
    if bracket is None:
        raise NoConcurrentPointError(
            "no operating point equalizes all three tandem error rates "
            f"on the searched grid (gap range [{min(gaps):.4g}, {max(gaps):.4g}])"
        )

    a, b = float(taus[bracket]), float(taus[bracket + 1])
    g_a = gaps[bracket]
    width_tol = grid.tol * (hi - lo)
    while (b - a) > width_tol:
        mid = (a + b) / 2.0
        g_mid, rate_mid = gap(mid)
        if g_mid == 0.0:
            return rate_mid
        if (g_mid < 0.0) == (g_a < 0.0):
            a, g_a = mid, g_mid
        else:
            b = mid
    return gap((a + b) / 2.0)[1]


@dataclass(frozen=True)
class MetricReport:
    """Scalar metrics of one evaluation run.

    ``None`` fields were not computed and stay out of serialized output,
    except fields listed in ``null_fields`` which are emitted as null (used
    to report an attempted-but-failed t-EER).
    """

    eer: float | None = None
    min_dcf: float | None = None
    act_dcf: float | None = None
    cllr: float | None = None
    a_dcf: float | None = None
    t_dcf: float | None = None
    t_eer: float | None = None
    min_dcf_threshold: float | None = None
    a_dcf_threshold: float | None = None
    t_dcf_asv_threshold: float | None = None
    t_dcf_cm_threshold: float | None = None
    null_fields: frozenset[str] = frozenset()

    #: serialization order for to_dict / write_report
    FIELD_ORDER = (
        "eer",
        "min_dcf",
        "act_dcf",
        "cllr",
        "a_dcf",
        "t_dcf",
        "t_eer",
        "min_dcf_threshold",
        "a_dcf_threshold",
        "t_dcf_asv_threshold",
        "t_dcf_cm_threshold",
    )

    def to_dict(self) -> dict:
        out: dict = {}
        for name in self.FIELD_ORDER:
            value = getattr(self, name)
            if value is not None or name in self.null_fields:
                out[name] = value
        return out


def evaluate_binary(scores: BinaryScores, cost: CostModel) -> MetricReport:
    """EER, minDCF, actDCF and Cllr of one binary score set."""
    dcf_value, dcf_threshold = min_dcf(scores, cost)
    return MetricReport(
        eer=eer(scores),
        min_dcf=dcf_value,
        act_dcf=act_dcf(scores, cost),
        cllr=cllr(scores),
        min_dcf_threshold=dcf_threshold,
    )


@dataclass(frozen=True)
class BreakdownTable:
    """Metric values per group, with pooled margins.

    ``rows`` and ``cols`` include the final "Pooled" entries; ``values`` is
    the aligned matrix where None marks a group with an empty score class.
    """

    metric: str
    group_by: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]

    def cell(self, row: str, col: str) -> float | None:
        return self.values[self.rows.index(row)][self.cols.index(col)]


_GROUP_BY_ALIASES = {
    "attack": "attack",
    "codec": "codec",
    "attack,codec": "attack_codec",
    "attack_codec": "attack_codec",
    "attackxcodec": "attack_codec",
}

POOLED = "Pooled"


def _binary_metric_fn(
    metric: str, cost: CostModel | None
) -> Callable[[BinaryScores], float]:
    needs_cost = {"min_dcf": lambda s, c: min_dcf(s, c)[0], "act_dcf": act_dcf}
    plain = {"eer": eer, "cllr": cllr}
    if metric in plain:
        return plain[metric]
    if metric in needs_cost:
        if cost is None:
            raise ValidationError(f"metric '{metric}' requires a cost model")
        fn = needs_cost[metric]
        return lambda s: fn(s, cost)
    raise ValidationError(f"unknown metric selector '{metric}'")


def grouped_eval(
    ss: "io.ScoreSet | io.SasvTrialSet",
    group_by: str,
    metric: str = "eer",
    cost: CostModel | None = None,
) -> BreakdownTable:
    """Per-attack / per-codec breakdown with pooled margins.

    For a ScoreSet each cell scores the group's spoof utterances against all
    bonafide utterances sharing the codec condition (bonafide pooled within
    codec); the pooled column uses all codecs and the pooled row all
    attacks. Cells whose positive or negative class is empty are None.

    For a SasvTrialSet (single fused score per trial) the metric is a_dcf;
    spoof trials are grouped by their test utterance's attack/codec while
    target and nontarget trials are restricted by codec only.
    """
    key = _GROUP_BY_ALIASES.get(group_by.replace(" ", "").replace("×", "x").lower())
    if key is None:
        raise ValidationError(f"unknown group_by '{group_by}'")
    if isinstance(ss, io.SasvTrialSet):
        return _grouped_eval_sasv(ss, key, metric, cost)
    return _grouped_eval_cm(ss, key, metric, cost)


def _grouped_eval_cm(
    ss: "io.ScoreSet", key: str, metric: str, cost: CostModel | None
) -> BreakdownTable:
    fn = _binary_metric_fn(metric, cost)
    bona = ss.bonafide_mask

    def cell(pos: np.ndarray, neg: np.ndarray) -> float | None:
        if pos.size == 0 or neg.size == 0:
            return None
        return float(fn(BinaryScores(pos, neg)))

    attacks = ss.attack_ids()
    codecs = ss.codec_ids()
    if key == "attack":
        rows, cols = attacks, []
        row_mask = lambda a: (~bona) & (ss.attacks == a)
        col_mask = None
    elif key == "codec":
        rows, cols = codecs, []
        row_mask = lambda c: (~bona) & (ss.codecs == c)
        col_mask = None
    else:
        rows, cols = attacks, codecs
        row_mask = lambda a: (~bona) & (ss.attacks == a)
        col_mask = lambda c: ss.codecs == c

    all_true = np.ones(len(ss), dtype=bool)
    values = []
    for row in [*rows, POOLED]:
        if row == POOLED:
            neg_base = ~bona
        else:
            neg_base = row_mask(row)
        if key == "codec" and row != POOLED:
            # bonafide restricted to the same codec condition
            pos_base = bona & (ss.codecs == row)
        else:
            pos_base = bona
        row_values = []
        for col in [*cols, POOLED]:
            if col == POOLED or col_mask is None:
                cmask = all_true
                pos_mask = pos_base
            else:
                cmask = col_mask(col)
                pos_mask = pos_base & cmask
            row_values.append(cell(ss.scores[pos_mask], ss.scores[neg_base & cmask]))
        values.append(tuple(row_values))
    return BreakdownTable(
        metric=metric,
        group_by=key,
        rows=tuple([*rows, POOLED]),
        cols=tuple([*cols, POOLED]),
        values=tuple(values),
    )


def _grouped_eval_sasv(
    trials: "io.SasvTrialSet", key: str, metric: str, cost: CostModel | None
) -> BreakdownTable:
    if metric != "a_dcf":
        raise ValidationError("SASV breakdowns support only the a_dcf metric")
    if cost is None:
        raise ValidationError("a_dcf requires a cost model")
    if trials.attacks is None or trials.codecs is None:
        raise DataError("trials lack attack/codec attributes; join metadata first")
    if not trials.has_single_scores:
        raise DataError(
            "SASV breakdowns need one fused score per trial; fuse paired scores first"
        )
    fused = trials._column("asv")  # the single-score column
    tar = trials.class_mask("target")
    non = trials.class_mask("nontarget")
    spf = trials.class_mask("spoof")

    def cell(bona_mask: np.ndarray, spoof_mask: np.ndarray) -> float | None:
        if not (
            (tar & bona_mask).any() and (non & bona_mask).any() and spoof_mask.any()
        ):
            return None
        return a_dcf(
            SasvScores(
                target=fused[tar & bona_mask],
                nontarget=fused[non & bona_mask],
                spoof=fused[spoof_mask],
            ),
            cost,
        )[0]

    attacks = sorted(set(trials.attacks[spf]))
    codecs = sorted(set(trials.codecs))
    if "-" in codecs:
        codecs = ["-"] + [c for c in codecs if c != "-"]
    all_true = np.ones(len(trials), dtype=bool)
    if key == "attack":
        rows, cols = attacks, []
    elif key == "codec":
        rows, cols = codecs, []
    else:
        rows, cols = attacks, codecs

    values = []
    for row in [*rows, POOLED]:
        if row == POOLED:
            spoof_base, bona_row = spf, all_true
        elif key == "codec":
            spoof_base = spf & (trials.codecs == row)
            bona_row = trials.codecs == row
        else:
            spoof_base, bona_row = spf & (trials.attacks == row), all_true
        row_values = []
        for col in [*cols, POOLED]:
            if col == POOLED:
                row_values.append(cell(bona_row, spoof_base))
            else:
                cmask = trials.codecs == col
                row_values.append(cell(bona_row & cmask, spoof_base & cmask))
        values.append(tuple(row_values))
    return BreakdownTable(
        metric=metric,
        group_by=key,
        rows=tuple([*rows, POOLED]),
        cols=tuple([*cols, POOLED]),
        values=tuple(values),
    )
