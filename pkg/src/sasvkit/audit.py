"""Dataset audits: class balance, durations, speech-onset delay, quality.

Duration and delay operate on decoded audio buffers; balance and quality
operate on metadata and externally computed per-utterance quality scores
(any scalar metric served in the score-file format). Histograms are
left-closed right-open with explicit underflow/overflow so mass is always
conserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DataError, ValidationError
from .io import AudioBuffer, MetadataRecord, ScoreRecord, join_scores_metadata

#: default duration histogram: 1 s bins over [0, 25) s
DURATION_BINS = (1.0, 0.0, 25.0)
#: default onset-delay histogram: 20 ms bins over [0, 1) s
DELAY_BINS = (0.02, 0.0, 1.0)
#: default quality histogram: 0.1 bins over [1, 5), the usual MOS range
QUALITY_BINS = (0.1, 1.0, 5.0)

_LABEL_ORDER = ("bonafide", "spoof")
_GENDER_ORDER = ("M", "F", "unknown")


@dataclass(frozen=True)
class VadConfig:
    """Frame-energy voice activity detection parameters.

    A frame is active when its energy in dB exceeds the peak frame energy
    plus ``threshold_db`` (negative); speech onset is the start of the first
    run of ``hangover_frames`` consecutive active frames.
    """

    frame_len: float = 0.025
    hop: float = 0.010
    threshold_db: float = -35.0
    hangover_frames: int = 5

    def __post_init__(self):
        if not self.frame_len >= self.hop > 0:
            raise ValidationError("need frame_len >= hop > 0")
        if self.threshold_db >= 0:
            raise ValidationError("threshold_db must be negative")
        if self.hangover_frames < 1:
            raise ValidationError("hangover_frames must be at least 1")


def duration_seconds(audio: AudioBuffer) -> float:
    """Utterance duration: sample count over sample rate."""
    return audio.samples.size / audio.sample_rate


def _frame_energies_db(audio: AudioBuffer, cfg: VadConfig) -> tuple[np.ndarray, int]:
    frame = max(int(round(cfg.frame_len * audio.sample_rate)), 1)
    hop = max(int(round(cfg.hop * audio.sample_rate)), 1)
    if audio.samples.size < frame:
        raise DataError(
            f"audio too short for analysis ({audio.samples.size} samples, "
            f"frame is {frame})"
        )
    windows = np.lib.stride_tricks.sliding_window_view(audio.samples, frame)[::hop]
    mean_square = np.mean(windows * windows, axis=1)
    energies = np.full(mean_square.shape, -np.inf)
    nonzero = mean_square > 0
    energies[nonzero] = 10.0 * np.log10(mean_square[nonzero])
    return energies, hop


def speech_onset_delay(audio: AudioBuffer, cfg: VadConfig = VadConfig()) -> float | None:
    """Time from file start to detected speech onset, or None if no speech.

    Onset is the start of the first run of hangover_frames frames whose
    energy clears the relative threshold; an all-silent file (no frame
    within threshold_db of the peak, or digital silence) yields None rather
    than 0 so "speech at t=0" and "no speech" stay distinguishable.
    """
    energies, hop = _frame_energies_db(audio, cfg)
    peak = energies.max()
    if peak == -np.inf:
        return None
    active = energies > peak + cfg.threshold_db
    h = cfg.hangover_frames
    if active.size < h:
        return None
    runs = np.convolve(active.astype(np.int64), np.ones(h, dtype=np.int64), "valid")
    hits = np.nonzero(runs == h)[0]
    if hits.size == 0:
        return None
    return float(hits[0] * hop / audio.sample_rate)


@dataclass(frozen=True)
class Histogram:
    """Counts over left-closed right-open bins, plus underflow/overflow."""

    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    def __post_init__(self):
        if self.counts.size != self.bin_edges.size - 1:
            raise ValidationError("need one count per bin")
        if (self.counts < 0).any() or self.underflow < 0 or self.overflow < 0:
            raise ValidationError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def to_dict(self) -> dict:
        return {
            "bin_edges": [float(e) for e in self.bin_edges],
            "counts": [int(c) for c in self.counts],
            "underflow": self.underflow,
            "overflow": self.overflow,
        }


def histogram(values, bin_width: float, lo: float, hi: float) -> Histogram:
    """Fixed-width histogram of values over [lo, hi).

    Bin k covers [lo + k*w, lo + (k+1)*w); values below lo count as
    underflow, values at or above hi as overflow. When hi - lo is not a
    multiple of the width the last bin is clipped at hi.
    """
    if bin_width <= 0:
        raise ValidationError("bin_width must be positive")
    if not lo < hi:
        raise ValidationError("need lo < hi")
    arr = np.asarray(values, dtype=np.float64).ravel()
    if np.isnan(arr).any():
        raise ValidationError("NaN in histogram values")

    n_bins = max(int(math.ceil((hi - lo) / bin_width - 1e-9)), 1)
    edges = lo + bin_width * np.arange(n_bins + 1)
    edges[-1] = min(edges[-1], hi)

    under = int(np.sum(arr < lo))
    over = int(np.sum(arr >= hi))
    inside = arr[(arr >= lo) & (arr < hi)]
    idx = np.searchsorted(edges, inside, side="right") - 1
    counts = np.bincount(np.clip(idx, 0, n_bins - 1), minlength=n_bins)
    return Histogram(bin_edges=edges, counts=counts, underflow=under, overflow=over)


@dataclass(frozen=True)
class BalanceCounts:
    """Exact utterance counts per label, attack and gender."""

    total: int
    by_label: dict[str, int]
    by_attack: dict[str, int]
    by_gender: dict[str, int]

    def shares(self) -> dict[str, dict[str, float]]:
        """Count fractions of the total per grouping (empty set: all zero)."""

        def frac(counts: dict[str, int]) -> dict[str, float]:
            return {k: (v / self.total if self.total else 0.0) for k, v in counts.items()}

        return {
            "by_label": frac(self.by_label),
            "by_attack": frac(self.by_attack),
            "by_gender": frac(self.by_gender),
        }


def balance_report(meta: Iterable[MetadataRecord]) -> BalanceCounts:
    """Count utterances per label, per spoofing attack and per gender."""
    by_label = {label: 0 for label in _LABEL_ORDER}
    by_gender = {g: 0 for g in _GENDER_ORDER}
    by_attack: dict[str, int] = {}
    total = 0
    for rec in meta:
        total += 1
        by_label[rec.label] += 1
        by_gender[rec.gender] += 1
        if rec.label == "spoof":
            by_attack[rec.attack_id] = by_attack.get(rec.attack_id, 0) + 1
    return BalanceCounts(
        total=total,
        by_label=by_label,
        by_attack=dict(sorted(by_attack.items())),
        by_gender=by_gender,
    )


def _per_attack_key(rec: MetadataRecord) -> str:
    return "bonafide" if rec.label == "bonafide" else rec.attack_id


def _per_attack_histograms(
    values_by_utt: Mapping[str, float],
    meta_by_id: Mapping[str, MetadataRecord],
    bins: tuple[float, float, float],
) -> dict[str, Histogram]:
    width, lo, hi = bins
    grouped: dict[str, list[float]] = {}
    for utt_id, value in values_by_utt.items():
        rec = meta_by_id.get(utt_id)
        if rec is None:
            raise DataError(f"measured utterance '{utt_id}' lacks metadata")
        grouped.setdefault(_per_attack_key(rec), []).append(value)
    keys = sorted(grouped, key=lambda k: (k != "bonafide", k))
    return {k: histogram(grouped[k], width, lo, hi) for k in keys}


@dataclass(frozen=True)
class QualitySummary:
    """Quality-score histograms per attack plus pooled label histograms."""

    per_attack: dict[str, Histogram]
    bonafide: Histogram | None
    spoof: Histogram | None


def quality_summary(
    quality_scores: Iterable[ScoreRecord],
    meta: Iterable[MetadataRecord],
    bins: tuple[float, float, float] = QUALITY_BINS,
) -> QualitySummary:
    """Distribution of per-utterance quality scores per attack and label.

    Quality values come from an external scores file; any scalar metric
    works. Every scored utterance must have metadata.
    """
    width, lo, hi = bins
    joined = join_scores_metadata(list(quality_scores), list(meta))
    per_attack: dict[str, Histogram] = {}
    spoof_mask = ~joined.bonafide_mask
    for attack in joined.attack_ids():
        per_attack[attack] = histogram(
            joined.scores[spoof_mask & (joined.attacks == attack)], width, lo, hi
        )
    bona = joined.bonafide_scores
    spoof = joined.spoof_scores
    return QualitySummary(
        per_attack=per_attack,
        bonafide=histogram(bona, width, lo, hi) if bona.size else None,
        spoof=histogram(spoof, width, lo, hi) if spoof.size else None,
    )


@dataclass(frozen=True)
class AuditReport:
    """Balance counts plus optional duration, delay and quality sections.

    Sections are None when the corresponding inputs were not audited.
    """

    balance: BalanceCounts
    duration_mean: float | None = None
    duration_std: float | None = None
    duration_histograms: dict[str, Histogram] | None = None
    delay_histograms: dict[str, Histogram] | None = None
    delay_no_speech: int | None = None
    delay_analyzed: int | None = None
    quality: QualitySummary | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "total": self.balance.total,
            "counts_by_label": self.balance.by_label,
            "counts_by_attack": self.balance.by_attack,
            "counts_by_gender": self.balance.by_gender,
            "shares": self.balance.shares(),
        }
        if self.duration_histograms is not None:
            out["duration"] = {
                "mean_seconds": self.duration_mean,
                "std_seconds": self.duration_std,
                "histograms": {k: h.to_dict() for k, h in self.duration_histograms.items()},
            }
        if self.delay_histograms is not None:
            out["delay"] = {
                "analyzed": self.delay_analyzed,
                "no_speech": self.delay_no_speech,
                "histograms": {k: h.to_dict() for k, h in self.delay_histograms.items()},
            }
        if self.quality is not None:
            out["quality"] = {
                "per_attack": {k: h.to_dict() for k, h in self.quality.per_attack.items()},
                "bonafide": None if self.quality.bonafide is None else self.quality.bonafide.to_dict(),
                "spoof": None if self.quality.spoof is None else self.quality.spoof.to_dict(),
            }
        return out


def audit_dataset(
    meta: Iterable[MetadataRecord],
    durations: Mapping[str, float] | None = None,
    delays: Mapping[str, float | None] | None = None,
    quality_scores: Iterable[ScoreRecord] | None = None,
    duration_bins: tuple[float, float, float] = DURATION_BINS,
    delay_bins: tuple[float, float, float] = DELAY_BINS,
    quality_bins: tuple[float, float, float] = QUALITY_BINS,
) -> AuditReport:
    """Assemble an AuditReport from per-utterance measurements.

    ``durations`` and ``delays`` are keyed by utt_id (a None delay means no
    speech was detected); both are optional, as is the quality score list.
    """
    meta = list(meta)
    meta_by_id = {m.utt_id: m for m in meta}
    report_kwargs: dict = {"balance": balance_report(meta)}

    if durations is not None:
        values = np.array(list(durations.values()), dtype=np.float64)
        report_kwargs.update(
            duration_mean=float(values.mean()) if values.size else None,
            duration_std=float(values.std()) if values.size else None,
            duration_histograms=_per_attack_histograms(durations, meta_by_id, duration_bins),
        )
    if delays is not None:
        detected = {k: v for k, v in delays.items() if v is not None}
        report_kwargs.update(
            delay_histograms=_per_attack_histograms(detected, meta_by_id, delay_bins),
            delay_no_speech=sum(1 for v in delays.values() if v is None),
            delay_analyzed=len(delays),
        )
    if quality_scores is not None:
        report_kwargs.update(quality=quality_summary(quality_scores, meta, quality_bins))
    return AuditReport(**report_kwargs)
