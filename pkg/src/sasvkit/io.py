"""Readers and writers for score files, trial lists, metadata tables and audio.

Text formats share a few conventions: UTF-8, LF or CRLF line endings (LF on
output), blank lines and lines starting with '#' are skipped, and every
rejection names the offending 1-based line number. Parsers are pure functions
of their input and preserve file order.

Formats
-------
score file      whitespace-separated, ``utt_id score`` (extra columns ignored)
metadata table  tab-separated, ``utt_id gender codec_id attack_id label``
trial list      tab-separated, ``enroll_id test_utt class [asv [cm]]``
embedding file  whitespace-separated, ``utt_id v1 v2 ... vD``
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from .errors import AudioFormatError, DataError, ParseError, ValidationError

GENDERS = ("M", "F", "unknown")
LABELS = ("bonafide", "spoof")
TRIAL_CLASSES = ("target", "nontarget", "spoof")

#: attack_id tokens that mark a bonafide (non-attack) utterance
BONAFIDE_MARKERS = ("-", "bonafide")

_GENDER_ALIASES = {
    "m": "M",
    "f": "F",
    "-": "unknown",
    "u": "unknown",
    "unknown": "unknown",
}


@dataclass(frozen=True)
class ScoreRecord:
    """One detection score keyed by utterance id."""

    utt_id: str
    score: float

    def __post_init__(self):
        if not self.utt_id:
            raise ValidationError("empty utt_id in score record")
        if not math.isfinite(self.score):
            raise ValidationError(f"non-finite score for '{self.utt_id}'")


@dataclass(frozen=True)
class MetadataRecord:
    """Per-utterance attributes: gender, codec condition, attack id, label.

    ``attack_id`` must be a bonafide marker ('-' or 'bonafide') exactly when
    ``label`` is 'bonafide'.
    """

    utt_id: str
    gender: str
    codec_id: str
    attack_id: str
    label: str

    def __post_init__(self):
        if not self.utt_id:
            raise ValidationError("empty utt_id in metadata record")
        if self.gender not in GENDERS:
            raise ValidationError(f"unknown gender '{self.gender}' for '{self.utt_id}'")
        if self.label not in LABELS:
            raise ValidationError(f"unknown label '{self.label}' for '{self.utt_id}'")
        if not self.codec_id:
            raise ValidationError(f"empty codec_id for '{self.utt_id}'")
        is_marker = self.attack_id in BONAFIDE_MARKERS
        if self.label == "bonafide" and not is_marker:
            raise ValidationError(
                f"bonafide utterance '{self.utt_id}' carries attack id '{self.attack_id}'"
            )
        if self.label == "spoof" and is_marker:
            raise ValidationError(f"spoof utterance '{self.utt_id}' lacks an attack id")


@dataclass(frozen=True)
class SasvTrialRecord:
    """One verification trial: enrollment speaker vs test utterance.

    Scores are optional; a trial list may carry no scores, a single (fused)
    score in the asv slot, or an (asv, cm) pair. Present scores must be finite.
    """

    enroll_id: str
    test_utt: str
    trial_class: str
    asv_score: float | None = None
    cm_score: float | None = None

    def __post_init__(self):
        if not self.enroll_id or not self.test_utt:
            raise ValidationError("empty id in trial record")
        if self.trial_class not in TRIAL_CLASSES:
            raise ValidationError(f"unknown trial class '{self.trial_class}'")
        if self.cm_score is not None and self.asv_score is None:
            raise ValidationError(
                f"trial {self.enroll_id}/{self.test_utt}: cm score without asv score"
            )
        for name, value in (("asv", self.asv_score), ("cm", self.cm_score)):
            if value is not None and not math.isfinite(value):
                raise ValidationError(
                    f"non-finite {name} score for trial {self.enroll_id}/{self.test_utt}"
                )


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio as float samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValidationError("sample rate must be positive")


def _iter_content_lines(stream: str | Iterable[str]) -> Iterator[tuple[int, str]]:
    """Yield (line_no, stripped line) skipping blanks and '#' comments."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_no, line


def _parse_float(token: str, what: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"invalid {what} '{token}'", line_no) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} '{token}'", line_no)
    return value


def parse_cm_scores(stream: str | Iterable[str]) -> list[ScoreRecord]:
    """Parse a score file into records, in file order.

    Each content line carries at least ``utt_id score``; extra columns are
    ignored. Duplicate utterance ids are rejected.
    """
    records: list[ScoreRecord] = []
    seen: set[str] = set()
    for line_no, line in _iter_content_lines(stream):
        fields = line.split()
        if len(fields) < 2:
            raise ParseError("expected at least 2 fields (utt_id, score)", line_no)
        utt_id = fields[0]
        if utt_id in seen:
            raise ParseError(f"duplicate utt_id '{utt_id}'", line_no)
        seen.add(utt_id)
        records.append(ScoreRecord(utt_id, _parse_float(fields[1], "score", line_no)))
    return records


def write_cm_scores(records: Iterable[ScoreRecord]) -> str:
    """Serialize score records; floats use shortest exact representation."""
    return "".join(f"{r.utt_id} {r.score!r}\n" for r in records)


def parse_metadata(stream: str | Iterable[str]) -> list[MetadataRecord]:
    """Parse a tab-separated metadata table, validating each record."""
    records: list[MetadataRecord] = []
    seen: set[str] = set()
    for line_no, line in _iter_content_lines(stream):
        fields = line.split("\t")
        if len(fields) != 5:
            raise ParseError(
                f"expected 5 tab-separated fields, got {len(fields)}", line_no
            )
        utt_id, gender_tok, codec_id, attack_id, label_tok = (f.strip() for f in fields)
        if utt_id in seen:
            raise ParseError(f"duplicate utt_id '{utt_id}'", line_no)
        seen.add(utt_id)
        gender = _GENDER_ALIASES.get(gender_tok.lower())
        if gender is None:
            raise ParseError(f"unknown gender token '{gender_tok}'", line_no)
        label = label_tok.lower()
        if label not in LABELS:
            raise ParseError(f"unknown label token '{label_tok}'", line_no)
        try:
            records.append(MetadataRecord(utt_id, gender, codec_id, attack_id, label))
        except ValidationError as exc:
            raise ParseError(str(exc), line_no) from None
    return records


def write_metadata(records: Iterable[MetadataRecord]) -> str:
    return "".join(
        f"{r.utt_id}\t{r.gender}\t{r.codec_id}\t{r.attack_id}\t{r.label}\n"
        for r in records
    )


def parse_sasv_trials(stream: str | Iterable[str]) -> list[SasvTrialRecord]:
    """Parse a tab-separated trial list; the class token is case-insensitive."""
    records: list[SasvTrialRecord] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in _iter_content_lines(stream):
        fields = [f.strip() for f in line.split("\t")]
        if not 3 <= len(fields) <= 5:
            raise ParseError(
                f"expected 3 to 5 tab-separated fields, got {len(fields)}", line_no
            )
        enroll_id, test_utt, class_tok = fields[:3]
        trial_class = class_tok.lower()
        if trial_class not in TRIAL_CLASSES:
            raise ParseError(f"unknown trial class '{class_tok}'", line_no)
        key = (enroll_id, test_utt)
        if key in seen:
            raise ParseError(f"duplicate trial '{enroll_id}\t{test_utt}'", line_no)
        seen.add(key)
        asv = _parse_float(fields[3], "asv score", line_no) if len(fields) > 3 else None
        cm = _parse_float(fields[4], "cm score", line_no) if len(fields) > 4 else None
        try:
            records.append(SasvTrialRecord(enroll_id, test_utt, trial_class, asv, cm))
        except ValidationError as exc:
            raise ParseError(str(exc), line_no) from None
    return records


def write_sasv_trials(records: Iterable[SasvTrialRecord]) -> str:
    lines = []
    for r in records:
        parts = [r.enroll_id, r.test_utt, r.trial_class]
        if r.asv_score is not None:
            parts.append(repr(r.asv_score))
            if r.cm_score is not None:
                parts.append(repr(r.cm_score))
        lines.append("\t".join(parts) + "\n")
    return "".join(lines)


def parse_embeddings(stream: str | Iterable[str]) -> dict[str, np.ndarray]:
    """Parse ``utt_id v1 .. vD`` lines into an ordered id -> vector map.

    All vectors must share one dimension; duplicates are rejected.
    """
    out: dict[str, np.ndarray] = {}
    dim: int | None = None
    for line_no, line in _iter_content_lines(stream):
        fields = line.split()
        if len(fields) < 2:
            raise ParseError("expected utt_id followed by vector components", line_no)
        utt_id = fields[0]
        if utt_id in out:
            raise ParseError(f"duplicate utt_id '{utt_id}'", line_no)
        vec = np.array(
            [_parse_float(tok, "vector component", line_no) for tok in fields[1:]],
            dtype=np.float64,
        )
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ParseError(
                f"dimension mismatch: expected {dim}, got {vec.size}", line_no
            )
        out[utt_id] = vec
    return out


@dataclass(frozen=True)
class ScoreSet:
    """Scores joined with labels and attack/codec/gender attributes.

    Arrays are aligned and ordered as in the score file. ``n_unscored``
    counts metadata entries that had no score (allowed, reported).
    """

    utt_ids: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    attacks: np.ndarray
    codecs: np.ndarray
    genders: np.ndarray
    n_unscored: int = 0

    def __len__(self) -> int:
        return self.scores.size

    @property
    def bonafide_mask(self) -> np.ndarray:
        return self.labels == "bonafide"

    @property
    def bonafide_scores(self) -> np.ndarray:
        return self.scores[self.bonafide_mask]

    @property
    def spoof_scores(self) -> np.ndarray:
        return self.scores[~self.bonafide_mask]

    def attack_ids(self) -> list[str]:
        """Distinct attack ids among spoof utterances, sorted."""
        return sorted(set(self.attacks[~self.bonafide_mask]))

    def codec_ids(self) -> list[str]:
        """Distinct codec ids, '-' (clean) first, the rest sorted."""
        ids = set(self.codecs)
        ordered = sorted(ids - {"-"})
        return (["-"] if "-" in ids else []) + ordered


def join_scores_metadata(
    scores: Iterable[ScoreRecord], meta: Iterable[MetadataRecord]
) -> ScoreSet:
    """Join scores to metadata by utt_id.

    Every scored utterance must have exactly one metadata row; metadata
    without a score is allowed and only counted.
    """
    meta_by_id: dict[str, MetadataRecord] = {}
    for m in meta:
        if m.utt_id in meta_by_id:
            raise ValidationError(f"duplicate metadata for utt_id '{m.utt_id}'")
        meta_by_id[m.utt_id] = m

    score_list = list(scores)
    missing = [r.utt_id for r in score_list if r.utt_id not in meta_by_id]
    if missing:
        shown = ", ".join(missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise DataError(f"{len(missing)} scored utterances lack metadata: {shown}{more}")

    joined = [meta_by_id[r.utt_id] for r in score_list]
    return ScoreSet(
        utt_ids=np.array([r.utt_id for r in score_list], dtype=object),
        scores=np.array([r.score for r in score_list], dtype=np.float64),
        labels=np.array([m.label for m in joined], dtype=object),
        attacks=np.array([m.attack_id for m in joined], dtype=object),
        codecs=np.array([m.codec_id for m in joined], dtype=object),
        genders=np.array([m.gender for m in joined], dtype=object),
        n_unscored=len(meta_by_id) - len(score_list),
    )


@dataclass(frozen=True)
class SasvTrialSet:
    """Column view of a trial list; missing scores are NaN.

    ``attacks``/``codecs`` stay None until filled by
    :func:`join_trials_metadata`.
    """

    enroll_ids: np.ndarray
    test_utts: np.ndarray
    classes: np.ndarray
    asv: np.ndarray
    cm: np.ndarray
    attacks: np.ndarray | None = None
    codecs: np.ndarray | None = None

    def __len__(self) -> int:
        return self.classes.size

    @classmethod
    def from_records(cls, records: Iterable[SasvTrialRecord]) -> "SasvTrialSet":
        recs = list(records)
        return cls(
            enroll_ids=np.array([r.enroll_id for r in recs], dtype=object),
            test_utts=np.array([r.test_utt for r in recs], dtype=object),
            classes=np.array([r.trial_class for r in recs], dtype=object),
            asv=np.array(
                [math.nan if r.asv_score is None else r.asv_score for r in recs]
            ),
            cm=np.array(
                [math.nan if r.cm_score is None else r.cm_score for r in recs]
            ),
        )

    def class_mask(self, trial_class: str) -> np.ndarray:
        if trial_class not in TRIAL_CLASSES:
            raise ValueError(f"unknown trial class '{trial_class}'")
        return self.classes == trial_class

    @property
    def has_paired_scores(self) -> bool:
        """True when every trial carries both an asv and a cm score."""
        return len(self) > 0 and not (
            np.isnan(self.asv).any() or np.isnan(self.cm).any()
        )

    @property
    def has_single_scores(self) -> bool:
        """True when every trial carries exactly one score (the asv slot)."""
        return (
            len(self) > 0
            and not np.isnan(self.asv).any()
            and bool(np.isnan(self.cm).all())
        )

    def _column(self, which: str) -> np.ndarray:
        col = {"asv": self.asv, "cm": self.cm}.get(which)
        if col is None:
            raise ValueError(f"unknown score column '{which}'")
        if np.isnan(col).any():
            raise DataError(f"trial set has missing {which} scores")
        return col

    def scores_of(self, trial_class: str, which: str = "asv") -> np.ndarray:
        """Scores of one column restricted to one trial class."""
        return self._column(which)[self.class_mask(trial_class)]


def join_trials_metadata(
    trials: SasvTrialSet, meta: Iterable[MetadataRecord]
) -> SasvTrialSet:
    """Attach attack/codec attributes to trials via their test utterance."""
    meta_by_id: dict[str, MetadataRecord] = {}
    for m in meta:
        if m.utt_id in meta_by_id:
            raise ValidationError(f"duplicate metadata for utt_id '{m.utt_id}'")
        meta_by_id[m.utt_id] = m
    missing = [t for t in trials.test_utts if t not in meta_by_id]
    if missing:
        shown = ", ".join(str(t) for t in missing[:10])
        raise DataError(f"{len(missing)} test utterances lack metadata: {shown}")
    attacks = np.array([meta_by_id[t].attack_id for t in trials.test_utts], dtype=object)
    codecs = np.array([meta_by_id[t].codec_id for t in trials.test_utts], dtype=object)
    return replace(trials, attacks=attacks, codecs=codecs)


_WAV_FMT_PCM = 1
_WAV_FMT_FLOAT = 3


def read_wav(path) -> AudioBuffer:
    """Read a mono RIFF/WAVE file (16-bit PCM or 32-bit IEEE float).

    Integer samples map to v / 32768; other codecs, multichannel layouts and
    truncated files are rejected.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")

    fmt_chunk: bytes | None = None
    data_chunk: bytes | None = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise AudioFormatError(
                f"{path}: chunk {chunk_id!r} declares {size} bytes, "
                f"file holds {len(body)}"
            )
        if chunk_id == b"fmt " and fmt_chunk is None:
            fmt_chunk = body
        elif chunk_id == b"data" and data_chunk is None:
            data_chunk = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt_chunk is None or data_chunk is None:
        raise AudioFormatError(f"{path}: missing fmt or data chunk")
    if len(fmt_chunk) < 16:
        raise AudioFormatError(f"{path}: fmt chunk too short")

    wav_format, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt_chunk)
    if channels != 1:
        raise AudioFormatError(f"{path}: {channels} channels, only mono supported")
    if rate <= 0:
        raise AudioFormatError(f"{path}: invalid sample rate {rate}")

    if wav_format == _WAV_FMT_PCM and bits == 16:
        if len(data_chunk) % 2:
            raise AudioFormatError(f"{path}: data chunk not a whole number of frames")
        samples = np.frombuffer(data_chunk, dtype="<i2").astype(np.float64) / 32768.0
    elif wav_format == _WAV_FMT_FLOAT and bits == 32:
        if len(data_chunk) % 4:
            raise AudioFormatError(f"{path}: data chunk not a whole number of frames")
        raw = np.frombuffer(data_chunk, dtype="<f4").astype(np.float64)
        if not np.isfinite(raw).all():
            raise AudioFormatError(f"{path}: non-finite float samples")
        samples = np.clip(raw, -1.0, 1.0)
    else:
        raise AudioFormatError(
            f"{path}: unsupported layout (format {wav_format}, {bits}-bit); "
            "expected 16-bit PCM or 32-bit float"
        )
    return AudioBuffer(samples=samples, sample_rate=int(rate))
