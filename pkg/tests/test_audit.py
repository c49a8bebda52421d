import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasvkit import (
    AudioBuffer,
    DataError,
    MetadataRecord,
    ScoreRecord,
    ValidationError,
    VadConfig,
    balance_report,
    duration_seconds,
    histogram,
    quality_summary,
    speech_onset_delay,
)
from sasvkit.audit import audit_dataset

from conftest import sine_tone

RATE = 16000


def buf(samples, rate=RATE):
    return AudioBuffer(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate)


class TestDuration:
    @pytest.mark.parametrize(
        "n,rate,expected", [(16000, 16000, 1.0), (48000, 16000, 3.0), (8000, 8000, 1.0)]
    )
    def test_exact(self, n, rate, expected):
        assert duration_seconds(buf(np.zeros(n), rate)) == expected


class TestVad:
    def test_tone_from_start(self):
        delay = speech_onset_delay(buf(sine_tone(RATE, 1.0)))
        assert delay is not None and delay <= 0.010 + 1e-9

    @pytest.mark.parametrize("silence", [0.1, 0.5, 2.0])
    def test_silence_then_tone(self, silence):
        samples = np.concatenate(
            [np.zeros(int(silence * RATE)), sine_tone(RATE, 1.0)]
        )
        delay = speech_onset_delay(buf(samples))
        assert delay is not None
        assert abs(delay - silence) <= 0.020 + 1e-9

    def test_all_zero_returns_none(self):
        assert speech_onset_delay(buf(np.zeros(RATE))) is None

    def test_uniform_noise_counts_as_onset_at_start(self):
        # the threshold is relative to the peak frame: constant-level noise
        # keeps every frame active, so onset is at t=0 (not None)
        rng = np.random.default_rng(0)
        samples = 1e-4 * rng.normal(size=RATE)
        assert speech_onset_delay(buf(samples)) == 0.0

    def test_shift_equivariance(self):
        base = np.concatenate([np.zeros(RATE // 10), sine_tone(RATE, 0.5)])
        t0 = speech_onset_delay(buf(base))
        assert t0 is not None
        for shift in (0.2, 0.35, 0.313):  # includes non-multiples of the hop
            shifted = np.concatenate([np.zeros(int(round(shift * RATE))), base])
            t1 = speech_onset_delay(buf(shifted))
            assert t1 is not None
            assert abs(t1 - (t0 + shift)) <= 0.010 + 1e-9

    def test_too_short_raises(self):
        with pytest.raises(DataError, match="too short"):
            speech_onset_delay(buf(np.zeros(100)))

    def test_hangover_suppresses_click(self):
        # a single loud frame should not count as onset with hangover 5
        samples = np.zeros(RATE)
        samples[8000:8200] = 0.9
        samples_with_speech = np.concatenate([samples, sine_tone(RATE, 0.5)])
        delay = speech_onset_delay(buf(samples_with_speech))
        assert delay is not None and delay >= 0.95

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            VadConfig(frame_len=0.005, hop=0.010)
        with pytest.raises(ValidationError):
            VadConfig(threshold_db=3.0)
        with pytest.raises(ValidationError):
            VadConfig(hangover_frames=0)


class TestHistogram:
    def test_basic(self):
        h = histogram([1.0, 2.0, 3.0], 1.0, 0.0, 4.0)
        assert h.counts.tolist() == [0, 1, 1, 1]
        assert h.underflow == 0 and h.overflow == 0

    def test_empty(self):
        h = histogram([], 1.0, 0.0, 4.0)
        assert h.counts.tolist() == [0, 0, 0, 0] and h.total == 0

    def test_right_open_boundary(self):
        h = histogram([4.0], 1.0, 0.0, 4.0)
        assert h.overflow == 1 and h.counts.sum() == 0

    def test_left_closed_boundary(self):
        h = histogram([0.0], 1.0, 0.0, 4.0)
        assert h.counts.tolist() == [1, 0, 0, 0]

    def test_underflow(self):
        h = histogram([-0.5, 0.5], 1.0, 0.0, 4.0)
        assert h.underflow == 1 and h.counts.tolist() == [1, 0, 0, 0]

    def test_nan_rejected(self):
        with pytest.raises(ValidationError, match="NaN"):
            histogram([float("nan")], 1.0, 0.0, 4.0)

    def test_bad_bins_rejected(self):
        with pytest.raises(ValidationError):
            histogram([1.0], 0.0, 0.0, 4.0)
        with pytest.raises(ValidationError):
            histogram([1.0], 1.0, 4.0, 4.0)

    @given(
        st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), max_size=200),
        st.floats(min_value=0.01, max_value=10.0),
        st.floats(min_value=-50.0, max_value=50.0),
        st.floats(min_value=0.1, max_value=100.0),
    )
    def test_mass_conserved(self, values, width, lo, span):
        h = histogram(values, width, lo, lo + span)
        assert h.total == len(values)


class TestBalance:
    META = [
        MetadataRecord("u1", "M", "-", "-", "bonafide"),
        MetadataRecord("u2", "F", "-", "-", "bonafide"),
        MetadataRecord("u3", "M", "C01", "A01", "spoof"),
    ]

    def test_counts(self):
        counts = balance_report(self.META)
        assert counts.by_label == {"bonafide": 2, "spoof": 1}
        assert counts.by_attack == {"A01": 1}
        assert counts.by_gender == {"M": 2, "F": 1, "unknown": 0}

    def test_empty(self):
        counts = balance_report([])
        assert counts.total == 0
        assert counts.by_label == {"bonafide": 0, "spoof": 0}
        assert counts.by_attack == {}
        assert counts.shares()["by_label"] == {"bonafide": 0.0, "spoof": 0.0}

    def test_permutation_invariant_and_consistent(self):
        rng = np.random.default_rng(7)
        meta = [
            MetadataRecord(
                f"u{i}",
                ["M", "F", "unknown"][i % 3],
                "-",
                f"A{i % 4:02d}" if i % 5 else "-",
                "spoof" if i % 5 else "bonafide",
            )
            for i in range(100)
        ]
        shuffled = [meta[i] for i in rng.permutation(len(meta))]
        a, b = balance_report(meta), balance_report(shuffled)
        assert a == b
        for counts in (a.by_label, a.by_gender):
            assert sum(counts.values()) == a.total
        assert sum(a.by_attack.values()) == a.by_label["spoof"]


class TestQualitySummary:
    META = [
        MetadataRecord("u1", "M", "-", "-", "bonafide"),
        MetadataRecord("u2", "F", "-", "A01", "spoof"),
        MetadataRecord("u3", "M", "-", "A02", "spoof"),
    ]

    def test_single_bonafide(self):
        summary = quality_summary([ScoreRecord("u1", 3.2)], self.META)
        assert summary.bonafide is not None and summary.bonafide.total == 1
        assert summary.spoof is None and summary.per_attack == {}

    def test_two_attacks_plus_pooled(self):
        scores = [ScoreRecord("u2", 2.0), ScoreRecord("u3", 4.0)]
        summary = quality_summary(scores, self.META)
        assert sorted(summary.per_attack) == ["A01", "A02"]
        assert summary.spoof is not None and summary.spoof.total == 2

    def test_score_without_metadata(self):
        with pytest.raises(DataError):
            quality_summary([ScoreRecord("ghost", 1.0)], self.META)


class TestAuditReport:
    def test_sections_follow_inputs(self):
        meta = TestQualitySummary.META
        report = audit_dataset(meta)
        d = report.to_dict()
        assert d["total"] == 3
        assert "duration" not in d and "delay" not in d and "quality" not in d

        report = audit_dataset(
            meta,
            durations={"u1": 2.0, "u2": 3.0},
            delays={"u1": 0.1, "u2": None},
            quality_scores=[ScoreRecord("u1", 3.0)],
        )
        d = report.to_dict()
        assert d["duration"]["mean_seconds"] == 2.5
        assert d["delay"]["no_speech"] == 1 and d["delay"]["analyzed"] == 2
        assert "bonafide" in d["duration"]["histograms"]
        assert "A01" in d["delay"]["histograms"] or d["delay"]["histograms"]

    def test_measured_utt_without_metadata(self):
        with pytest.raises(DataError, match="ghost"):
            audit_dataset(TestQualitySummary.META, durations={"ghost": 1.0})
