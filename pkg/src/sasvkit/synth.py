"""Deterministic Gaussian score fixtures with known separability.

Generators emit plain records (score, metadata, trial) plus a manifest
carrying the generation parameters and the closed-form equal error rate of
the two-Gaussian construction, so downstream metrics can be checked against
an analytic reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .io import MetadataRecord, SasvTrialRecord, ScoreRecord


def closed_form_eer(mu_pos: float, mu_neg: float, sigma: float) -> float:
    """EER of equal-variance Gaussian classes N(mu_pos, s^2) vs N(mu_neg, s^2).

    The equal-error threshold sits at the midpoint of the means, giving
    1 - Phi(delta_mu / (2 sigma)).
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    z = (mu_pos - mu_neg) / (2.0 * sigma)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class GaussianSpec:
    """Class means and shared standard deviation for a synthetic fixture."""

    mu_pos: float = 1.0
    mu_neg: float = -1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")

    @property
    def eer(self) -> float:
        return closed_form_eer(self.mu_pos, self.mu_neg, self.sigma)


def make_cm_fixture(
    seed: int,
    n_pos: int,
    n_neg: int,
    spec: GaussianSpec = GaussianSpec(),
    attacks: tuple[str, ...] = ("A01", "A02"),
    codecs: tuple[str, ...] = ("-",),
) -> tuple[list[ScoreRecord], list[MetadataRecord], dict]:
    """Scored bonafide/spoof utterances with round-robin attributes.

    Spoof utterances cycle through the attack and codec lists; bonafide
    utterances cycle through codecs and alternate gender, so per-attack and
    per-codec groupings are all populated.
    """
    if n_pos < 1 or n_neg < 1:
        raise ValidationError("need at least one utterance per class")
    if not attacks or not codecs:
        raise ValidationError("need at least one attack and one codec id")
    rng = np.random.default_rng(seed)
    pos = rng.normal(spec.mu_pos, spec.sigma, size=n_pos)
    neg = rng.normal(spec.mu_neg, spec.sigma, size=n_neg)

    scores: list[ScoreRecord] = []
    meta: list[MetadataRecord] = []
    for i, value in enumerate(pos):
        utt = f"bona{i:06d}"
        scores.append(ScoreRecord(utt, float(value)))
        meta.append(
            MetadataRecord(
                utt_id=utt,
                gender="M" if i % 2 == 0 else "F",
                codec_id=codecs[i % len(codecs)],
                attack_id="-",
                label="bonafide",
            )
        )
    for i, value in enumerate(neg):
        utt = f"spoof{i:06d}"
        scores.append(ScoreRecord(utt, float(value)))
        meta.append(
            MetadataRecord(
                utt_id=utt,
                gender="M" if i % 2 == 0 else "F",
                codec_id=codecs[i % len(codecs)],
                attack_id=attacks[i % len(attacks)],
                label="spoof",
            )
        )
    manifest = {
        "kind": "cm_fixture",
        "seed": seed,
        "n_bonafide": n_pos,
        "n_spoof": n_neg,
        "mu_pos": spec.mu_pos,
        "mu_neg": spec.mu_neg,
        "sigma": spec.sigma,
        "attacks": list(attacks),
        "codecs": list(codecs),
        "closed_form_eer": spec.eer,
    }
    return scores, meta, manifest


def make_sasv_fixture(
    seed: int,
    n_per_class: int,
    asv: GaussianSpec = GaussianSpec(),
    cm: GaussianSpec = GaussianSpec(),
) -> tuple[list[SasvTrialRecord], dict]:
    """Paired-score SASV trials with Gaussian subsystems.

    ASV scores separate target (positive mean) from nontarget and spoof;
    CM scores separate bonafide (target and nontarget, positive mean) from
    spoof. The manifest records the closed-form EER of both subsystems.
    """
    if n_per_class < 1:
        raise ValidationError("need at least one trial per class")
    rng = np.random.default_rng(seed)
    n = n_per_class
    columns = {
        "target": (rng.normal(asv.mu_pos, asv.sigma, n), rng.normal(cm.mu_pos, cm.sigma, n)),
        "nontarget": (rng.normal(asv.mu_neg, asv.sigma, n), rng.normal(cm.mu_pos, cm.sigma, n)),
        "spoof": (rng.normal(asv.mu_neg, asv.sigma, n), rng.normal(cm.mu_neg, cm.sigma, n)),
    }
    trials: list[SasvTrialRecord] = []
    for trial_class, (asv_scores, cm_scores) in columns.items():
        for i in range(n):
            trials.append(
                SasvTrialRecord(
                    enroll_id=f"spk{i % 97:04d}",
                    test_utt=f"{trial_class[:3]}{i:06d}",
                    trial_class=trial_class,
                    asv_score=float(asv_scores[i]),
                    cm_score=float(cm_scores[i]),
                )
            )
    manifest = {
        "kind": "sasv_fixture",
        "seed": seed,
        "n_per_class": n_per_class,
        "asv": {"mu_target": asv.mu_pos, "mu_other": asv.mu_neg, "sigma": asv.sigma},
        "cm": {"mu_bonafide": cm.mu_pos, "mu_spoof": cm.mu_neg, "sigma": cm.sigma},
        "closed_form_asv_eer": asv.eer,
        "closed_form_cm_eer": cm.eer,
    }
    return trials, manifest
