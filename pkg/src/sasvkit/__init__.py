"""sasvkit: score-domain toolkit for spoofing-aware speaker verification.

Audits anti-spoofing datasets (balance, duration, onset delay, quality),
calibrates countermeasure and verification scores into log-likelihood
ratios, fuses subsystems, and evaluates with the detection metric suite
(EER, minDCF, actDCF, Cllr, a-DCF, t-DCF, t-EER) including per-attack and
per-codec breakdowns.
"""

__version__ = "0.1.0"

from .audit import (
    AuditReport,
    Histogram,
    VadConfig,
    audit_dataset,
    balance_report,
    duration_seconds,
    histogram,
    quality_summary,
    speech_onset_delay,
)
from .calibration import (
    CalibrationModel,
    PavCalibrator,
    ScoreScaling,
    TrainConfig,
    apply_calibration,
    fit_beta,
    fit_logreg,
    pav_llr,
    scale_to_unit,
)
from .errors import (
    AudioFormatError,
    DataError,
    NoConcurrentPointError,
    ParseError,
    SasvkitError,
    SolverError,
    ValidationError,
)
from .fusion import (
    cosine_score,
    enroll_average,
    fuse_trials,
    grid_search_weight,
    linear_fuse,
    lse_fuse,
)
from .io import (
    AudioBuffer,
    MetadataRecord,
    SasvTrialRecord,
    SasvTrialSet,
    ScoreRecord,
    ScoreSet,
    join_scores_metadata,
    join_trials_metadata,
    parse_cm_scores,
    parse_embeddings,
    parse_metadata,
    parse_sasv_trials,
    read_wav,
    write_cm_scores,
    write_metadata,
    write_sasv_trials,
)
from .metrics import (
    BinaryScores,
    BreakdownTable,
    CostModel,
    MetricReport,
    SasvScores,
    TandemScores,
    TeerGrid,
    a_dcf,
    act_dcf,
    cllr,
    det_curve,
    eer,
    eer_threshold,
    evaluate_binary,
    grouped_eval,
    min_dcf,
    t_dcf,
    t_eer,
)
from .profiles import load_profiles, resolve_cost_model
from .reports import write_report
from .synth import GaussianSpec, closed_form_eer, make_cm_fixture, make_sasv_fixture
