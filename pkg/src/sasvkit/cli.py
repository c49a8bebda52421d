"""Command-line front door: audit, evaluate, calibrate, fuse, sweep, synth.

Every subcommand is deterministic given its inputs, flags and seed. Exit
codes: 0 success, 2 usage or I/O problem, 3 data-contract violation,
4 numerical failure. Reports go to --out (stdout when omitted).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .audit import VadConfig, audit_dataset, duration_seconds, speech_onset_delay
from .calibration import (
    CalibrationModel,
    ScoreScaling,
    TrainConfig,
    apply_calibration,
    fit_beta,
    fit_logreg,
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
from .fusion import evaluate_weight_grid, fuse_trials, lse_fuse, linear_fuse
from .io import (
    SasvTrialSet,
    ScoreRecord,
    join_scores_metadata,
    parse_cm_scores,
    parse_metadata,
    parse_sasv_trials,
    read_wav,
    write_cm_scores,
    write_metadata,
    write_sasv_trials,
)
from .metrics import (
    BinaryScores,
    MetricReport,
    SasvScores,
    TandemScores,
    TeerGrid,
    a_dcf,
    evaluate_binary,
    grouped_eval,
    t_dcf,
    t_eer,
)
from .profiles import resolve_cost_model
from .reports import round6, write_report
from .synth import GaussianSpec, make_cm_fixture, make_sasv_fixture


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        Path(out).write_bytes(data)


def _parse_overrides(pairs: list[str] | None) -> dict:
    overrides = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValidationError(f"expected key=value in --set, got '{pair}'")
        try:
            overrides[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"non-numeric value in --set {pair}") from None
    return overrides


def _cost_model(args):
    return resolve_cost_model(args.profile, args.profiles, _parse_overrides(args.set))


def _add_cost_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--profile", help="cost profile name from the profiles file")
    parser.add_argument("--profiles", help="path to a profiles JSON (default: packaged examples)")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="inline cost model override, repeatable (e.g. --set pi_target=0.95)",
    )


def _parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"expected --grid start:stop:step, got '{text}'")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"non-numeric grid bound in '{text}'") from None
    return start, stop, step


def cmd_audit(args) -> int:
    meta = parse_metadata(_read_text(args.meta))
    durations = delays = None
    if args.audio is not None:
        audio_dir = Path(args.audio)
        if not audio_dir.is_dir():
            raise FileNotFoundError(f"audio directory '{args.audio}' not found")
        vad = VadConfig()
        durations, delays = {}, {}
        for wav_path in sorted(audio_dir.glob("*.wav")):
            buf = read_wav(wav_path)
            durations[wav_path.stem] = duration_seconds(buf)
            delays[wav_path.stem] = speech_onset_delay(buf, vad)
    quality = parse_cm_scores(_read_text(args.quality)) if args.quality else None

    report = audit_dataset(meta, durations=durations, delays=delays, quality_scores=quality)
    _emit(write_report(report, args.format), args.out)
    counts = report.balance
    print(
        f"audited {counts.total} utterances "
        f"({counts.by_label['bonafide']} bonafide, {counts.by_label['spoof']} spoof)",
        file=sys.stderr,
    )
    return 0


def cmd_eval_cm(args) -> int:
    scores = parse_cm_scores(_read_text(args.scores))
    meta = parse_metadata(_read_text(args.meta))
    ss = join_scores_metadata(scores, meta)
    cost = _cost_model(args)
    report = evaluate_binary(BinaryScores(ss.bonafide_scores, ss.spoof_scores), cost)
    _emit(write_report(report, args.format), args.out)
    if args.by:
        table = grouped_eval(ss, args.by, metric=args.metric, cost=cost)
        breakdown_out = args.breakdown_out
        if breakdown_out is None and args.out is not None:
            breakdown_out = str(Path(args.out).with_suffix(".breakdown.csv"))
        _emit(write_report(table, "csv"), breakdown_out)
    print(
        f"eer {100 * report.eer:.2f}%  min_dcf {report.min_dcf:.4f}  "
        f"act_dcf {report.act_dcf:.4f}  cllr {report.cllr:.4f} bits",
        file=sys.stderr,
    )
    return 0


def cmd_calibrate(args) -> int:
    if args.mode == "fit":
        if not (args.scores and args.meta):
            raise ValidationError("calibrate fit needs --scores and --meta")
        ss = join_scores_metadata(
            parse_cm_scores(_read_text(args.scores)), parse_metadata(_read_text(args.meta))
        )
        pos, neg = ss.bonafide_scores, ss.spoof_scores
        if pos.size == 0 or neg.size == 0:
            raise DataError("calibration needs both bonafide and spoof scores")
        tc = TrainConfig(effective_prior=args.prior)
        if args.kind == "logreg":
            model = fit_logreg(pos, neg, tc)
        else:
            model = fit_beta(pos, neg, ScoreScaling(args.scaling, args.epsilon), tc)
        _emit(model.to_json().encode("utf-8"), args.out)
        print(f"fitted {model.kind}: slope {model.slope:.6g} offset {model.offset:.6g}",
              file=sys.stderr)
        return 0

    if not (args.model and args.scores):
        raise ValidationError("calibrate apply needs --model and --scores")
    model = CalibrationModel.from_json(_read_text(args.model))
    records = parse_cm_scores(_read_text(args.scores))
    llrs = apply_calibration(model, [r.score for r in records])
    out_records = [ScoreRecord(r.utt_id, float(v)) for r, v in zip(records, llrs)]
    _emit(write_cm_scores(out_records).encode("utf-8"), args.out)
    return 0


def _check_aligned_keys(score_lists: list[list[ScoreRecord]]) -> None:
    reference = {r.utt_id for r in score_lists[0]}
    for other in score_lists[1:]:
        keys = {r.utt_id for r in other}
        mismatch = sorted(reference ^ keys)
        if mismatch:
            shown = ", ".join(mismatch[:10])
            raise DataError(
                f"score files disagree on {len(mismatch)} keys: {shown}"
            )


def cmd_fuse(args) -> int:
    if args.trials is not None:
        if args.mode != "lse":
            raise ValidationError("--trials fusion supports only --mode lse")
        trials = SasvTrialSet.from_records(parse_sasv_trials(_read_text(args.trials)))
        if not trials.has_paired_scores:
            raise DataError("trial file must carry both asv and cm scores")
        fused = lse_fuse(trials.cm, trials.asv, args.p)
        records = [
            ScoreRecord(f"{enroll}*{test}", float(score))
            for enroll, test, score in zip(trials.enroll_ids, trials.test_utts, fused)
        ]
        _emit(write_cm_scores(records).encode("utf-8"), args.out)
        return 0

    if not args.scores or len(args.scores) < 2:
        raise ValidationError("fusion needs at least two --scores files")
    score_lists = [parse_cm_scores(_read_text(p)) for p in args.scores]
    _check_aligned_keys(score_lists)
    by_key = [{r.utt_id: r.score for r in lst} for lst in score_lists]
    keys = [r.utt_id for r in score_lists[0]]

    if args.mode == "linear":
        if args.weights is None:
            weights = [1.0 / len(score_lists)] * len(score_lists)
        else:
            weights = [float(w) for w in args.weights.split(",")]
        fused = {k: linear_fuse([m[k] for m in by_key], weights) for k in keys}
    else:
        if len(score_lists) != 2:
            raise ValidationError("lse fusion takes exactly two --scores files (cm, asv)")
        cm_map, asv_map = by_key
        fused = {k: lse_fuse(cm_map[k], asv_map[k], args.p) for k in keys}

    records = [ScoreRecord(k, float(fused[k])) for k in keys]
    _emit(write_cm_scores(records).encode("utf-8"), args.out)
    return 0


def cmd_eval_sasv(args) -> int:
    trials = SasvTrialSet.from_records(parse_sasv_trials(_read_text(args.trials)))
    cost = _cost_model(args)

    if trials.has_paired_scores:
        fused = fuse_trials(trials, args.p)
        a_value, a_thr = a_dcf(fused, cost)
        tandem = TandemScores.from_trials(trials)
        t_value, t_cm_thr = t_dcf(tandem, cost, asv_threshold=args.asv_threshold)
        null_fields: frozenset[str] = frozenset()
        try:
            teer_value = t_eer(tandem, TeerGrid(n_points=args.teer_points))
        except NoConcurrentPointError as exc:
            print(f"warning: t-EER unavailable: {exc}", file=sys.stderr)
            teer_value = None
            null_fields = frozenset({"t_eer"})
        report = MetricReport(
            a_dcf=a_value,
            t_dcf=t_value,
            t_eer=teer_value,
            a_dcf_threshold=a_thr,
            t_dcf_cm_threshold=t_cm_thr,
            null_fields=null_fields,
        )
    elif trials.has_single_scores:
        scores = SasvScores.from_trials(trials, "asv")
        a_value, a_thr = a_dcf(scores, cost)
        report = MetricReport(a_dcf=a_value, a_dcf_threshold=a_thr)
    else:
        raise DataError(
            "trial file must carry one fused score or an (asv, cm) pair per trial"
        )

    _emit(write_report(report, args.format), args.out)
    summary = f"a_dcf {report.a_dcf:.4f}"
    if report.t_dcf is not None:
        summary += f"  t_dcf {report.t_dcf:.4f}"
        summary += (
            f"  t_eer {100 * report.t_eer:.2f}%" if report.t_eer is not None else "  t_eer n/a"
        )
    print(summary, file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    trials = SasvTrialSet.from_records(parse_sasv_trials(_read_text(args.trials)))
    if not trials.has_paired_scores:
        raise DataError("weight sweep needs paired asv/cm scores per trial")
    cost = _cost_model(args)
    grid = _parse_grid(args.grid)
    table = evaluate_weight_grid(trials, cost=cost, grid=grid)
    best_p, best_value = min(table, key=lambda row: (row[1], row[0]))
    payload = {
        "objective": "a_dcf",
        "grid": {"start": grid[0], "stop": grid[1], "step": grid[2]},
        "results": [{"p": round6(p), "a_dcf": round6(v)} for p, v in table],
        "best_p": round6(best_p),
        "best_a_dcf": round6(best_value),
        "note": "p weights the verification subsystem: larger p trusts the "
        "ASV LLRs more than the countermeasure LLRs",
    }
    _emit((json.dumps(payload, indent=2) + "\n").encode("utf-8"), args.out)
    print(f"best p {best_p:.3g} (a_dcf {best_value:.4f})", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = GaussianSpec(mu_pos=args.mu_pos, mu_neg=args.mu_neg, sigma=args.sigma)
    attacks = tuple(f"A{i + 1:02d}" for i in range(args.n_attacks))
    codecs = ("-",) + tuple(f"C{i + 1:02d}" for i in range(args.n_codecs - 1))
    scores, meta, manifest = make_cm_fixture(
        args.seed, args.n_pos, args.n_neg, spec, attacks=attacks, codecs=codecs
    )
    trials, sasv_manifest = make_sasv_fixture(
        args.seed + 1, args.trials_per_class, asv=spec, cm=spec
    )
    manifest["sasv"] = sasv_manifest
    (out_dir / "cm_scores.txt").write_text(write_cm_scores(scores), encoding="utf-8")
    (out_dir / "metadata.tsv").write_text(write_metadata(meta), encoding="utf-8")
    (out_dir / "sasv_trials.tsv").write_text(write_sasv_trials(trials), encoding="utf-8")
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    print(
        f"wrote fixture to {out_dir} (closed-form eer {manifest['closed_form_eer']:.4f})",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sasvkit",
        description="Score-domain toolkit for spoofing-aware speaker verification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="dataset balance/duration/delay/quality audit")
    p.add_argument("--meta", required=True, help="metadata table")
    p.add_argument("--audio", help="directory of <utt_id>.wav files (optional)")
    p.add_argument("--quality", help="per-utterance quality score file (optional)")
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("eval-cm", help="EER/minDCF/actDCF/Cllr of a CM score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--by", help="breakdown grouping: attack, codec or attack,codec")
    p.add_argument("--metric", default="eer", choices=["eer", "min_dcf", "act_dcf", "cllr"],
                   help="metric for the breakdown cells")
    p.add_argument("--breakdown-out", help="breakdown CSV path (default: <out>.breakdown.csv)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_eval_cm)

    p = sub.add_parser("calibrate", help="fit or apply a score-to-LLR calibrator")
    p.add_argument("mode", choices=["fit", "apply"])
    p.add_argument("--scores", help="raw score file")
    p.add_argument("--meta", help="metadata with labels (fit)")
    p.add_argument("--model", help="model JSON (apply)")
    p.add_argument("--kind", choices=["logreg", "beta"], default="logreg")
    p.add_argument("--scaling", choices=["cosine_affine", "logistic", "identity"],
                   default="cosine_affine", help="unit-interval scaling for beta")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--prior", type=float, default=0.5, help="effective training prior")
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fuse", help="fuse aligned score files or trial pairs")
    p.add_argument("--mode", choices=["linear", "lse"], default="lse")
    p.add_argument("--scores", action="append",
                   help="score file, repeatable; for lse: first cm, second asv")
    p.add_argument("--trials", help="paired trial file (lse mode, keys enroll*test)")
    p.add_argument("--weights", help="comma-separated linear weights (default: equal)")
    p.add_argument("--p", type=float, default=0.5, help="ASV weight for lse fusion")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval-sasv", help="a-DCF, t-DCF and t-EER of a trial file")
    p.add_argument("--trials", required=True)
    p.add_argument("--p", type=float, default=0.5,
                   help="ASV weight for fusing paired scores before a-DCF")
    p.add_argument("--asv-threshold", type=float,
                   help="tandem ASV operating point (default: ASV EER threshold)")
    p.add_argument("--teer-points", type=int, default=257)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_eval_sasv)

    p = sub.add_parser("sweep", help="grid-search the lse fusion weight on dev trials")
    p.add_argument("--trials", required=True)
    p.add_argument("--grid", default="0:1:0.05", metavar="START:STOP:STEP")
    p.add_argument("--out")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate deterministic Gaussian fixtures")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-pos", type=int, default=1000)
    p.add_argument("--n-neg", type=int, default=1000)
    p.add_argument("--mu-pos", type=float, default=1.0)
    p.add_argument("--mu-neg", type=float, default=-1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-attacks", type=int, default=2)
    p.add_argument("--n-codecs", type=int, default=1)
    p.add_argument("--trials-per-class", type=int, default=500)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParseError, ValidationError, DataError, AudioFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except SasvkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
