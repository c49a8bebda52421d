"""Shared fixtures: independent brute-force oracles and audio writers.

The oracles enumerate every decision-distinct threshold (all observed
scores, all midpoints, both infinities) and count decisions directly with
boolean logic, staying independent of the library's sweep construction.
"""

from __future__ import annotations

import struct
import wave

import numpy as np


def candidate_thresholds(values) -> list[float]:
    vals = np.unique(np.asarray(values, dtype=np.float64))
    cands = [-np.inf, np.inf]
    cands.extend(float(v) for v in vals)
    cands.extend(float(m) for m in (vals[:-1] + vals[1:]) / 2.0)
    return cands


def oracle_min_dcf(pos, neg, cost) -> float:
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    norm = min(w_miss, w_fa)
    best = np.inf
    for tau in candidate_thresholds(np.concatenate([pos, neg])):
        p_miss = np.mean(pos < tau)
        p_fa = np.mean(neg >= tau)
        best = min(best, (w_miss * p_miss + w_fa * p_fa) / norm)
    return float(best)


def oracle_a_dcf(target, nontarget, spoof, cost) -> float:
    target = np.asarray(target, dtype=np.float64)
    nontarget = np.asarray(nontarget, dtype=np.float64)
    spoof = np.asarray(spoof, dtype=np.float64)
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    w_spf = cost.c_fa_spoof * cost.pi_spoof
    norm = min(w_miss, w_fa + w_spf)
    best = np.inf
    for tau in candidate_thresholds(np.concatenate([target, nontarget, spoof])):
        p_miss = np.mean(target < tau)
        p_fa_non = np.mean(nontarget >= tau)
        p_fa_spf = np.mean(spoof >= tau)
        best = min(best, (w_miss * p_miss + w_fa * p_fa_non + w_spf * p_fa_spf) / norm)
    return float(best)


def oracle_t_dcf(tandem, asv_threshold, cost) -> float:
    w_miss = cost.c_miss * cost.pi_target
    w_fa = cost.c_fa * cost.pi_nontarget
    w_spf = cost.c_fa_spoof * cost.pi_spoof
    norm = min(w_miss, w_fa + w_spf)
    pooled_cm = np.concatenate(
        [tandem.target_cm, tandem.nontarget_cm, tandem.spoof_cm]
    )
    best = np.inf
    for tau in candidate_thresholds(pooled_cm):
        p_miss = np.mean(
            (tandem.target_asv < asv_threshold) | (tandem.target_cm < tau)
        )
        p_fa_non = np.mean(
            (tandem.nontarget_asv >= asv_threshold) & (tandem.nontarget_cm >= tau)
        )
        p_fa_spf = np.mean(
            (tandem.spoof_asv >= asv_threshold) & (tandem.spoof_cm >= tau)
        )
        best = min(best, (w_miss * p_miss + w_fa * p_fa_non + w_spf * p_fa_spf) / norm)
    return float(best)


def oracle_eer(pos, neg) -> float:
    """Exhaustive sweep EER: crossing of the piecewise-linear rate curves."""
    pos = np.asarray(pos, dtype=np.float64)
    neg = np.asarray(neg, dtype=np.float64)
    taus = sorted(candidate_thresholds(np.concatenate([pos, neg])))
    points = [(np.mean(pos < t), np.mean(neg >= t)) for t in taus]
    prev_miss, prev_fa = points[0]
    for p_miss, p_fa in points[1:]:
        d0, d1 = prev_miss - prev_fa, p_miss - p_fa
        if d1 >= 0.0:
            if d1 == 0.0:
                return float(p_miss)
            frac = -d0 / (d1 - d0)
            return float(prev_miss + frac * (p_miss - prev_miss))
        prev_miss, prev_fa = p_miss, p_fa
    raise AssertionError("no crossing found")


def sine_tone(rate: int, duration: float, freq: float = 1000.0, amp: float = 0.5):
    t = np.arange(int(round(duration * rate))) / rate
    return amp * np.sin(2.0 * np.pi * freq * t)


def write_pcm16(path, samples, rate: int) -> None:
    """Write float samples in [-1, 1) as a 16-bit PCM mono WAV."""
    ints = np.clip(np.asarray(samples) * 32768.0, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(ints.tobytes())


def make_wav_bytes(
    data: bytes,
    rate: int = 16000,
    channels: int = 1,
    bits: int = 16,
    wav_format: int = 1,
    declared_data_size: int | None = None,
) -> bytes:
    """Hand-rolled RIFF container for exercising reader error paths."""
    if declared_data_size is None:
        declared_data_size = len(data)
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", wav_format, channels, rate, rate * block_align, block_align, bits
    )
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", declared_data_size) + data
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks
