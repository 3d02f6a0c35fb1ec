"""Digit-law conformance scoring.

The statistic is a discrete Kolmogorov-Smirnov distance between the
observed leading-digit distribution and an operator-specific reference
pmf. Its null distribution is resampled from the reference, the raw
anomaly score is one minus the Monte-Carlo p-value, and the score is then
normalised against the reference's calibration floor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from . import rng as rngmod
from .digits import DigitHistogram, check_pmf, histogram
from .errors import EmptyHistogram, NoUsableOutcomes, UncalibratedReference
from .operators import OPERATOR_ORDER, OperatorKind, operator_index

if TYPE_CHECKING:
    from .reference import ReferenceDistribution, ReferenceStore

DEFAULT_MIN_SAMPLES = 5
DEFAULT_KS_RESAMPLES = 2_000
# Pipeline-level default. The p-value grid is 1/(resamples+1); it has to be
# much finer than the calibration floor's resolution (max of 1000 null raw
# scores) or normalised scores saturate at 0 for strong anomalies.
DEFAULT_SCORE_RESAMPLES = 20_000


@dataclass(frozen=True)
class KsResult:
    """Discrete KS statistic with its Monte-Carlo tail probability."""

    statistic: float
    p_value: float
    resamples: int


@dataclass(frozen=True)
class TestOutcome:
    """Scored outcome for one statistic group."""

    operator: OperatorKind
    raw_score: float
    normalized_score: float
    sample_count: int
    skipped: int
    reference_key: tuple


@dataclass(frozen=True)
class InsufficientData:
    """Returned instead of a TestOutcome when evidence is too thin."""

    operator: OperatorKind
    usable: int
    required: int
    skipped: int = 0


@dataclass(frozen=True)
class AggregateOutcome:
    """Combined anomaly probability for one source."""

    per_operator: tuple[TestOutcome, ...]
    overall: float
    insufficient: tuple[InsufficientData, ...] = ()


def ks_discrete(observed: DigitHistogram, ref_pmf) -> float:
    """D = max over digits of |F_obs(d) - F_ref(d)|."""
    total = observed.total
    if total == 0:
        raise EmptyHistogram("cannot compare an empty histogram")
    ref_cdf = np.cumsum(check_pmf(ref_pmf))
    return float(np.max(np.abs(np.cumsum(observed.counts) / total - ref_cdf)))


def ks_p_value(observed: DigitHistogram, ref_pmf, resamples: int = DEFAULT_KS_RESAMPLES,
               rng=None) -> KsResult:
    """Monte-Carlo tail probability of the KS statistic under ``ref_pmf``.

    p = (1 + #{resampled D >= observed D}) / (resamples + 1). Ties count
    against the observation and the add-one keeps p strictly positive.
    """
    if resamples < 1:
        raise ValueError("resamples must be positive")
    pmf = check_pmf(ref_pmf)
    total = observed.total
    if total == 0:
        raise EmptyHistogram("cannot score an empty histogram")
    ref_cdf = np.cumsum(pmf)
    d_obs = float(np.max(np.abs(np.cumsum(observed.counts) / total - ref_cdf)))
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    counts = gen.multinomial(total, pmf, size=resamples)
    d_res = np.max(np.abs(np.cumsum(counts, axis=1) / total - ref_cdf), axis=1)
    exceed = int(np.count_nonzero(d_res >= d_obs))
    return KsResult(statistic=d_obs, p_value=(1 + exceed) / (resamples + 1),
                    resamples=resamples)


def normalize_score(raw: float, floor: float) -> float:
    """Map a raw score onto [0, 1] relative to the calibration floor.

    Scores at or below the floor (the worst raw score seen among
    conforming samples) normalise to exactly 0.
    """
    if not 0.0 <= floor < 1.0:
        raise ValueError(f"calibration floor must lie in [0, 1), got {floor!r}")
    return min(max((raw - floor) / (1.0 - floor), 0.0), 1.0)


def score_operator(values, op: OperatorKind, ref: "ReferenceDistribution",
                   min_samples: int = DEFAULT_MIN_SAMPLES, *,
                   resamples: int = DEFAULT_SCORE_RESAMPLES, rng=None):
    """Score one group of reported values against a calibrated reference.

    Returns a TestOutcome, or InsufficientData when fewer than
    ``min_samples`` values carry a usable leading digit.
    """
    if not ref.is_calibrated:
        raise UncalibratedReference(
            f"reference {ref.operator.value}/n={ref.entries_per_vector} has no floor")
    hist, skipped = histogram(values)
    if hist.total < min_samples:
        return InsufficientData(op, usable=hist.total, required=min_samples,
                                skipped=skipped)
    result = ks_p_value(hist, ref.pmf, resamples=resamples, rng=rng)
    raw = 1.0 - result.p_value
    return TestOutcome(
        operator=op,
        raw_score=raw,
        normalized_score=normalize_score(raw, ref.calibration_floor),
        sample_count=hist.total,
        skipped=skipped,
        reference_key=ref.key,
    )


def aggregate(outcomes: Iterable) -> AggregateOutcome:
    """Mean of the normalised scores; thin groups are listed, not averaged."""
    usable = tuple(o for o in outcomes if isinstance(o, TestOutcome))
    left_out = tuple(o for o in outcomes if isinstance(o, InsufficientData))
    if not usable:
        detail = "; ".join(
            f"{o.operator.value}: {o.usable} usable of {o.required} required"
            for o in left_out) or "no statistic groups present"
        raise NoUsableOutcomes(detail)
    overall = float(np.mean([o.normalized_score for o in usable]))
    return AggregateOutcome(per_operator=usable, overall=overall,
                            insufficient=left_out)


def flag(overall: float, confidence_level: float) -> bool:
    """Flag when the overall anomaly probability reaches the level."""
    return overall >= confidence_level


def score_groups(groups: Mapping, entries_per_vector: int, store: "ReferenceStore", *,
                 seed: int, min_samples: int = DEFAULT_MIN_SAMPLES,
                 resamples: int = DEFAULT_SCORE_RESAMPLES) -> AggregateOutcome:
    """Score every recognised statistic group of one source and aggregate.

    ``groups`` maps operator (or its serialized name) to a sequence of
    reported values. References come from ``store``, keyed by
    ``entries_per_vector`` and each group's usable digit count; groups
    below ``min_samples`` are reported without touching the store.
    """
    normalized: dict[OperatorKind, Sequence] = {}
    for key, values in groups.items():
        op = OperatorKind.from_name(key) if isinstance(key, str) else key
        normalized[op] = values
    outcomes = []
    for op in OPERATOR_ORDER:
        if op not in normalized:
            continue
        values = np.asarray(normalized[op], dtype=float)
        hist, skipped = histogram(values)
        if hist.total < min_samples:
            outcomes.append(InsufficientData(op, usable=hist.total,
                                             required=min_samples, skipped=skipped))
            continue
        ref = store.get(op, entries_per_vector, hist.total)
        op_rng = rngmod.substream(seed, rngmod.STREAM_SCORE, operator_index(op))
        outcomes.append(score_operator(values, op, ref, min_samples,
                                       resamples=resamples, rng=op_rng))
    return aggregate(outcomes)
