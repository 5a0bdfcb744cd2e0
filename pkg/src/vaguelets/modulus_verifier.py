"""Sampled checks of decay and Hölder envelopes.

Pairs ``(x, x')`` come in two interleaved strata:

* near: ``x`` in the sampling region, ``x' = x + delta`` with a uniformly
  random direction and ``|delta|`` log-uniform in ``[1e-6, 1]``;
* far: ``x`` and ``x'`` drawn independently.

Pair ``i`` is near exactly when ``floor((i+1) f) > floor(i f)`` for the near
fraction ``f``, so every prefix of the sequence has the requested mix and a
plan with more pairs extends a plan with fewer.  Pairs are generated in
blocks of :data:`BLOCK` from a per-block seed sequence, and each block is
scored independently; the max/count reduction over blocks does not depend
on how blocks are spread over threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError
from .function_catalog import TestFunction
from .holder_calculus import (
    ConditionProfile,
    DecayProfile,
    HolderDecayProfile,
    HolderGrowthProfile,
    profile_to_dict,
)

__all__ = [
    "PairSamplingPlan",
    "ViolationReport",
    "sample_pairs",
    "check_decay",
    "check_holder_growth",
    "check_holder_decay",
    "check_condition",
    "empirical_constant",
    "TOLERANCE",
    "BLOCK",
]

TOLERANCE = 1e-9
BLOCK = 4096
_DELTA_LOG10 = (-6.0, 0.0)


@dataclass(frozen=True)
class PairSamplingPlan:
    """How to draw test pairs.

    ``radial`` picks the law of ``|x|``: ``"ball"`` is uniform in the ball of
    radius ``T``; ``"log"`` takes ``|x| = (1+T)^u - 1`` with ``u`` uniform,
    which spends far more samples near the origin.
    """

    d: int
    pair_count: int = 100_000
    near_fraction: float = 0.5
    T: float = 1e3
    seed: int = 0
    radial: str = "ball"

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.d}")
        if self.pair_count < 1:
            raise DomainError(f"pair_count must be positive, got {self.pair_count}")
        if not 0 <= self.near_fraction <= 1:
            raise DomainError(f"near_fraction must lie in [0, 1], got {self.near_fraction}")
        if not self.T > 0:
            raise DomainError(f"radius cap must be positive, got {self.T}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.radial not in ("ball", "log"):
            raise DomainError(f"radial law must be 'ball' or 'log', got {self.radial!r}")

    def to_json(self):
        return {
            "d": self.d,
            "pair_count": self.pair_count,
            "near_fraction": self.near_fraction,
            "T": self.T,
            "seed": self.seed,
            "radial": self.radial,
        }


@dataclass
class ViolationReport:
    checked_profile: object
    worst_ratio: float
    worst_witness: tuple
    violation_count: int
    seed: int
    samples: int
    tolerance: float = TOLERANCE
    label: str = ""

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_json(self):
        return {
            "function": self.label,
            "profile": profile_to_dict(self.checked_profile),
            "worst_ratio": self.worst_ratio,
            "violations": self.violation_count,
            "witness": [list(self.worst_witness[0]), list(self.worst_witness[1])],
            "samples": self.samples,
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def _random_points(rng, n, d, T, radial):
    direction = rng.standard_normal((n, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    u = rng.random(n)
    if radial == "ball":
        r = T * u ** (1.0 / d)
    else:
        r = np.expm1(u * np.log1p(T))
    return direction * r[:, None]


def _near_mask(start, stop, fraction):
    i = np.arange(start, stop, dtype=np.float64)
    return np.floor((i + 1) * fraction) > np.floor(i * fraction)


def _block(plan: PairSamplingPlan, b: int):
    start = b * BLOCK
    stop = min(start + BLOCK, plan.pair_count)
    rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(b,)))
    n, d = BLOCK, plan.d
    x = _random_points(rng, n, d, plan.T, plan.radial)
    far = _random_points(rng, n, d, plan.T, plan.radial)
    step = rng.standard_normal((n, d))
    step /= np.linalg.norm(step, axis=1, keepdims=True)
    step *= 10.0 ** rng.uniform(*_DELTA_LOG10, size=n)[:, None]
    near = _near_mask(start, start + n, plan.near_fraction)
    xp = np.where(near[:, None], x + step, far)
    m = stop - start
    return x[:m], xp[:m]


def _n_blocks(plan):
    return -(-plan.pair_count // BLOCK)


def sample_pairs(plan: PairSamplingPlan):
    """All pairs of a plan as two ``(pair_count, d)`` arrays."""
    parts = [_block(plan, b) for b in range(_n_blocks(plan))]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _scan(plan: PairSamplingPlan, score: Callable, threads: int):
    """Run ``score(x, xp) -> (ratios, witness_pairs)`` over all blocks."""

    def one(b):
        x, xp = _block(plan, b)
        ratios, witnesses = score(x, xp)
        i = int(np.argmax(ratios))
        return float(ratios[i]), witnesses[i], int(np.count_nonzero(ratios > 1 + TOLERANCE))

    results = ordered_map(one, range(_n_blocks(plan)), threads)
    worst, witness, count = -np.inf, None, 0
    for ratio, wit, c in results:
        count += c
        # first block wins ties
        if ratio > worst:
            worst, witness = ratio, wit
    return worst, (tuple(map(float, witness[0])), tuple(map(float, witness[1]))), count


def _norm(x):
    return np.sqrt(np.sum(x * x, axis=-1))


def _report(f, profile, plan, score, threads):
    worst, witness, count = _scan(plan, score, threads)
    return ViolationReport(
        checked_profile=profile,
        worst_ratio=worst,
        worst_witness=witness,
        violation_count=count,
        seed=plan.seed,
        samples=plan.pair_count,
        label=f.spec,
    )


def _decay_score(f, p: DecayProfile):
    def score(x, xp):
        pts = np.concatenate([x, xp])
        ratios = np.abs(f(pts)) / (p.C * (1 + _norm(pts)) ** (-p.R))
        return ratios, np.stack([pts, pts], axis=1)

    return score


def check_decay(f: TestFunction, p: DecayProfile, plan: PairSamplingPlan, threads: int = 1) -> ViolationReport:
    """Sup of ``|f(x)| / (C (1+|x|)^-R)`` over both points of every pair."""
    return _report(f, p, plan, _decay_score(f, p), threads)


def _difference(f, x, xp):
    return np.abs(f(x) - f(xp)), _norm(x - xp), _norm(x), _norm(xp)


def _growth_score(f, p: HolderGrowthProfile):
    def score(x, xp):
        diff, sep, rx, rxp = _difference(f, x, xp)
        bound = p.D1 * sep**p.alpha * (1 + np.maximum(rx, rxp)) ** p.M
        return diff / bound, np.stack([x, xp], axis=1)

    return score


def check_holder_growth(f: TestFunction, p: HolderGrowthProfile, plan: PairSamplingPlan, threads: int = 1) -> ViolationReport:
    """Sup of ``|f(x)-f(x')| / (D1 |x-x'|^alpha (1+max(|x|,|x'|))^M)``."""
    return _report(f, p, plan, _growth_score(f, p), threads)


def _holder_decay_score(f, p: HolderDecayProfile):
    def score(x, xp):
        diff, sep, rx, rxp = _difference(f, x, xp)
        bound = p.D2 * sep**p.beta * (1 + np.minimum(rx, rxp)) ** (-p.Rprime)
        return diff / bound, np.stack([x, xp], axis=1)

    return score


def check_holder_decay(f: TestFunction, p: HolderDecayProfile, plan: PairSamplingPlan, threads: int = 1) -> ViolationReport:
    """Sup of ``|f(x)-f(x')| / (D2 |x-x'|^beta (1+min(|x|,|x'|))^-R')``."""
    return _report(f, p, plan, _holder_decay_score(f, p), threads)


def _condition_score(f, p: ConditionProfile):
    s = p.decay_rate
    K = p.constant

    def score(x, xp):
        diff, sep, rx, rxp = _difference(f, x, xp)
        if p.kind == "I":
            weight = (1 + np.maximum(rx, rxp)) ** p.M
        elif p.kind == "II":
            weight = 1.0
        else:
            w = s if p.kind == "III" else s + p.alpha
            weight = (1 + rx) ** (-w) + (1 + rxp) ** (-w)
        return diff / (K * sep**p.alpha * weight), np.stack([x, xp], axis=1)

    return score


def check_condition(f: TestFunction, p: ConditionProfile, plan: PairSamplingPlan, threads: int = 1) -> dict:
    """Check both inequalities of a condition profile.

    Returns ``{"decay": report, "holder": report}``.
    """
    if p.d != f.d:
        raise DomainError(f"condition is for d={p.d}, function lives in d={f.d}")
    decay = DecayProfile(R=p.decay_rate, C=p.constant)
    return {
        "decay": _report(f, decay, plan, _decay_score(f, decay), threads),
        "holder": _report(f, p, plan, _condition_score(f, p), threads),
    }


_CONSTANT_FIELD = {
    DecayProfile: "C",
    HolderGrowthProfile: "D1",
    HolderDecayProfile: "D2",
    ConditionProfile: "constant",
}
_CHECKS = {
    DecayProfile: check_decay,
    HolderGrowthProfile: check_holder_growth,
    HolderDecayProfile: check_holder_decay,
}


def empirical_constant(f: TestFunction, shape, plan: PairSamplingPlan, threads: int = 1) -> float:
    """Smallest constant for the exponents of ``shape`` consistent with the sample.

    The constant stored in ``shape`` is ignored.
    """
    unit = replace(shape, **{_CONSTANT_FIELD[type(shape)]: 1.0})
    if isinstance(unit, ConditionProfile):
        return check_condition(f, unit, plan, threads)["holder"].worst_ratio
    return _CHECKS[type(unit)](f, unit, plan, threads).worst_ratio
