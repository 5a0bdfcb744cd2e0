"""Closed-form exponent and constant bookkeeping for Hölder-type bounds.

Three kinds of claims about a function ``f: R^d -> C`` are tracked:

* decay:         |f(x)| <= C (1+|x|)^(-R)
* Hölder growth: |f(x)-f(x')| <= D1 |x-x'|^alpha (1+max(|x|,|x'|))^M
* Hölder decay:  |f(x)-f(x')| <= D2 |x-x'|^beta (1+min(|x|,|x'|))^(-R')

and the routines here turn one kind of claim into another.  Everything is
plain float arithmetic (+, -, *, /, max and powers of two), so results are
reproducible to the last bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import DomainError, PreconditionError

__all__ = [
    "DecayProfile",
    "HolderGrowthProfile",
    "HolderDecayProfile",
    "ConditionProfile",
    "Theorem2Trace",
    "lemma1_rescale",
    "theorem2_constants",
    "normalize_to_unit",
    "certify_holder_decay",
    "gradient_to_holder",
    "condition_from_profiles",
    "condition_I_to_III",
    "weaken_condition",
    "profile_to_dict",
    "profile_from_dict",
    "dumps",
    "loads",
]


@dataclass(frozen=True)
class DecayProfile:
    """Claim ``|f(x)| <= C (1+|x|)^(-R)`` for every x."""

    R: float
    C: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"decay rate R must be positive, got {self.R}")
        if not self.C > 0:
            raise DomainError(f"decay constant C must be positive, got {self.C}")


@dataclass(frozen=True)
class HolderGrowthProfile:
    """Claim ``|f(x)-f(x')| <= D1 |x-x'|^alpha (1+max(|x|,|x'|))^M``."""

    alpha: float
    D1: float
    M: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.D1 > 0:
            raise DomainError(f"D1 must be positive, got {self.D1}")
        if not self.M >= 0:
            raise DomainError(f"growth exponent M must be >= 0, got {self.M}")


@dataclass(frozen=True)
class Theorem2Trace:
    """Intermediate quantities of :func:`theorem2_constants`."""

    rho0: float
    alpha_prime: float
    D1_prime: float
    M_prime: float
    rho: float
    D3: float
    gamma: float


@dataclass(frozen=True)
class HolderDecayProfile:
    """Claim ``|f(x)-f(x')| <= D2 |x-x'|^beta (1+min(|x|,|x'|))^(-Rprime)``."""

    beta: float
    D2: float
    Rprime: float = 0.0
    trace: Optional[Theorem2Trace] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.D2 > 0:
            raise DomainError(f"D2 must be positive, got {self.D2}")
        if not self.Rprime >= 0:
            raise DomainError(f"Rprime must be >= 0, got {self.Rprime}")


_KINDS = ("I", "II", "III", "IV")


@dataclass(frozen=True)
class ConditionProfile:
    """One of the four decay-plus-Hölder hypothesis sets (I)-(IV).

    With ``K = constant`` and ``s = d + epsilon`` the encoded claims are
    ``|f(x)| <= K (1+|x|)^(-s)`` together with

    * I:   ``|f(x)-f(x')| <= K |x-x'|^alpha (1+max(|x|,|x'|))^M``
    * II:  ``|f(x)-f(x')| <= K |x-x'|^alpha``
    * III: ``|f(x)-f(x')| <= K |x-x'|^alpha ((1+|x|)^(-s) + (1+|x'|)^(-s))``
    * IV:  as III with ``s`` replaced by ``s + alpha`` in the weight.

    ``M`` is only meaningful for kind I and is stored as 0 otherwise.
    """

    kind: str
    epsilon: float
    alpha: float
    d: int
    M: float = 0.0
    constant: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"condition kind must be one of {_KINDS}, got {self.kind!r}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.d}")
        if not self.M >= 0:
            raise DomainError(f"M must be >= 0, got {self.M}")
        if not self.constant > 0:
            raise DomainError(f"constant must be positive, got {self.constant}")
        if self.kind != "I" and self.M != 0:
            object.__setattr__(self, "M", 0.0)

    @property
    def decay_rate(self) -> float:
        return self.d + self.epsilon


Profile = Union[DecayProfile, HolderGrowthProfile, HolderDecayProfile, ConditionProfile]


def lemma1_rescale(p: HolderGrowthProfile, rho: float, sup_bound_ok: bool) -> HolderGrowthProfile:
    """Trade Hölder exponent for growth exponent on a function with ``|f| <= 1``.

    Returns ``(max(2, D1), rho*alpha, rho*M)``.  ``sup_bound_ok`` is the
    caller's assertion that ``|f| <= 1`` everywhere; the rescaled bound is
    false without it.
    """
    if not 0 < rho <= 1:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    if not sup_bound_ok:
        raise PreconditionError("rescaling needs |f| <= 1 everywhere")
    return HolderGrowthProfile(alpha=rho * p.alpha, D1=max(2.0, p.D1), M=rho * p.M)


def theorem2_constants(
    decay: DecayProfile, growth: HolderGrowthProfile, Rprime: float
) -> HolderDecayProfile:
    """Convert (decay R, Hölder growth) into a Hölder-decay bound with rate Rprime.

    The recipe, for a function with ``|f(x)| <= (1+|x|)^(-R)``:

    1. If ``M > R/2`` shrink the growth exponent to ``R/2`` by
       :func:`lemma1_rescale` with ``rho0 = R/(2M)``; otherwise keep the
       profile (``(1+max)^M <= (1+max)^(R/2)`` already).
    2. A plain Hölder bound follows with exponent ``rho = alpha'/2`` and
       constant ``D3 = max(2, D1' 2^(R/2))``, splitting on whether
       ``|x-x'|^alpha'`` exceeds ``(1+|x|)^(-R)``.
    3. With ``gamma = rho Rprime / R`` the result is
       ``beta = rho - gamma`` and ``D2 = max(2, D3)``.

    The constants are those of the argument, not the sharpest possible.
    """
    R = decay.R
    if decay.C != 1:
        raise PreconditionError(
            f"decay constant must be 1 (got {decay.C}); use normalize_to_unit first"
        )
    if not 0 <= Rprime < R:
        raise DomainError(f"need 0 <= Rprime < R, got Rprime={Rprime}, R={R}")

    half_R = R / 2
    if growth.M > half_R:
        rho0 = half_R / growth.M
        step1 = lemma1_rescale(growth, rho0, sup_bound_ok=True)
    else:
        rho0 = 1.0
        step1 = growth

    rho = step1.alpha / 2
    D3 = max(2.0, step1.D1 * 2.0**half_R)
    gamma = rho * Rprime / R
    beta = rho - gamma
    trace = Theorem2Trace(
        rho0=rho0,
        alpha_prime=step1.alpha,
        D1_prime=step1.D1,
        M_prime=step1.M,
        rho=rho,
        D3=D3,
        gamma=gamma,
    )
    return HolderDecayProfile(beta=beta, D2=max(2.0, D3), Rprime=Rprime, trace=trace)


def normalize_to_unit(decay: DecayProfile, growth: HolderGrowthProfile):
    """Restate the claims for ``f / C`` so that the decay constant becomes 1.

    Returns ``(scale, decay_unit, growth_unit)`` with ``scale = C``.
    """
    scale = decay.C
    return (
        scale,
        replace(decay, C=1.0),
        replace(growth, D1=growth.D1 / scale),
    )


def certify_holder_decay(
    decay: DecayProfile, growth: HolderGrowthProfile, Rprime: float
) -> HolderDecayProfile:
    """:func:`theorem2_constants` for an unnormalized ``f``.

    Normalizes, derives ``(beta, D2)`` for ``f/C`` and multiplies ``D2`` by
    ``C`` so the returned profile speaks about ``f`` itself.
    """
    scale, unit_decay, unit_growth = normalize_to_unit(decay, growth)
    out = theorem2_constants(unit_decay, unit_growth, Rprime)
    return replace(out, D2=out.D2 * scale)


def gradient_to_holder(gradient_constant: float, growth_exponent: float) -> HolderGrowthProfile:
    """Lipschitz-with-growth bound from ``|grad f(y)| <= C2 (1+|y|)^M``.

    Every point of the segment [x, x'] has norm at most ``max(|x|, |x'|)``,
    so the mean-value inequality gives the bound with ``D1 = C2``,
    ``alpha = 1``.  ``|grad f|`` is the Euclidean norm.
    """
    if not gradient_constant > 0:
        raise DomainError(f"gradient constant must be positive, got {gradient_constant}")
    if not growth_exponent >= 0:
        raise DomainError(f"growth exponent must be >= 0, got {growth_exponent}")
    return HolderGrowthProfile(alpha=1.0, D1=float(gradient_constant), M=float(growth_exponent))


def condition_from_profiles(decay: DecayProfile, growth: HolderGrowthProfile, d: int) -> ConditionProfile:
    """Package a (decay, growth) pair as a kind-I condition with one shared constant."""
    if not decay.R > d:
        raise DomainError(f"kind I needs decay rate R > d, got R={decay.R}, d={d}")
    return ConditionProfile(
        kind="I",
        epsilon=decay.R - d,
        alpha=growth.alpha,
        d=d,
        M=growth.M,
        constant=max(decay.C, growth.D1),
    )


def condition_I_to_III(p: ConditionProfile, epsilon_prime: Optional[float] = None) -> ConditionProfile:
    """Upgrade a kind-I condition to kind III at a slightly slower decay rate.

    ``epsilon_prime`` defaults to ``epsilon/2``.  The min-weighted bound
    from :func:`theorem2_constants` (with ``R = d+eps``, ``R' = d+eps'``)
    becomes the sum form via
    ``(1+min(|x|,|x'|))^(-s) <= (1+|x|)^(-s) + (1+|x'|)^(-s)``.
    """
    if p.kind != "I":
        raise DomainError(f"expected a kind-I condition, got kind {p.kind}")
    eps_prime = p.epsilon / 2 if epsilon_prime is None else float(epsilon_prime)
    if not 0 < eps_prime < p.epsilon:
        raise DomainError(f"epsilon' must lie in (0, {p.epsilon}), got {eps_prime}")

    if p.alpha > 1:
        raise DomainError(f"Hölder exponent above 1 is not supported, got {p.alpha}")
    K = p.constant
    R = p.d + p.epsilon
    # f/K satisfies the unit decay claim and Hölder growth with D1 = 1.
    out = theorem2_constants(DecayProfile(R=R, C=1.0), HolderGrowthProfile(alpha=p.alpha, D1=1.0, M=p.M), p.d + eps_prime)
    return ConditionProfile(
        kind="III",
        epsilon=eps_prime,
        alpha=out.beta,
        d=p.d,
        constant=K * max(1.0, out.D2),
    )


def weaken_condition(p: ConditionProfile) -> ConditionProfile:
    """The next weaker kind: IV -> III -> II -> I (constant at most doubles)."""
    if p.kind == "IV":
        return replace(p, kind="III")
    if p.kind == "III":
        # each weight term is <= 1
        return replace(p, kind="II", constant=2 * p.constant)
    if p.kind == "II":
        return replace(p, kind="I", M=0.0)
    raise DomainError("kind I is the weakest condition")


# -- JSON ----------------------------------------------------------------------

def profile_to_dict(p: Profile) -> dict:
    if isinstance(p, DecayProfile):
        return {"kind": "decay", "R": p.R, "C": p.C}
    if isinstance(p, HolderGrowthProfile):
        return {"kind": "holder_growth", "alpha": p.alpha, "D1": p.D1, "M": p.M}
    if isinstance(p, HolderDecayProfile):
        out = {"kind": "holder_decay", "beta": p.beta, "D2": p.D2, "Rprime": p.Rprime}
        if p.trace is not None:
            out["trace"] = {
                "rho0": p.trace.rho0,
                "alpha_prime": p.trace.alpha_prime,
                "D1_prime": p.trace.D1_prime,
                "M_prime": p.trace.M_prime,
                "rho": p.trace.rho,
                "D3": p.trace.D3,
                "gamma": p.trace.gamma,
            }
        return out
    if isinstance(p, ConditionProfile):
        return {
            "kind": p.kind,
            "epsilon": p.epsilon,
            "alpha": p.alpha,
            "M": p.M,
            "d": p.d,
            "constant": p.constant,
        }
    raise TypeError(f"not a profile: {p!r}")


def profile_from_dict(data: dict) -> Profile:
    kind = data.get("kind")
    if kind == "decay":
        return DecayProfile(R=data["R"], C=data.get("C", 1.0))
    if kind == "holder_growth":
        return HolderGrowthProfile(alpha=data["alpha"], D1=data["D1"], M=data.get("M", 0.0))
    if kind == "holder_decay":
        trace = Theorem2Trace(**data["trace"]) if "trace" in data else None
        return HolderDecayProfile(beta=data["beta"], D2=data["D2"], Rprime=data.get("Rprime", 0.0), trace=trace)
    if kind in _KINDS:
        return ConditionProfile(
            kind=kind,
            epsilon=data["epsilon"],
            alpha=data["alpha"],
            d=int(data["d"]),
            M=data.get("M", 0.0),
            constant=data.get("constant", 1.0),
        )
    raise DomainError(f"unknown profile kind {kind!r}")


def dumps(p: Profile) -> str:
    return json.dumps(profile_to_dict(p), sort_keys=True)


def loads(text: str) -> Profile:
    return profile_from_dict(json.loads(text))
