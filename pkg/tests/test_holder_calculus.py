import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vaguelets.errors import DomainError, PreconditionError
from vaguelets.holder_calculus import (
    ConditionProfile,
    DecayProfile,
    HolderDecayProfile,
    HolderGrowthProfile,
    certify_holder_decay,
    condition_from_profiles,
    condition_I_to_III,
    dumps,
    gradient_to_holder,
    lemma1_rescale,
    loads,
    normalize_to_unit,
    theorem2_constants,
    weaken_condition,
)

exponent = st.floats(min_value=1e-3, max_value=1.0)
positive = st.floats(min_value=1e-3, max_value=1e3)
growth_exp = st.floats(min_value=0.0, max_value=20.0)
rate = st.floats(min_value=1e-2, max_value=20.0)


@pytest.mark.parametrize(
    "D1, alpha, M, rho, expected",
    [
        (3.0, 0.5, 2.0, 1.0, (3.0, 0.5, 2.0)),
        (1.0, 1.0, 4.0, 0.5, (2.0, 0.5, 2.0)),
        (5.0, 0.8, 0.0, 0.25, (5.0, 0.2, 0.0)),
    ],
)
def test_lemma1_examples(D1, alpha, M, rho, expected):
    out = lemma1_rescale(HolderGrowthProfile(alpha=alpha, D1=D1, M=M), rho, sup_bound_ok=True)
    assert (out.D1, out.alpha, out.M) == expected


@pytest.mark.parametrize("rho", [0.0, -0.1, 1.5])
def test_lemma1_rejects_bad_rho(rho):
    with pytest.raises(DomainError):
        lemma1_rescale(HolderGrowthProfile(1.0, 1.0), rho, sup_bound_ok=True)


def test_lemma1_requires_sup_bound():
    with pytest.raises(PreconditionError):
        lemma1_rescale(HolderGrowthProfile(1.0, 1.0), 0.5, sup_bound_ok=False)


@given(alpha=exponent, D1=positive, M=growth_exp, rho=st.floats(min_value=1e-3, max_value=1.0))
def test_lemma1_formula_identity(alpha, D1, M, rho):
    out = lemma1_rescale(HolderGrowthProfile(alpha, D1, M), rho, sup_bound_ok=True)
    assert out == HolderGrowthProfile(rho * alpha, max(2.0, D1), rho * M)


# Hand traces of the three-step recipe:
#   (R=2; D1=1, a=1, M=0; R'=0): no rescale, rho=1/2, D3=max(2, 1*2)=2, gamma=0
#   (same, R'=1): gamma = 1/2 * 1/2 = 1/4, beta = 1/4
#   (R=4; D1=1, a=1, M=4; R'=0): rho0=1/2 -> (2, 1/2, 2), rho=1/4, D3=max(2, 2*4)=8
@pytest.mark.parametrize(
    "R, D1, alpha, M, Rprime, beta, D2",
    [
        (2.0, 1.0, 1.0, 0.0, 0.0, 0.5, 2.0),
        (2.0, 1.0, 1.0, 0.0, 1.0, 0.25, 2.0),
        (4.0, 1.0, 1.0, 4.0, 0.0, 0.25, 8.0),
    ],
)
def test_theorem2_hand_traces(R, D1, alpha, M, Rprime, beta, D2):
    out = theorem2_constants(DecayProfile(R=R), HolderGrowthProfile(alpha, D1, M), Rprime)
    assert out.beta == beta
    assert out.D2 == D2
    assert out.Rprime == Rprime


def test_theorem2_trace_record():
    out = theorem2_constants(DecayProfile(R=4.0), HolderGrowthProfile(1.0, 1.0, 4.0), 2.0)
    t = out.trace
    assert (t.rho0, t.alpha_prime, t.D1_prime, t.M_prime) == (0.5, 0.5, 2.0, 2.0)
    assert t.rho == 0.25 and t.D3 == 8.0 and t.gamma == 0.125
    assert out.beta == t.rho - t.gamma


def test_theorem2_errors():
    growth = HolderGrowthProfile(1.0, 1.0)
    with pytest.raises(DomainError):
        theorem2_constants(DecayProfile(R=2.0), growth, 2.0)
    with pytest.raises(DomainError):
        theorem2_constants(DecayProfile(R=2.0), growth, -0.5)
    with pytest.raises(PreconditionError):
        theorem2_constants(DecayProfile(R=2.0, C=3.0), growth, 1.0)


@given(R=rate, alpha=exponent, D1=positive, M=growth_exp, frac=st.floats(min_value=0.0, max_value=0.999))
def test_theorem2_beta_positive_and_formula(R, alpha, D1, M, frac):
    Rprime = frac * R
    out = theorem2_constants(DecayProfile(R=R), HolderGrowthProfile(alpha, D1, M), Rprime)
    rho = out.trace.rho
    assert out.beta > 0
    assert out.beta == rho - rho * Rprime / R
    assert out.D2 >= 2


@given(R=rate, alpha=exponent, D1=positive, M=growth_exp)
def test_theorem2_beta_decreasing_and_vanishing(R, alpha, D1, M):
    growth = HolderGrowthProfile(alpha, D1, M)
    betas = [theorem2_constants(DecayProfile(R=R), growth, R * (1 - 2.0**-k)).beta for k in range(1, 11)]
    assert all(b1 > b2 for b1, b2 in zip(betas, betas[1:]))
    rho = theorem2_constants(DecayProfile(R=R), growth, 0.0).trace.rho
    assert betas[-1] <= rho * 2.0**-10 * (1 + 1e-12)


@given(R=rate, alpha=exponent, D1=positive, M=growth_exp)
def test_theorem2_plain_holder_at_zero_rate(R, alpha, D1, M):
    out = theorem2_constants(DecayProfile(R=R), HolderGrowthProfile(alpha, D1, M), 0.0)
    assert out.Rprime == 0
    assert out.beta == out.trace.rho
    assert out.D2 == max(2.0, out.trace.D3)


def test_theorem2_rescale_only_above_half_rate():
    out = theorem2_constants(DecayProfile(R=4.0), HolderGrowthProfile(0.6, 3.0, 2.0), 0.0)
    assert out.trace.rho0 == 1.0 and out.trace.D1_prime == 3.0
    out = theorem2_constants(DecayProfile(R=4.0), HolderGrowthProfile(0.6, 1.0, 8.0), 0.0)
    assert out.trace.rho0 == 0.25 and out.trace.M_prime == 2.0 and out.trace.D1_prime == 2.0


@pytest.mark.parametrize(
    "decay, growth, scale, unit_growth",
    [
        (DecayProfile(2.0, 1.0), HolderGrowthProfile(1.0, 3.0, 0.0), 1.0, HolderGrowthProfile(1.0, 3.0, 0.0)),
        (DecayProfile(2.0, 4.0), HolderGrowthProfile(1.0, 2.0, 0.0), 4.0, HolderGrowthProfile(1.0, 0.5, 0.0)),
        (DecayProfile(1.0, 0.5), HolderGrowthProfile(0.5, 1.0, 1.0), 0.5, HolderGrowthProfile(0.5, 2.0, 1.0)),
    ],
)
def test_normalize_examples(decay, growth, scale, unit_growth):
    s, d, g = normalize_to_unit(decay, growth)
    assert s == scale
    assert d == DecayProfile(decay.R, 1.0)
    assert g == unit_growth


@given(R=rate, C=st.sampled_from([0.25, 0.5, 1.0, 2.0, 8.0]), alpha=exponent, D1=positive, M=growth_exp)
def test_normalize_round_trip(R, C, alpha, D1, M):
    # powers of two keep the division exact
    decay, growth = DecayProfile(R, C), HolderGrowthProfile(alpha, D1, M)
    s, d, g = normalize_to_unit(decay, growth)
    assert DecayProfile(d.R, d.C * s) == decay
    assert HolderGrowthProfile(g.alpha, g.D1 * s, g.M) == growth


def test_certify_scales_back():
    decay, growth = DecayProfile(2.0, 4.0), HolderGrowthProfile(1.0, 2.0, 0.0)
    unit = theorem2_constants(DecayProfile(2.0), HolderGrowthProfile(1.0, 0.5, 0.0), 1.0)
    out = certify_holder_decay(decay, growth, 1.0)
    assert out.beta == unit.beta and out.D2 == 4.0 * unit.D2


@pytest.mark.parametrize("C2, M", [(1.0, 0.0), (5.0, 3.0), (2.0, 0.0)])
def test_gradient_to_holder(C2, M):
    assert gradient_to_holder(C2, M) == HolderGrowthProfile(alpha=1.0, D1=C2, M=M)


def test_gradient_chain_matches_direct_trace():
    # C2=2, M=0 in d=1 with eps=1: R=2, rho=1/2, D3=max(2, 2*2)=4
    out = theorem2_constants(DecayProfile(R=2.0), gradient_to_holder(2.0, 0.0), 0.0)
    assert (out.beta, out.D2) == (0.5, 4.0)


def test_condition_I_to_III_example():
    p = ConditionProfile(kind="I", epsilon=1.0, alpha=1.0, d=1, M=0.0, constant=1.0)
    out = condition_I_to_III(p)
    ref = theorem2_constants(DecayProfile(R=2.0), HolderGrowthProfile(1.0, 1.0, 0.0), 1.5)
    assert out.kind == "III"
    assert out.epsilon == 0.5
    assert out.alpha == ref.beta == 0.125
    assert out.constant == ref.D2 == 2.0


@given(eps=st.floats(0.05, 5.0), alpha=exponent, M=growth_exp, d=st.integers(1, 4), K=positive)
def test_condition_I_to_III_properties(eps, alpha, M, d, K):
    p = ConditionProfile(kind="I", epsilon=eps, alpha=alpha, d=d, M=M, constant=K)
    out = condition_I_to_III(p)
    assert math.isfinite(out.constant) and out.constant >= K
    assert 0 < out.epsilon < eps
    weaker = weaken_condition(out)
    assert weaker.kind == "II"
    assert weaker.constant == 2 * out.constant
    assert weaker.alpha == out.alpha


def test_condition_errors():
    with pytest.raises(DomainError):
        condition_I_to_III(ConditionProfile(kind="II", epsilon=1.0, alpha=1.0, d=1))
    with pytest.raises(DomainError):
        condition_I_to_III(ConditionProfile(kind="I", epsilon=1.0, alpha=1.0, d=1), epsilon_prime=1.0)
    with pytest.raises(DomainError):
        ConditionProfile(kind="V", epsilon=1.0, alpha=1.0, d=1)
    with pytest.raises(DomainError):
        weaken_condition(ConditionProfile(kind="I", epsilon=1.0, alpha=1.0, d=1))


def test_condition_M_only_for_kind_I():
    assert ConditionProfile(kind="III", epsilon=1.0, alpha=1.0, d=1, M=3.0).M == 0.0


def test_condition_from_profiles():
    p = condition_from_profiles(DecayProfile(3.0, 2.0), HolderGrowthProfile(0.5, 5.0, 1.0), d=2)
    assert (p.kind, p.epsilon, p.alpha, p.M, p.constant) == ("I", 1.0, 0.5, 1.0, 5.0)
    with pytest.raises(DomainError):
        condition_from_profiles(DecayProfile(1.0), HolderGrowthProfile(0.5, 5.0), d=2)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(cls=DecayProfile, R=0.0),
        dict(cls=DecayProfile, R=1.0, C=0.0),
        dict(cls=HolderGrowthProfile, alpha=0.0, D1=1.0),
        dict(cls=HolderGrowthProfile, alpha=1.5, D1=1.0),
        dict(cls=HolderGrowthProfile, alpha=0.5, D1=1.0, M=-1.0),
        dict(cls=HolderDecayProfile, beta=0.0, D2=1.0),
        dict(cls=HolderDecayProfile, beta=0.5, D2=1.0, Rprime=-1.0),
    ],
)
def test_profile_invariants(kwargs):
    cls = kwargs.pop("cls")
    with pytest.raises(DomainError):
        cls(**kwargs)


@pytest.mark.parametrize(
    "profile",
    [
        DecayProfile(2.5, 3.0),
        HolderGrowthProfile(0.5, 2.0, 1.0),
        theorem2_constants(DecayProfile(2.0), HolderGrowthProfile(1.0, 1.0, 0.0), 1.0),
        ConditionProfile(kind="III", epsilon=0.5, alpha=0.125, d=1, constant=2.0),
    ],
)
def test_json_round_trip(profile):
    back = loads(dumps(profile))
    assert back == profile


def test_json_field_names():
    import json

    data = json.loads(dumps(theorem2_constants(DecayProfile(2.0), HolderGrowthProfile(1.0, 1.0, 0.0), 1.0)))
    assert {"kind", "beta", "D2", "Rprime"} <= set(data)
    assert set(json.loads(dumps(HolderGrowthProfile(1.0, 2.0, 0.0)))) == {"kind", "alpha", "D1", "M"}
    assert set(json.loads(dumps(DecayProfile(2.0)))) == {"kind", "R", "C"}
