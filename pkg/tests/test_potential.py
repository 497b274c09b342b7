import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wormkit.domains import DomainParams
from wormkit.errors import ConfigurationError, DomainError
from wormkit.potential import (
    CosineWitness,
    ExhaustionQuery,
    FeasibilityVerdict,
    df_exponent_bound,
    exhaustion_feasibility,
    ode_positivity_check,
)


def test_bound_examples():
    assert df_exponent_bound(math.pi) == 0.5
    assert df_exponent_bound(math.pi / 2) == 1.0
    vals = [df_exponent_bound(m) for m in (1, 10, 100, 1e6)]
    assert np.all(np.diff(vals) < 0) and vals[-1] > 0
    with pytest.raises(DomainError):
        df_exponent_bound(0.0)


@given(beta=st.floats(math.pi / 2 + 1e-3, 1e4))
def test_bound_equals_nu(beta):
    assert df_exponent_bound(beta - math.pi / 2) == pytest.approx(DomainParams(beta).nu, rel=1e-15)


def test_feasibility_examples():
    v = exhaustion_feasibility(ExhaustionQuery(math.pi, 0.4))
    assert v.feasible and v.margin == pytest.approx(math.pi / 2 - 0.4 * math.pi)
    assert not exhaustion_feasibility(ExhaustionQuery(math.pi, 0.6)).feasible
    edge = exhaustion_feasibility(ExhaustionQuery(math.pi / 2, 1.0))
    assert not edge.feasible and edge.margin == 0.0 and edge.witness is None


def test_query_validation():
    for mu, d in ((0.0, 0.5), (1.0, 0.0), (1.0, 1.5)):
        with pytest.raises(DomainError):
            ExhaustionQuery(mu, d)
    with pytest.raises(ValueError):
        FeasibilityVerdict(True, -1.0, None)


def test_ode_examples():
    assert ode_positivity_check(0.4, math.pi, CosineWitness(0.4))
    assert not ode_positivity_check(0.6, math.pi, CosineWitness(0.6), grid_n=1001)
    assert not ode_positivity_check(0.5, 1.0, CosineWitness(0.0))


def test_ode_rejects_bad_descriptors():
    with pytest.raises(ConfigurationError):
        ode_positivity_check(0.5, 1.0, CosineWitness(0.5), grid_n=10)
    with pytest.raises(ConfigurationError):
        ode_positivity_check(0.5, 1.0, lambda s: np.ones_like(s))


@given(mu=st.floats(0.05, 20), delta=st.floats(0.01, 1.0))
def test_verdict_is_threshold_and_witness_valid(mu, delta):
    v = exhaustion_feasibility(ExhaustionQuery(mu, delta))
    assert v.feasible == (mu * delta < math.pi / 2)
    if v.feasible:
        assert ode_positivity_check(delta, mu, v.witness)


@given(mu=st.floats(0.05, 20), delta=st.floats(0.01, 1.0), k=st.floats(0.0, 3.0))
def test_no_cosine_witness_when_infeasible(mu, delta, k):
    # g'' + delta^2 g <= 0 forces k >= delta, and positivity on [-mu, mu]
    # forces k mu < pi / 2; both together need mu delta < pi / 2
    if mu * delta >= math.pi / 2:
        assert not ode_positivity_check(delta, mu, CosineWitness(k))
