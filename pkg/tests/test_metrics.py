import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from measurement_uncertainty.linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    InvariantError,
    basis_state,
    haar_random_state,
)
from measurement_uncertainty.measurement import identity_model
from measurement_uncertainty.metrics import (
    RELATION_NAMES,
    UNIVERSAL_RELATIONS,
    decomposition_residual,
    disturbance_eta,
    error_epsilon,
    evaluate_relations,
    evaluate_scenario,
    inequality_chain,
    std_dev,
    unbiasedness,
    variance_decomposition_check,
)
from measurement_uncertainty.search import random_scenario, random_unbiased_scenario

from conftest import PLUS_Y

seeds = st.integers(min_value=0, max_value=2**31 - 1)
dims = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3), (4, 4)])


@pytest.mark.parametrize("op, state, expected", [
    (PAULI_Z, basis_state(2, 0), 0),
    (PAULI_Z, PLUS_Y, 1),
    (PAULI_X, PLUS_Y, 1),
])
def test_std_dev(op, state, expected):
    assert std_dev(op, state) == pytest.approx(expected, abs=1e-15)


def test_std_dev_rejects_non_hermitian():
    with pytest.raises(InvariantError):
        std_dev(np.array([[0, 1], [0, 0]]), PLUS_Y)


def test_epsilon_examples(s1):
    assert error_epsilon(s1.model, PAULI_Z, s1.system) == 0
    model = identity_model(2, PAULI_Z, basis_state(2, 0))
    assert error_epsilon(model, PAULI_Z, basis_state(2, 0)) == 0


def test_eta_examples(s1):
    model = identity_model(2, PAULI_Z, basis_state(2, 0))
    assert disturbance_eta(model, PAULI_Y, haar_random_state(2, 4)) == 0
    assert disturbance_eta(s1.model, PAULI_X, s1.system) == pytest.approx(math.sqrt(2), abs=1e-12)
    # sigma_z commutes with the measured observable: B_out = B_in
    for seed in range(5):
        assert disturbance_eta(s1.model, PAULI_Z, haar_random_state(2, seed)) <= 1e-12


def test_s1_report_matches_oracle(s1):
    ref = oracle.s1_values()
    rep = evaluate_scenario(s1)
    for key in ("epsilon", "eta", "sigma_a", "sigma_b", "commutator_bound",
                "out_commutator_bound", "sigma_m_out", "sigma_b_out"):
        assert getattr(rep, key) == pytest.approx(ref[key], abs=1e-12), key
    assert rep.bar_epsilon == rep.epsilon + rep.sigma_a
    assert rep.bar_eta == rep.eta + rep.sigma_b
    assert rep.slack("ozawa") == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert rep.relation("fujikawa").lhs == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert rep.relation("fujikawa").rhs == pytest.approx(2, abs=1e-12)
    naive = rep.relation("heisenberg_naive")
    assert (naive.lhs, naive.rhs, naive.holds, naive.asserted) == (0, pytest.approx(1), False, False)
    assert abs(rep.commutator_bound - rep.out_commutator_bound) > 0.1
    assert rep.violations == []


def test_report_flags(s1):
    rep = evaluate_scenario(s1)
    assert [r.name for r in rep.relations] == list(RELATION_NAMES)
    for r in rep.relations:
        assert r.slack == r.lhs - r.rhs
        assert r.asserted == (r.name in UNIVERSAL_RELATIONS)


def test_trivial_scenario(trivial):
    rep = evaluate_scenario(trivial)
    assert rep.eta == 0
    for r in rep.relations:
        assert r.rhs == 0
        assert r.slack >= 0


def test_robertson_equality_case():
    rep = evaluate_relations(identity_model(2, PAULI_Z, basis_state(2, 0)), PAULI_X, PAULI_Y,
                             basis_state(2, 0))
    rob = rep.relation("robertson_in")
    assert rob.lhs == pytest.approx(1, abs=1e-15)
    assert rob.rhs == pytest.approx(1, abs=1e-15)
    assert rob.slack == pytest.approx(0, abs=1e-15)
    assert rob.holds


@given(seeds, dims)
@settings(max_examples=200, deadline=None)
def test_universal_relations_hold(seed, d):
    rep = evaluate_scenario(random_scenario(*d, seed))
    for name in UNIVERSAL_RELATIONS:
        assert rep.slack(name) >= -1e-9, name
    assert rep.bar_epsilon >= max(rep.epsilon, rep.sigma_a)
    assert rep.bar_eta >= max(rep.eta, rep.sigma_b)
    assert rep.chain.lhs >= rep.chain.mid - 1e-10


def test_decomposition_examples(s1):
    residual, norm = decomposition_residual(s1.model, PAULI_Z, PAULI_X)
    assert residual <= 1e-12
    assert norm <= 1e-12


def test_unbiasedness_s1(s1):
    flags = unbiasedness(s1.model, PAULI_Z, PAULI_X)
    assert flags.measurement_unbiased
    assert not flags.disturbance_unbiased
    # P(B_in E) = sigma_x^2 (<0|sigma_x|0> - 1) = -I
    assert flags.residuals[4] == pytest.approx(1, abs=1e-12)
    assert flags.residuals[:3] == (0, 0, 0)


def test_unbiasedness_uncoupled_meter():
    # P(M_out - A_in) = <0|sz|0> I - sz = I - sz: the mean vanishes on |0> only,
    # so the for-all-states condition fails
    model = identity_model(2, PAULI_Z, basis_state(2, 0))
    flags = unbiasedness(model, PAULI_Z, PAULI_Z)
    assert not flags.measurement_unbiased
    assert flags.residuals[0] == pytest.approx(2, abs=1e-15)
    assert evaluate_relations(model, PAULI_Z, PAULI_Z, basis_state(2, 0)).epsilon == 0


def test_variance_decomposition_examples(s1, trivial):
    r1, r2 = variance_decomposition_check(s1.model, s1.a, s1.b, s1.system)
    assert r1 == pytest.approx(0, abs=1e-10)
    assert r2 == pytest.approx(2, abs=1e-9)
    assert variance_decomposition_check(trivial.model, trivial.a, trivial.b, trivial.system) == (0, 0)


def test_chain_examples(s1, trivial):
    lhs, mid, right = inequality_chain(s1.model, s1.a, s1.b, s1.system)
    assert lhs == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert mid == pytest.approx(math.sqrt(3), abs=1e-12)
    assert right == pytest.approx(1, abs=1e-12)
    ref = oracle.s1_values()["chain"]
    assert (lhs, mid, right) == pytest.approx(ref, abs=1e-12)
    assert tuple(inequality_chain(trivial.model, trivial.a, trivial.b, trivial.system)) == (0, 0, 0)


@given(seeds, st.integers(min_value=2, max_value=4))
@settings(max_examples=60, deadline=None)
def test_unbiased_family(seed, d):
    rep = evaluate_scenario(random_unbiased_scenario(d, seed))
    assert rep.unbiasedness.measurement_unbiased
    assert rep.unbiasedness.disturbance_unbiased
    assert max(rep.variance_residuals) <= 1e-10
    assert abs(rep.chain.mid - rep.chain.right) <= 1e-10
    ak = rep.relation("arthurs_kelly")
    assert ak.asserted
    assert ak.slack >= -1e-9
