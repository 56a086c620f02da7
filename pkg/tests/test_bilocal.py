import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biloc.algebra import make_tensor_scenario
from biloc.bilocal import (
    ObservableError,
    ObservableSet,
    canonical_max_violation,
    canonical_observables,
    correlators,
    evaluate,
    expectation,
    identity_observables,
    marginal_factorization_residual,
    max_violation_residuals,
    observable_from_povm,
    povm_from_observable,
    probability_table,
    s_value,
    validate_observables,
    werner_canonical,
)
from biloc.linalg import SX, SZ, kron, ket, proj, random_density
from biloc.optimize import random_observables
from biloc.states import make_state, product_source_state, singlet

SQRT8 = 2 * np.sqrt(2)
I2 = np.eye(2)


def test_expectation_examples(rng):
    st_ = make_state(random_density(3, rng))
    assert expectation(st_, np.eye(3)) == pytest.approx(1.0)
    assert expectation(make_state(np.eye(2) / 2), SZ) == pytest.approx(0.0)
    assert expectation(make_state(singlet()), np.kron(SZ, SZ)) == pytest.approx(-1.0)


def test_expectation_non_hermitian():
    with pytest.raises(ValueError, match="non-Hermitian expectation"):
        expectation(make_state(np.diag([1.0, 0.0])), np.array([[1j, 0], [0, 0]]))


def test_identity_observables_give_two(canonical):
    s, state, _ = canonical
    r = evaluate(state, identity_observables(16), s)
    assert (r.I, r.J, r.S) == (pytest.approx(4.0), pytest.approx(0.0), pytest.approx(2.0))


def test_canonical_value(canonical):
    s, state, obs = canonical
    r = evaluate(state, obs, s)
    assert r.I == pytest.approx(2.0, abs=1e-12)
    assert r.J == pytest.approx(2.0, abs=1e-12)
    assert abs(r.S - SQRT8) <= 1e-10
    assert max(r.residuals.values()) <= 1e-12
    assert state.independence_residual <= 1e-12


@pytest.mark.parametrize("v", [0.0, 0.3, 0.5, 1 / np.sqrt(2), 0.9, 1.0])
def test_werner_canonical(v):
    s, state, obs = werner_canonical(v)
    r = evaluate(state, obs, s)
    assert r.I == pytest.approx(2 * v * v, abs=1e-12)
    assert r.S == pytest.approx(SQRT8 * v, abs=1e-9)


def test_validate_names_offending_field(canonical):
    s, _, obs = canonical
    with pytest.raises(ObservableError) as e:
        validate_observables(obs.replace(B1=2 * obs.B1), s)
    assert e.value.field == "B1"
    with pytest.raises(ObservableError) as e:
        validate_observables(obs.replace(C0=obs.C0 + 1j * obs.A0), s)
    assert e.value.field == "C0"
    with pytest.raises(ObservableError, match="algebra") as e:
        validate_observables(obs.replace(A1=obs.C1), s)
    assert e.value.field == "A1"


def test_probability_table_maximally_mixed(rng):
    s = make_tensor_scenario(2, 2, 2, 2)
    st_ = make_state(np.eye(16) / 16)
    obs = ObservableSet(
        A0=kron(SX, I2, I2, I2), A1=kron(SZ, I2, I2, I2),
        B0=kron(I2, SX, SX, I2), B1=kron(I2, SZ, I2, I2),
        C0=kron(I2, I2, I2, SZ), C1=kron(I2, I2, I2, SX),
    )
    validate_observables(obs, s)
    assert np.allclose(probability_table(st_, obs), 1 / 8)


def test_probability_table_canonical_marginals(canonical):
    _, state, obs = canonical
    p = probability_table(state, obs)
    assert np.allclose(p.sum(axis=(3, 4, 5)), 1.0, atol=1e-10)
    p_a = p.sum(axis=(4, 5))
    assert np.allclose(p_a, 0.5, atol=1e-12)


def test_probability_table_identity():
    p = probability_table(make_state(np.eye(4) / 4), identity_observables(4))
    assert np.allclose(p[..., 0, 0, 0], 1.0)
    assert p.sum() == pytest.approx(8.0)
    assert marginal_factorization_residual(p) == 0.0


def test_probability_table_rejects_bad_spectrum():
    obs = identity_observables(2).replace(A0=2 * SZ)
    with pytest.raises(ValueError, match="negative probability"):
        probability_table(make_state(np.diag([1.0, 0.0])), obs)


def test_marginal_residual_product_sources(rng):
    s = make_tensor_scenario(2, 2, 2, 2)
    st_ = product_source_state(s, random_density(4, rng), random_density(4, rng))
    obs = random_observables(s, rng)
    assert marginal_factorization_residual(probability_table(st_, obs)) <= 1e-10


def test_marginal_residual_ghz():
    ghz = (ket("000") + ket("111")) / np.sqrt(2)
    st_ = make_state(proj(ghz))
    Z = np.diag([1.0, -1.0])
    obs = ObservableSet(
        A0=kron(Z, I2, I2), A1=kron(Z, I2, I2),
        B0=kron(I2, Z, I2), B1=kron(I2, Z, I2),
        C0=kron(I2, I2, Z), C1=kron(I2, I2, Z),
    )
    assert marginal_factorization_residual(probability_table(st_, obs)) > 0.1


def test_residual_examples(canonical):
    _, state, obs = canonical
    r = max_violation_residuals(state, obs.replace(A0=np.eye(16), A1=np.eye(16)))
    assert r["{A0,A1}"] == pytest.approx(2.0)
    half = obs.replace(A0=kron(SX / 2, I2, I2, I2))
    assert max_violation_residuals(state, half)["A0^2-I"] == pytest.approx(0.75)


def test_residual_keys(canonical):
    s, state, obs = canonical
    r = max_violation_residuals(state, obs, s)
    names = [n for n, _ in obs.items()]
    for key in [f"{n}^2-I" for n in names] + ["{A0,A1}", "{C0,C1}"]:
        assert key in r and "tau:" + key in r


def test_povm_examples():
    assert np.allclose(observable_from_povm((np.eye(2), np.zeros((2, 2)))), np.eye(2))
    E0, E1 = povm_from_observable(SZ)
    assert np.allclose(E0, np.diag([1, 0])) and np.allclose(E1, np.diag([0, 1]))
    E0, E1 = povm_from_observable(np.zeros((2, 2)))
    assert np.allclose(E0, np.eye(2) / 2) and np.allclose(E1, np.eye(2) / 2)


def test_povm_errors():
    with pytest.raises(ValueError, match="positive"):
        observable_from_povm((np.diag([1.5, 0]), np.diag([-0.5, 1])))
    with pytest.raises(ValueError, match="identity"):
        observable_from_povm((np.eye(2), np.eye(2)))


def test_canonical_observables_shape():
    obs = canonical_observables()
    assert obs.dim == 16


# -- properties ---------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_povm_round_trip(seed):
    rng = np.random.default_rng(seed)
    s = make_tensor_scenario(2, 1, 1, 2)
    X = random_observables(s, rng).A0 * rng.uniform(0, 1)
    assert np.allclose(observable_from_povm(povm_from_observable(X)), X, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.sampled_from([(2, 1, 1, 2), (2, 2, 1, 2), (2, 2, 2, 2), (3, 1, 1, 2)]))
def test_random_triples_bounded_and_normalized(seed, dims):
    rng = np.random.default_rng(seed)
    s = make_tensor_scenario(*dims)
    st_ = make_state(random_density(s.dim, rng))
    obs = random_observables(s, rng)
    r = evaluate(st_, obs, s)
    assert r.S <= SQRT8 + 1e-9
    assert r.S == pytest.approx(s_value(*correlators(st_.rho, obs)), abs=1e-12)
    p = probability_table(st_, obs)
    assert np.allclose(p.sum(axis=(3, 4, 5)), 1.0, atol=1e-10)
    assert p.min() >= -1e-12


def test_canonical_triple_scenario():
    s, state, obs = canonical_max_violation()
    assert s.tensor_dims == (2, 2, 2, 2)
    assert state.source_form is not None
    assert np.allclose(state.rho, np.kron(singlet(), singlet()))
