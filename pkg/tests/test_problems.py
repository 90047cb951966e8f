import numpy as np
import pytest

from rayq.problems import (
    FAMILIES,
    ProblemSpec,
    generate,
    gaussian_pair,
    ill_conditioned_pair,
    karhunen_loeve,
    operator_norm_pair,
)


@pytest.mark.parametrize("family", FAMILIES)
def test_generate_returns_spd_b(family):
    spec = ProblemSpec(family=family, dim=20, q=2 if family == "ill_conditioned" else None, seed=1)
    a, b = generate(spec)
    assert a.shape == b.shape == (20, 20)
    assert np.allclose(b, b.T, atol=1e-12)
    assert np.linalg.eigvalsh(b)[0] > 0


@pytest.mark.parametrize("family", FAMILIES)
def test_generate_is_seed_deterministic(family):
    spec = ProblemSpec(family=family, dim=15, q=1 if family == "ill_conditioned" else None, seed=9)
    a1, b1 = generate(spec)
    a2, b2 = generate(spec)
    assert np.array_equal(a1, a2) and np.array_equal(b1, b2)


def test_distinct_seeds_give_distinct_instances():
    a1, _ = gaussian_pair(10, 0)
    a2, _ = gaussian_pair(10, 1)
    assert not np.allclose(a1, a2)


def test_ill_conditioned_condition_number_grows_with_q():
    kappas = []
    for q in (1, 2, 3):
        _, b = ill_conditioned_pair(40, q, seed=0)
        w = np.linalg.eigvalsh(b)
        kappas.append(w[-1] / w[0])
        assert w[-1] / w[0] <= 10.0 ** q * 1.01
    assert kappas[0] < kappas[1] < kappas[2]


def test_ill_conditioned_requires_valid_q():
    with pytest.raises(ValueError):
        ProblemSpec(family="ill_conditioned", dim=10, q=4)
    with pytest.raises(ValueError):
        ProblemSpec(family="ill_conditioned", dim=10, q=None)


def test_operator_norm_factors_reproduce_pair():
    prob = operator_norm_pair(12, seed=3)
    assert np.allclose(prob.a, prob.a_factor.T @ prob.a_factor, atol=1e-12)
    assert np.allclose(prob.b, prob.b_factor.T @ prob.b_factor, atol=1e-12)
    assert prob.b_factor.shape == (24, 12)
    # maximizing the quotient of squared factor norms
    assert np.linalg.eigvalsh(prob.a)[0] >= -1e-12


def test_karhunen_loeve_structure():
    a, b = karhunen_loeve(50, 0.3)
    assert np.allclose(a, a.T, atol=0)
    # trapezoid mass: half weights at the ends, uniform inside
    diag = np.diag(b)
    h = 1.0 / 49
    assert diag[0] == pytest.approx(h / 2.0, rel=1e-12)
    assert diag[25] == pytest.approx(h, rel=1e-12)
    assert np.count_nonzero(b - np.diag(diag)) == 0
    # RBF kernel is positive definite on distinct points
    assert np.linalg.eigvalsh(a)[0] > -1e-10


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        ProblemSpec(family="nope", dim=10)


def test_dimension_validation():
    with pytest.raises(ValueError):
        ProblemSpec(family="gaussian", dim=1)
