"""Tests for truncated regular-vine fitting, density, and sampling."""

import numpy as np
import pytest
from scipy.special import ndtr
from scipy.stats import kstest

from copulasmote import (
    DEFAULT_FAMILY_LIBRARY,
    CopulaFamily,
    InvalidInputError,
    InvalidSpecError,
    NumericFailureError,
    PairCopulaSpec,
    VineCopula,
    VineEdge,
    default_truncation,
    empirical_kendall_tau,
    log_density,
)

F = CopulaFamily

# Correlation matrix whose Gaussian copula is exactly representable by a
# level-3 truncated vine (its 4th-order partial correlation is zero), so
# fit-then-sample measures estimation fidelity rather than model mismatch.
TRUNCATION_FRIENDLY_R = np.array([
    [1.0,   0.552, 0.512, 0.455, 0.362],
    [0.552, 1.0,   0.549, 0.511, 0.456],
    [0.512, 0.549, 1.0,   0.550, 0.510],
    [0.455, 0.511, 0.550, 1.0,   0.550],
    [0.362, 0.456, 0.510, 0.550, 1.0],
])


def gaussian_copula_matrix(corr, n, rng):
    L = np.linalg.cholesky(corr)
    return ndtr(rng.standard_normal((n, corr.shape[0])) @ L.T)


def check_vine_structure(model):
    """Structural invariants: tree sizes, conditioning sizes, proximity."""
    d = model.d_
    assert len(model.trees_) == d - 1
    for m, edges in enumerate(model.trees_, start=1):
        assert len(edges) == d - m
        for e in edges:
            j, k = e.conditioned
            assert j < k
            assert j not in e.conditioning and k not in e.conditioning
            assert len(e.conditioning) == m - 1
    # proximity: each deeper edge's variable set is the union of two edges
    # one tree down that share all but one variable each
    for m in range(1, d - 1):
        prev = [frozenset(e.conditioned) | e.conditioning for e in model.trees_[m - 1]]
        for e in model.trees_[m]:
            full = frozenset(e.conditioned) | e.conditioning
            assert any(
                a | b == full and len(a & b) == m
                for i, a in enumerate(prev)
                for b in prev[i + 1:]
            )
    order = model._sampling_order()
    assert sorted(order) == list(range(d))


def test_default_truncation_level():
    assert default_truncation(2) == 1
    assert default_truncation(3) == 2
    assert default_truncation(4) == 3
    assert default_truncation(8) == 3
    assert default_truncation(50) == 3


# -- structure selection ------------------------------------------------------


def test_structure_d2_single_edge():
    rng = np.random.default_rng(0)
    u = rng.random((50, 2))
    model = VineCopula().fit(u)
    assert len(model.trees_) == 1
    (edge,) = model.trees_[0]
    assert edge.conditioned == (0, 1)
    assert edge.conditioning == frozenset()
    check_vine_structure(model)


def test_structure_d3_drops_weakest_edge():
    # With three variables the maximum spanning tree keeps the two strongest
    # pairs.  Data are built so tau(0,1) > tau(0,2) > tau(1,2) decisively;
    # the tree must then be {(0,1), (0,2)} with (1,2)|{0} on top.
    corr = np.array([[1.0, 0.9, 0.8], [0.9, 1.0, 0.6], [0.8, 0.6, 1.0]])
    rng = np.random.default_rng(42)
    u = gaussian_copula_matrix(corr, 3000, rng)
    taus = {}
    for i in range(3):
        for j in range(i + 1, 3):
            taus[(i, j)], _ = empirical_kendall_tau(u[:, i], u[:, j])
    # the intended ordering actually holds in this sample
    assert abs(taus[(0, 1)]) > abs(taus[(0, 2)]) > abs(taus[(1, 2)])

    model = VineCopula(family_library=("gaussian",)).fit(u)
    tree1 = {e.conditioned for e in model.trees_[0]}
    assert tree1 == {(0, 1), (0, 2)}
    (top,) = model.trees_[1]
    assert top.conditioned == (1, 2)
    assert top.conditioning == frozenset({0})
    check_vine_structure(model)


def test_structure_duplicated_column_pair_selected():
    # A duplicated column has tau = 1 with its source, the maximal possible
    # weight, so that pair must appear in the first tree.
    rng = np.random.default_rng(7)
    u = rng.random((200, 3))
    u[:, 2] = u[:, 0]
    model = VineCopula(family_library=("gaussian",)).fit(u)
    assert (0, 2) in {e.conditioned for e in model.trees_[0]}


def test_structure_deterministic_given_input():
    rng = np.random.default_rng(3)
    u = gaussian_copula_matrix(np.eye(4) * 0.5 + 0.5, 300, rng)
    a = VineCopula().fit(u)
    b = VineCopula().fit(u)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_structure_invariants_random_data(d):
    rng = np.random.default_rng(100 + d)
    corr = np.eye(d) * 0.6 + 0.4
    u = gaussian_copula_matrix(corr, 120, rng)
    model = VineCopula(family_library=("gaussian", "clayton", "frank")).fit(u)
    check_vine_structure(model)


# -- truncated fitting --------------------------------------------------------


def test_truncation_d8_deeper_trees_are_independence():
    rng = np.random.default_rng(88)
    corr = np.eye(8) * 0.5 + 0.5
    u = gaussian_copula_matrix(corr, 400, rng)
    model = VineCopula().fit(u)
    assert model.truncation_level_ == 3
    for edges in model.trees_[3:]:
        assert all(e.spec.family is F.INDEPENDENCE for e in edges)
    # pairwise dependence this strong is never mistaken for independence
    assert all(e.spec.family is not F.INDEPENDENCE for e in model.trees_[0])
    check_vine_structure(model)


def test_truncation_two_on_three_variables_is_full_vine():
    rng = np.random.default_rng(12)
    corr = np.array([[1.0, 0.6, 0.4], [0.6, 1.0, 0.5], [0.4, 0.5, 1.0]])
    u = gaussian_copula_matrix(corr, 500, rng)
    model = VineCopula(truncation_level=2).fit(u)
    assert model.truncation_level_ == 2
    assert len(model.trees_) == 2


def test_truncation_level_capped_at_d_minus_one():
    rng = np.random.default_rng(13)
    u = rng.random((60, 3))
    model = VineCopula(truncation_level=10).fit(u)
    assert model.truncation_level_ == 2


def test_independent_uniforms_select_independence_everywhere():
    # 4 independent uniform columns.  With a two-family library the BIC keeps
    # every edge independent in >= 18 of 20 seeds.  The full library tries
    # ten parametric candidates per edge, and the spanning tree hands each
    # one the most spurious-looking pairs, so a few more seeds admit a
    # boundary-parameter edge; the measured rate there is 15/20 with at most
    # 5 of 120 edges non-independent.
    def count(library):
        hits, edge_miss = 0, 0
        for seed in range(20):
            rng = np.random.default_rng(4000 + seed)
            u = rng.random((1000, 4))
            model = VineCopula(family_library=library).fit(u)
            miss = sum(
                e.spec.family is not F.INDEPENDENCE for tr in model.trees_ for e in tr
            )
            edge_miss += miss
            hits += miss == 0
        return hits, edge_miss

    hits_small, _ = count(("independence", "gaussian"))
    assert hits_small >= 18

    hits_full, edge_miss_full = count(DEFAULT_FAMILY_LIBRARY)
    assert hits_full >= 14
    assert edge_miss_full <= 10


def test_fit_propagates_edge_flags():
    rng = np.random.default_rng(21)
    u = rng.random((50, 3))
    u[:, 2] = u[:, 0]  # comonotone pair: tau degenerates on the deeper tree
    model = VineCopula().fit(u)
    assert isinstance(model.flags_, tuple)


# -- log density --------------------------------------------------------------


def test_log_density_all_independence_is_zero():
    model = VineCopula.independent(4)
    rng = np.random.default_rng(5)
    U = rng.random((40, 4))
    assert np.allclose(model.log_density(U), 0.0)


def test_log_density_d2_equals_pair_copula():
    spec = PairCopulaSpec(F.GAUSSIAN, 0, (0.6,))
    payload = {
        "d": 2,
        "n_obs": 100,
        "truncation_level": 1,
        "flags": [],
        "trees": [[{"conditioned": [0, 1], "conditioning": [], "tau": 0.4, "spec": spec.to_dict()}]],
    }
    model = VineCopula.from_dict(payload)
    rng = np.random.default_rng(6)
    U = rng.uniform(0.05, 0.95, size=(30, 2))
    expected = log_density(spec, U[:, 0], U[:, 1])
    assert np.allclose(model.log_density(U), expected, atol=1e-12)


def test_log_density_quadrature_normalizes_d3():
    rng = np.random.default_rng(31)
    corr = np.array([[1.0, 0.7, 0.5], [0.7, 1.0, 0.55], [0.5, 0.55, 1.0]])
    u = gaussian_copula_matrix(corr, 1500, rng)
    model = VineCopula().fit(u)
    g = (np.arange(30) + 0.5) / 30
    A, B, C = np.meshgrid(g, g, g)
    U = np.column_stack([A.ravel(), B.ravel(), C.ravel()])
    mass = float(np.exp(model.log_density(U)).mean())
    assert 0.95 < mass < 1.05


def test_log_density_dimension_mismatch():
    model = VineCopula.independent(3)
    with pytest.raises(InvalidInputError):
        model.log_density(np.random.default_rng(0).random((5, 4)))


# -- sampling -----------------------------------------------------------------


def test_sample_independent_model_is_uniform_and_uncorrelated():
    model = VineCopula.independent(3)
    u = model.sample(10_000, random_state=0)
    assert u.shape == (10_000, 3)
    assert np.all((u > 0.0) & (u < 1.0))
    for j in range(3):
        assert kstest(u[:, j], "uniform").statistic < 0.02
    for i in range(3):
        for j in range(i + 1, 3):
            tau, _ = empirical_kendall_tau(u[:, i], u[:, j])
            assert abs(tau) < 0.03


def test_sample_d2_gaussian_tau_matches_analytic():
    # tau = (2/pi) arcsin(0.7) = 0.4936 for the Gaussian pair
    spec = PairCopulaSpec(F.GAUSSIAN, 0, (0.7,))
    payload = {
        "d": 2,
        "n_obs": 0,
        "truncation_level": 1,
        "flags": [],
        "trees": [[{"conditioned": [0, 1], "conditioning": [], "tau": 0.0, "spec": spec.to_dict()}]],
    }
    model = VineCopula.from_dict(payload)
    u = model.sample(10_000, random_state=5)
    tau, _ = empirical_kendall_tau(u[:, 0], u[:, 1])
    assert tau == pytest.approx(2.0 / np.pi * np.arcsin(0.7), abs=0.02)


def test_fit_then_sample_preserves_kendall_tau_matrix():
    rng = np.random.default_rng(1000)
    u_src = gaussian_copula_matrix(TRUNCATION_FRIENDLY_R, 2000, rng)
    model = VineCopula().fit(u_src)
    u_syn = model.sample(20_000, random_state=1001)
    worst = 0.0
    for i in range(5):
        for j in range(i + 1, 5):
            t_src, _ = empirical_kendall_tau(u_src[:, i], u_src[:, j])
            t_syn, _ = empirical_kendall_tau(u_syn[:, i], u_syn[:, j])
            worst = max(worst, abs(t_src - t_syn))
    assert worst < 0.05


def test_sampling_determinism():
    rng = np.random.default_rng(17)
    corr = np.array([[1.0, 0.6, 0.3], [0.6, 1.0, 0.4], [0.3, 0.4, 1.0]])
    u = gaussian_copula_matrix(corr, 200, rng)
    model = VineCopula().fit(u)
    a = model.sample(500, random_state=9)
    b = model.sample(500, random_state=9)
    assert np.array_equal(a, b)
    c = model.sample(500, random_state=10)
    assert not np.array_equal(a, c)


def test_sample_rejects_nonpositive_n():
    model = VineCopula.independent(2)
    with pytest.raises(InvalidInputError):
        model.sample(0, random_state=0)


def test_sample_failure_names_the_edge(monkeypatch):
    # numeric failures during quantile inversion must identify which edge
    # of which tree broke
    rng = np.random.default_rng(23)
    u = gaussian_copula_matrix(np.array([[1.0, 0.5], [0.5, 1.0]]), 100, rng)
    model = VineCopula(family_library=("gaussian",)).fit(u)

    def boom(spec, p, v):
        raise NumericFailureError("quantile inversion did not converge")

    monkeypatch.setattr("copulasmote.vine.inverse_h_function", boom)
    with pytest.raises(NumericFailureError, match=r"\(0, 1\)"):
        model.sample(10, random_state=0)


# -- validation and serialization ---------------------------------------------


def test_fit_rejects_bad_inputs():
    rng = np.random.default_rng(2)
    with pytest.raises(InvalidInputError):
        VineCopula().fit(rng.random((50, 1)))
    with pytest.raises(InvalidInputError):
        VineCopula().fit(rng.random((9, 3)))
    bad = rng.random((50, 3))
    bad[0, 0] = 1.5
    with pytest.raises(InvalidInputError):
        VineCopula().fit(bad)
    with pytest.raises(InvalidInputError):
        VineCopula(truncation_level=0).fit(rng.random((50, 3)))


def test_unfitted_model_raises():
    model = VineCopula()
    with pytest.raises(InvalidInputError):
        model.sample(5, random_state=0)
    with pytest.raises(InvalidInputError):
        model.log_density(np.full((2, 2), 0.5))


def test_serialization_roundtrip():
    rng = np.random.default_rng(19)
    corr = np.array([[1.0, 0.7, 0.4], [0.7, 1.0, 0.5], [0.4, 0.5, 1.0]])
    u = gaussian_copula_matrix(corr, 400, rng)
    model = VineCopula().fit(u)
    payload = model.to_dict()
    clone = VineCopula.from_dict(payload)
    assert clone.to_dict() == payload
    grid = rng.uniform(0.1, 0.9, size=(50, 3))
    assert np.allclose(model.log_density(grid), clone.log_density(grid), atol=1e-12)
    assert np.array_equal(model.sample(100, random_state=3), clone.sample(100, random_state=3))


def test_from_dict_rejects_malformed_payloads():
    good = VineCopula.independent(3).to_dict()

    with pytest.raises(InvalidSpecError):
        VineCopula.from_dict({"d": 1, "trees": []})
    with pytest.raises(InvalidSpecError):
        VineCopula.from_dict({"d": 3, "trees": good["trees"][:1]})

    wrong_count = {**good, "trees": [good["trees"][0][:1], good["trees"][1]]}
    with pytest.raises(InvalidSpecError):
        VineCopula.from_dict(wrong_count)

    bad_cond = {
        **good,
        "trees": [
            good["trees"][0],
            [{**good["trees"][1][0], "conditioning": []}],
        ],
    }
    with pytest.raises(InvalidSpecError):
        VineCopula.from_dict(bad_cond)

    bad_vars = {
        **good,
        "trees": [
            [good["trees"][0][0], {**good["trees"][0][1], "conditioned": [1, 7]}],
            good["trees"][1],
        ],
    }
    with pytest.raises(InvalidSpecError):
        VineCopula.from_dict(bad_vars)

    with pytest.raises(InvalidSpecError):
        VineEdge.from_dict({"conditioned": [2, 1], "conditioning": [], "spec": {"family": "independence", "rotation": 0, "params": []}})


def test_independent_constructor_validates_dimension():
    with pytest.raises(InvalidInputError):
        VineCopula.independent(1)
