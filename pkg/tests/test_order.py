import os

import numpy as np
import pytest

from config.constants import BOUNDARY, INTERIOR, OUTSIDE
from config.settings import DATA_DIR
from conelab import catalog, jalg, order
from conelab.errors import PreconditionError
from conelab.loader import load_algebra
from tests.oracles import from_matrix
from utils.helpers import random_interior


@pytest.fixture
def dual_numbers():
    return load_algebra(os.path.join(DATA_DIR, "algebras", "dual_numbers.json"))


def test_order_unit_seminorm_examples(herm2):
    e = herm2.identity
    assert order.order_unit_seminorm(herm2, e, e) == pytest.approx(1.0)
    x = from_matrix(herm2, np.diag([2.0, -5.0]))
    assert order.order_unit_seminorm(herm2, e, x) == pytest.approx(5.0)


def test_order_unit_seminorm_is_homogeneous_for_any_base(herm2, rng):
    p = jalg.exp(herm2, 0.4 * rng.standard_normal(4))
    x = rng.standard_normal(4)
    base = order.order_unit_seminorm(herm2, p, x)
    assert order.order_unit_seminorm(herm2, p, -3.0 * x) == pytest.approx(3.0 * base, rel=1e-9)


def test_order_unit_seminorm_matches_eigenvalue_oracle(herm2):
    p = from_matrix(herm2, np.diag([1.0, 4.0]))
    v = from_matrix(herm2, np.array([[0.0, 2.0], [2.0, 1.0]]))
    root = np.diag([1.0, 0.5])
    expected = np.max(np.abs(np.linalg.eigvalsh(root @ np.array([[0.0, 2.0], [2.0, 1.0]]) @ root)))
    assert order.order_unit_seminorm(herm2, p, v) == pytest.approx(expected)


def test_order_unit_seminorm_rejects_non_interior_base(herm2):
    with pytest.raises(PreconditionError):
        order.order_unit_seminorm(herm2, from_matrix(herm2, np.diag([1.0, 0.0])), herm2.identity)


def test_positivity(sym2, catalog_algebra, rng):
    assert order.positivity(sym2, sym2.identity) == INTERIOR
    assert order.positivity(sym2, from_matrix(sym2, np.diag([1.0, -1.0]))) == OUTSIDE
    assert order.positivity(sym2, from_matrix(sym2, np.diag([1.0, 0.0]))) == BOUNDARY
    A = catalog_algebra
    for x in rng.standard_normal((20, A.dim)):
        assert order.positivity(A, jalg.product(A, x, x)) != OUTSIDE


def test_properness(herm2, abelian3, dual_numbers):
    assert order.properness_check(herm2).proper
    report = order.properness_check(abelian3)
    assert report.proper and report.kernel.shape[0] == 0
    degenerate = order.properness_check(dual_numbers)
    assert not degenerate.proper
    assert degenerate.kernel.shape[0] == 1
    assert abs(degenerate.kernel[0, 1]) == pytest.approx(1.0)


def test_normality_on_a_line():
    report = order.normality_estimate(catalog.abelian(1), directions=20, pairs=50)
    assert report.gamma == pytest.approx(1.0)
    assert report.gamma_order_unit == pytest.approx(1.0)


def test_order_unit_norm_is_one_normal(herm2):
    report = order.normality_estimate(herm2, directions=50, pairs=100)
    assert report.gamma_order_unit <= 1.0 + 1e-6
    assert report.r > 0.0


def test_normality_constant_is_stable_across_seeds():
    A = catalog.sym_real(3)
    gammas = [order.normality_estimate(A, seed=seed, directions=30, pairs=60).gamma
              for seed in range(3)]
    assert all(np.isfinite(gammas))
    assert max(gammas) <= 1.05 * min(gammas)


def test_radius_bounds_the_order_unit_norm(sym2, rng):
    report = order.normality_estimate(sym2, directions=200, pairs=20)
    for x in rng.standard_normal((50, 3)):
        bound = (2.0 / report.r) * jalg.trace_norm(sym2, x)
        assert order.order_unit_seminorm(sym2, sym2.identity, x) <= bound + 1e-12


def test_order_unit_equivalence(herm2, rng):
    p, q = (jalg.exp(herm2, 0.5 * a) for a in rng.standard_normal((2, 4)))
    low, high = order.order_unit_equivalence(herm2, p, q)
    assert 0.0 < low <= high
    for x in rng.standard_normal((20, 4)):
        nq = order.order_unit_seminorm(herm2, q, x)
        np_ = order.order_unit_seminorm(herm2, p, x)
        assert low * nq <= np_ * (1 + 1e-9)
        assert np_ <= high * nq * (1 + 1e-9)


def test_states_are_normalised_and_positive(herm3, rng):
    for f in order.sample_states(herm3, 10, rng):
        assert f(herm3, herm3.identity) == pytest.approx(1.0)
        for x in rng.standard_normal((5, herm3.dim)):
            assert f(herm3, jalg.product(herm3, x, x)) >= -1e-10


def test_state_separation(sym2):
    assert order.state_separation(sym2, sym2.identity)
    assert order.min_state_value(sym2, sym2.identity) == pytest.approx(1.0)
    assert not order.state_separation(sym2, from_matrix(sym2, np.diag([1.0, -1.0])))
    x = from_matrix(sym2, np.array([[0.55, 0.45], [0.45, 0.55]]))
    assert np.min(jalg.spectral_values(sym2, x)) == pytest.approx(0.1)
    assert all(order.state_separation(sym2, x, seed=seed) for seed in range(10))


def test_state_separation_with_random_states_only(herm2, rng):
    for x in random_interior(herm2, 10, rng):
        assert order.state_separation(herm2, x, own_frame=False)
    assert not order.state_separation(herm2, -herm2.identity, own_frame=False)
    line = catalog.abelian(2)
    assert not order.state_separation(line, np.array([-2.0, 1.0]), own_frame=False)
    assert order.min_state_value(line, np.array([-2.0, 1.0]), own_frame=True) == pytest.approx(-2.0)


def test_state_separation_requires_a_proper_cone(dual_numbers):
    with pytest.raises(PreconditionError):
        order.state_separation(dual_numbers, dual_numbers.identity)


def test_order_report_agrees_with_spectral_verdicts(catalog_algebra):
    report = order.order_report(catalog_algebra, sample_count=40)
    assert report.seminorm_kernel_dim == 0
    assert report.agreements == 1.0
    assert report.max_residuals["triangle"] <= 1e-8
    assert report.max_residuals["square_norm"] <= 1e-8
    assert report.max_residuals["radius_bound"] == 0.0
    assert set(report.to_dict()) >= {"kernel_dim", "gamma", "r", "agreements", "max_residuals"}
