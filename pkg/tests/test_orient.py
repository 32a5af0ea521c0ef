import numpy as np
import pytest

from config.constants import FOUND, NOT_FOUND
from config.settings import SOLVER_RESTARTS, SOLVER_TOL_FAIL
from conelab import catalog, jalg, orient
from conelab.errors import InputError, NotAdditiveError, PreconditionError
from conelab.geom import transitive_map
from tests.oracles import from_matrix, to_matrix


@pytest.fixture(scope="module")
def herm2_canonical():
    A = catalog.herm_complex(2)
    return A, orient.canonical_orientation(A)


@pytest.mark.parametrize("name,size,expected", [
    ("abelian", 3, 0), ("sym_real", 2, 1), ("sym_real", 3, 3), ("herm_complex", 2, 3),
    ("herm_complex", 3, 8), ("spin_factor", 2, 1), ("spin_factor", 4, 6), ("spin_factor", 5, 10),
])
def test_derivation_dimensions(name, size, expected):
    space = orient.derivation_space(catalog.catalog(name, size))
    assert space.dim == expected
    assert space.checks["cone_escapes"] == 0.0


def test_derivation_basis_properties(herm2):
    space = orient.derivation_space(herm2)
    gram, gram_inv = herm2.trace_form, np.linalg.inv(herm2.trace_form)
    pairing = np.einsum("pq,arq,rs,bsp->ab", gram_inv, space.basis, gram, space.basis)
    assert np.allclose(pairing, np.eye(space.dim), atol=1e-10)
    for D in space.basis:
        assert orient.leibniz_residual(herm2, D) <= 1e-9
        assert np.allclose(D @ herm2.identity, 0.0, atol=1e-12)


def test_zero_orientation_on_abelian_algebra(abelian3):
    J = orient.zero_orientation(abelian3)
    report = orient.verify_orientation(abelian3, J)
    assert report.passed
    assert report.max_residual == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_canonical_orientation_verifies(n):
    A = catalog.herm_complex(n)
    J = orient.canonical_orientation(A)
    report = orient.verify_orientation(A, J, tol=1e-9)
    assert report.passed, report.residuals
    assert orient.verify_orientation(A, J.scaled(-1.0), tol=1e-9).passed


def test_doubled_orientation_fails_quadratically(herm2_canonical):
    A, J = herm2_canonical
    report = orient.verify_orientation(A, J.scaled(2.0))
    assert not report.passed
    # J(J(a) b) picks up a factor 4 while the bracket stays put
    T = J.operators()
    unit = np.max(np.linalg.norm(np.einsum("imj,mpq->ijpq", T, T), axis=(2, 3)))
    assert report.residuals["quadratic"] == pytest.approx(3.0 * unit, rel=1e-8)


def test_canonical_orientation_matches_commutator(herm2_canonical, rng):
    A, J = herm2_canonical
    a = from_matrix(A, np.diag([1.0, -1.0]))
    x = from_matrix(A, np.array([[0.0, 1.0], [1.0, 0.0]]))
    ma, mx = to_matrix(A, a), to_matrix(A, x)
    assert np.allclose(to_matrix(A, J.apply(a) @ x), 0.5j * (ma @ mx - mx @ ma))
    assert np.allclose(to_matrix(A, J.apply(a) @ x), np.array([[0, 1j], [-1j, 0]]))
    assert np.allclose(J.apply(A.identity), 0.0, atol=1e-12)
    for b in rng.standard_normal((10, 4)):
        assert np.allclose(J.apply(b) @ b, 0.0, atol=1e-12)


def test_canonical_orientation_needs_a_closed_matrix_realisation(spin3, sym2):
    with pytest.raises(PreconditionError):
        orient.canonical_orientation(spin3)
    with pytest.raises(PreconditionError):
        orient.canonical_orientation(sym2)


def test_verify_orientation_rejects_non_derivations(spin3):
    basis = np.array([jalg.l_operator(spin3, np.eye(4)[1])])
    J = orient.Orientation(np.ones((1, 4)), basis, spin3.identity)
    with pytest.raises(InputError):
        orient.verify_orientation(spin3, J)


def test_orientation_identities_hold_for_found_orientations(herm3):
    """Checked through the operator stack, independently of the solver."""
    result = orient.solve_orientation(herm3, restarts=16, seed=3)
    assert result.status == FOUND
    J = result.orientation
    T = J.operators()
    assert np.max(np.abs(T.transpose(0, 2, 1) + T.transpose(2, 0, 1))) <= 1e-8
    for z in jalg.center(herm3):
        assert np.linalg.norm(J.apply(z)) <= 1e-8
    L = np.array([jalg.l_operator(herm3, b) for b in np.eye(9)])
    for i in range(9):
        for j in range(9):
            lhs = L[i] @ L[j] - L[j] @ L[i]
            rhs = T[j] @ T[i] - T[i] @ T[j]
            assert np.linalg.norm(lhs - rhs) <= 1e-8
    assert orient.verify_orientation(herm3, J.scaled(-1.0)).passed


@pytest.mark.parametrize("A", [catalog.abelian(4), catalog.herm_complex(2)],
                         ids=["abelian(4)", "herm_complex(2)"])
def test_solver_finds_orientations(A):
    result = orient.solve_orientation(A, restarts=16, seed=0)
    assert result.status == FOUND
    assert result.residual < 1e-9
    assert orient.verify_orientation(A, result.orientation).passed


@pytest.mark.parametrize("seed", range(5))
def test_solver_rejects_rank_two_spin_factor(seed):
    result = orient.solve_orientation(catalog.spin_factor(2), restarts=16, seed=seed)
    assert result.status == NOT_FOUND
    assert result.residual > 1e-2


def test_solver_rejects_quaternionic_spin_factor():
    result = orient.solve_orientation(catalog.spin_factor(5), restarts=8, seed=1)
    assert result.status == NOT_FOUND
    assert result.residual > 1e-2


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_spin_factor_verdicts_stable_across_seeds(seed):
    # R + R^3 is the hermitian 2x2 complex matrices, R + R^5 the quaternionic ones
    found = orient.solve_orientation(catalog.spin_factor(3), restarts=SOLVER_RESTARTS, seed=seed)
    assert found.status == FOUND
    assert orient.verify_orientation(catalog.spin_factor(3), found.orientation).passed
    missing = orient.solve_orientation(catalog.spin_factor(5), restarts=SOLVER_RESTARTS, seed=seed)
    assert missing.status == NOT_FOUND
    assert missing.residual > SOLVER_TOL_FAIL


def test_solver_is_deterministic(herm2):
    first = orient.solve_orientation(herm2, restarts=6, seed=11, threads=1)
    second = orient.solve_orientation(herm2, restarts=6, seed=11, threads=4)
    assert first.status == second.status
    assert np.array_equal(first.orientation.coeffs, second.orientation.coeffs)


def test_solver_validates_tolerances(herm2):
    with pytest.raises(InputError):
        orient.solve_orientation(herm2, tol_success=1e-3, tol_fail=1e-4)


def test_extend_cone_map(herm2_canonical, rng):
    A, J = herm2_canonical
    p = jalg.exp(A, 0.5 * rng.standard_normal(4))
    assert np.allclose(orient.extend_cone_map(A, J.apply, p), J.apply(p), atol=1e-10)
    assert np.allclose(orient.extend_cone_map(A, J.apply, np.zeros(4)), 0.0)
    v = from_matrix(A, np.diag([1.0, -3.0]))
    assert np.allclose(orient.extend_cone_map(A, J.apply, v), J.apply(v), atol=1e-10)


def test_extend_cone_map_rejects_non_additive_maps(herm2_canonical):
    A, J = herm2_canonical
    with pytest.raises(NotAdditiveError):
        orient.extend_cone_map(A, lambda w: J.apply(jalg.product(A, w, w)), A.identity)


def test_transport_orientation(herm2_canonical):
    A, J = herm2_canonical
    same = orient.transport_orientation(A, J, A.identity)
    assert np.allclose(same.coeffs, J.coeffs)
    assert np.allclose(same.basis, J.basis)

    u = from_matrix(A, np.diag([1.0, 4.0]))
    moved = orient.transport_orientation(A, J, u)
    assert moved.checks["fixes_base_point"] <= 1e-8
    assert moved.checks["transported_equation"] <= 1e-7
    g = transitive_map(A, u, A.identity)
    for z in jalg.center(A):
        assert np.linalg.norm(moved.apply(np.linalg.solve(g, z))) <= 1e-8


def test_orientation_json_binds_the_basis(herm2_canonical, sym2):
    A, J = herm2_canonical
    space = orient.derivation_space(A)
    data = orient.orientation_to_json(J)
    back = orient.orientation_from_json(data, space)
    assert np.allclose(back.coeffs, J.coeffs)
    with pytest.raises(InputError):
        orient.orientation_from_json(data, orient.derivation_space(sym2))
    with pytest.raises(InputError):
        orient.orientation_from_json({"coeffs": []}, space)


def test_perturbed_orientation_moves_by_the_requested_size(herm2_canonical):
    A, J = herm2_canonical
    K = orient.perturb_orientation(J, 1e-2, seed=5)
    assert np.linalg.norm(K.coeffs - J.coeffs) == pytest.approx(1e-2)
    assert not orient.verify_orientation(A, K).passed
