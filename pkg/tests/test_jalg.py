import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from config.settings import DATA_DIR
from conelab import catalog, jalg
from conelab.errors import (
    AsymmetricStructureError, DegenerateSpectrumError, InputError, SpectralDomainError,
)
from conelab.jalg import AlgebraSpec
from conelab.loader import load_algebra
from tests.oracles import from_matrix, perturbed, to_matrix

SPIN3 = catalog.spin_factor(3)
HERM2 = catalog.herm_complex(2)
coords = arrays(np.float64, 4, elements=st.floats(-2, 2, allow_nan=False, allow_infinity=False))


@pytest.mark.parametrize("A", [SPIN3, HERM2], ids=["spin_factor(3)", "herm_complex(2)"])
@settings(max_examples=50, deadline=None)
@given(x=coords, y=coords, z=coords, s=st.floats(-3, 3))
def test_product_is_commutative_and_bilinear(A, x, y, z, s):
    assert np.allclose(jalg.product(A, x, y), jalg.product(A, y, x), atol=1e-12)
    lhs = jalg.product(A, s * x + z, y)
    rhs = s * jalg.product(A, x, y) + jalg.product(A, z, y)
    assert np.allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("A", [SPIN3, HERM2], ids=["spin_factor(3)", "herm_complex(2)"])
@settings(max_examples=50, deadline=None)
@given(a=coords, b=coords)
def test_jordan_identity_and_power_associativity(A, a, b):
    a2 = jalg.product(A, a, a)
    lhs = jalg.product(A, a, jalg.product(A, b, a2))
    rhs = jalg.product(A, jalg.product(A, a, b), a2)
    scale = (1.0 + np.linalg.norm(a)) ** 3 * (1.0 + np.linalg.norm(b))
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * scale
    assert np.allclose(jalg.product(A, jalg.power(A, a, 2), jalg.power(A, a, 3)),
                       jalg.power(A, a, 5), atol=1e-9 * (1.0 + np.linalg.norm(a)) ** 5)


def test_identity_is_a_unit(catalog_algebra, rng):
    A = catalog_algebra
    for x in rng.standard_normal((5, A.dim)):
        assert np.allclose(jalg.product(A, A.identity, x), x, atol=1e-12)
    assert np.allclose(jalg.l_operator(A, A.identity), np.eye(A.dim), atol=1e-12)


def test_sym_real_product_matches_matrix_oracle(sym2):
    x = from_matrix(sym2, np.array([[0.0, 1.0], [1.0, 0.0]]))
    y = from_matrix(sym2, np.diag([1.0, -1.0]))
    assert np.allclose(jalg.product(sym2, x, y), 0.0, atol=1e-14)

    rng = np.random.default_rng(7)
    a, b = rng.standard_normal((2, sym2.dim))
    ma, mb = to_matrix(sym2, a), to_matrix(sym2, b)
    assert np.allclose(to_matrix(sym2, jalg.product(sym2, a, b)), (ma @ mb + mb @ ma) / 2)


def test_spin_factor_product_of_vectors():
    u = np.array([0.0, 1.0, 2.0, -1.0])
    v = np.array([0.0, 3.0, 0.5, 2.0])
    assert np.allclose(jalg.product(SPIN3, u, v), [1.0 * 3 + 2 * 0.5 - 2, 0, 0, 0])


def test_product_dimension_mismatch():
    with pytest.raises(InputError):
        jalg.product(SPIN3, np.ones(3), np.ones(4))


def test_l_operator_spectrum_and_linearity(sym2):
    x = from_matrix(sym2, np.diag([1.0, 2.0]))
    assert np.allclose(np.sort(np.linalg.eigvals(jalg.l_operator(sym2, x)).real), [1.0, 1.5, 2.0])
    assert np.allclose(jalg.l_operator(sym2, 2.5 * x), 2.5 * jalg.l_operator(sym2, x))


def test_spectral_of_identity(catalog_algebra):
    values, frame = jalg.spectral(catalog_algebra, catalog_algebra.identity)
    assert np.allclose(values, [1.0])
    assert np.allclose(frame[0], catalog_algebra.identity)


def test_spin_factor_spectrum():
    s, u = 0.7, np.array([1.0, -2.0, 2.0])
    values = jalg.spectral_values(SPIN3, np.concatenate([[s], u]))
    assert np.allclose(values, [s - 3.0, s + 3.0])


def test_hermitian_spectrum_matches_eigenvalues(herm2):
    values = jalg.spectral_values(herm2, from_matrix(herm2, np.diag([1.0, 3.0])))
    assert np.allclose(values, [1.0, 3.0])


def test_spectral_frame_is_complete(catalog_algebra, rng):
    A = catalog_algebra
    for x in rng.standard_normal((5, A.dim)):
        values, frame = jalg.spectral(A, x)
        assert np.allclose(values @ frame, x, atol=1e-9)
        assert np.allclose(frame.sum(axis=0), A.identity, atol=1e-9)
        for i, fi in enumerate(frame):
            for j, fj in enumerate(frame):
                expected = fi if i == j else np.zeros(A.dim)
                assert np.allclose(jalg.product(A, fi, fj), expected, atol=1e-8)


def test_nilpotent_element_has_degenerate_spectrum():
    A = load_algebra(os.path.join(DATA_DIR, "algebras", "dual_numbers.json"))
    assert np.allclose(jalg.spectral_values(A, [0.0, 1.0]), [0.0])
    with pytest.raises(DegenerateSpectrumError):
        jalg.spectral(A, [0.0, 1.0])


def test_functional_calculus(sym2):
    x = from_matrix(sym2, np.diag([2.0, 4.0]))
    assert np.allclose(jalg.inverse(sym2, x), from_matrix(sym2, np.diag([0.5, 0.25])))
    assert np.allclose(jalg.inverse(sym2, sym2.identity), sym2.identity)
    y = from_matrix(sym2, np.array([[2.0, 0.5], [0.5, 1.0]]))
    assert np.allclose(jalg.sqrt(sym2, jalg.product(sym2, y, y)), y, atol=1e-10)
    assert np.allclose(jalg.product(sym2, y, jalg.inverse(sym2, y)), sym2.identity, atol=1e-10)
    assert np.allclose(jalg.log(sym2, jalg.exp(sym2, y)), y, atol=1e-10)


def test_log_outside_domain_names_the_spectral_value(sym2):
    with pytest.raises(SpectralDomainError) as info:
        jalg.log(sym2, from_matrix(sym2, np.diag([1.0, -1.0])))
    assert info.value.value == pytest.approx(-1.0)


def test_quad_rep(sym2, catalog_algebra, rng):
    assert np.allclose(jalg.quad_rep(sym2, sym2.identity), np.eye(3))
    x, y = rng.standard_normal((2, sym2.dim))
    mx, my = to_matrix(sym2, x), to_matrix(sym2, y)
    assert np.allclose(to_matrix(sym2, jalg.quad_rep(sym2, x) @ y), mx @ my @ mx)

    A = catalog_algebra
    p = jalg.exp(A, 0.5 * rng.standard_normal(A.dim))
    p_inv = jalg.inverse(A, p)
    assert np.allclose(jalg.quad_rep(A, p) @ p_inv, p, atol=1e-9)
    assert np.allclose(jalg.quad_rep(A, p) @ jalg.quad_rep(A, p_inv), np.eye(A.dim), atol=1e-8)


def test_center_dimensions(abelian3, herm2):
    assert jalg.center(abelian3).shape[0] == 3
    assert jalg.center(herm2).shape[0] == 1
    assert jalg.center(catalog.direct_sum(herm2, herm2)).shape[0] == 2


def test_center_commutes_with_every_multiplication(catalog_algebra):
    A = catalog_algebra
    Z = jalg.center(A)
    assert np.allclose(Z[0], A.identity / jalg.trace_norm(A, A.identity))
    for z in Z:
        lz = jalg.l_operator(A, z)
        for b in np.eye(A.dim):
            lb = jalg.l_operator(A, b)
            assert np.linalg.norm(lz @ lb - lb @ lz) <= 1e-9


def test_verify_jb_passes_on_known_algebras(herm3):
    assert jalg.verify_jb(herm3, sample_count=50).passed
    report = jalg.verify_jb(catalog.spin_factor(5), sample_count=50)
    assert report.passed
    assert not report.skipped


_CATALOG_RANGE = (
    [("sym_real", n) for n in (2, 3, 4)]
    + [("herm_quat", n) for n in (1, 2)]
    + [("spin_factor", k) for k in range(2, 7)]
    + [("abelian", n) for n in range(1, 6)]
)


@pytest.mark.parametrize("name,size", _CATALOG_RANGE, ids=[f"{n}({s})" for n, s in _CATALOG_RANGE])
def test_verify_jb_passes_across_catalog(name, size):
    report = jalg.verify_jb(catalog.catalog(name, size), sample_count=30, seed=size)
    assert report.passed, report.residuals
    assert not report.skipped


def test_verify_jb_detects_perturbed_structure(spin3):
    eps = 1e-2
    A = perturbed(spin3, 1, 2, 3, eps)
    report = jalg.verify_jb(A, sample_count=100)
    assert not report.passed
    assert report.residuals["jordan_identity"] > 1e-6
    assert "square_norm" in report.skipped

    # witness pair: a = b2 + b3, b = b1 gives a Jordan associator of 2 eps a
    a = np.array([0.0, 0.0, 1.0, 1.0])
    b = np.array([0.0, 1.0, 0.0, 0.0])
    a2 = jalg.product(A, a, a)
    lhs = jalg.product(A, a, jalg.product(A, b, a2))
    rhs = jalg.product(A, jalg.product(A, a, b), a2)
    assert np.linalg.norm(lhs - rhs) >= eps / 10


@pytest.mark.parametrize("name,size,dim", [
    ("sym_real", 2, 3), ("herm_complex", 2, 4), ("herm_quat", 2, 6),
    ("spin_factor", 4, 5), ("abelian", 3, 3),
])
def test_catalog_dimensions(name, size, dim):
    assert catalog.catalog(name, size).dim == dim


def test_construction_rejects_bad_input(spin3):
    c = np.array(spin3.structure)
    c[1, 0, 2] += 0.5
    with pytest.raises(AsymmetricStructureError):
        AlgebraSpec(name="asym", structure=c, identity=spin3.identity)
    with pytest.raises(InputError):
        AlgebraSpec(name="unit", structure=spin3.structure, identity=2 * spin3.identity)
    with pytest.raises(InputError):
        AlgebraSpec(name="form", structure=spin3.structure, identity=spin3.identity,
                    trace_form=-np.eye(4))


def test_subalgebra_of_diagonal_matrices(herm2):
    diag = from_matrix(herm2, np.diag([1.0, 0.0])), from_matrix(herm2, np.diag([0.0, 1.0]))
    sub = jalg.subalgebra(herm2, np.array(diag))
    assert sub.dim == 2
    assert np.allclose(sub.identity, [1.0, 1.0])
    assert jalg.center(sub).shape[0] == 2


def test_fingerprint_tracks_structure(spin3):
    assert jalg.fingerprint(spin3) == jalg.fingerprint(catalog.spin_factor(3))
    assert jalg.fingerprint(spin3) != jalg.fingerprint(perturbed(spin3, 1, 2, 3, 1e-2))
