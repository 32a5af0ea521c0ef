"""Shared fixtures: seeded generators and catalog algebras."""
import numpy as np
import pytest

from conelab import catalog


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sym2():
    return catalog.sym_real(2)


@pytest.fixture
def herm2():
    return catalog.herm_complex(2)


@pytest.fixture
def herm3():
    return catalog.herm_complex(3)


@pytest.fixture
def spin3():
    return catalog.spin_factor(3)


@pytest.fixture
def abelian3():
    return catalog.abelian(3)


@pytest.fixture(params=[
    ("sym_real", 2), ("sym_real", 3), ("herm_complex", 2), ("herm_complex", 3),
    ("herm_quat", 1), ("herm_quat", 2), ("spin_factor", 2), ("spin_factor", 4),
    ("abelian", 1), ("abelian", 3),
], ids=lambda p: f"{p[0]}({p[1]})")
def catalog_algebra(request):
    name, size = request.param
    return catalog.catalog(name, size)
