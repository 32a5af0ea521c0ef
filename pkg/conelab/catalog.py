"""Built-in Euclidean Jordan algebras.

Matrix algebras carry a basis of hermitian matrices that is orthonormal
for Re tr(A^H B); structure constants are read off the symmetrised
matrix product in that basis.
"""
from __future__ import annotations

import logging

import numpy as np

from config.constants import CATALOG_ALIASES, ERROR_MESSAGES
from conelab.errors import InputError
from conelab.jalg import AlgebraSpec
from utils.validators import is_valid_catalog_name, is_valid_size

logger = logging.getLogger(__name__)

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def _check_size(name: str, value: int, minimum: int = 1) -> int:
    if isinstance(value, np.integer):
        value = int(value)
    if not is_valid_size(value, minimum):
        raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(
            name=name, detail=f"expected an integer >= {minimum}, got {value!r}"))
    return int(value)


def _matrix_algebra(name: str, basis: np.ndarray) -> AlgebraSpec:
    """Jordan algebra of the real span of ``basis`` under (AB + BA) / 2."""
    prods = np.einsum("iab,jbc->ijac", basis, basis)
    sym = 0.5 * (prods + prods.transpose(1, 0, 2, 3))
    structure = np.einsum("kab,ijab->kij", basis.conj(), sym).real
    eye = np.eye(basis.shape[1])
    identity = np.einsum("kab,ab->k", basis.conj(), eye).real
    return AlgebraSpec(name=name, structure=structure, identity=identity, matrix_basis=basis)


def _unit(m: int, i: int, j: int) -> np.ndarray:
    out = np.zeros((m, m), dtype=complex)
    out[i, j] = 1.0
    return out


def _symmetric_basis(n: int) -> list[np.ndarray]:
    mats = [_unit(n, i, i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            mats.append((_unit(n, i, j) + _unit(n, j, i)) * _SQRT_HALF)
    return mats


def sym_real(n: int) -> AlgebraSpec:
    """Real symmetric n x n matrices, dimension n(n+1)/2."""
    n = _check_size("sym_real", n)
    return _matrix_algebra(f"sym_real({n})", np.array(_symmetric_basis(n)))


def herm_complex(n: int) -> AlgebraSpec:
    """Complex hermitian n x n matrices, dimension n^2.

    The first n(n+1)/2 basis vectors are the real symmetric ones, so
    sym_real(n) sits in herm_complex(n) as a coordinate subspace.
    """
    n = _check_size("herm_complex", n)
    mats = _symmetric_basis(n)
    for i in range(n):
        for j in range(i + 1, n):
            mats.append(1j * (_unit(n, i, j) - _unit(n, j, i)) * _SQRT_HALF)
    return _matrix_algebra(f"herm_complex({n})", np.array(mats))


# quaternion units 1, i, j, k as 2x2 complex blocks
_QUAT_UNITS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[1j, 0], [0, -1j]], dtype=complex),
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[0, 1j], [1j, 0]], dtype=complex),
)


def quaternion_block(n: int, i: int, j: int, unit: int) -> np.ndarray:
    """2n x 2n complex matrix with quaternion unit ``unit`` in block (i, j)."""
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = _QUAT_UNITS[unit]
    return out


def symplectic_form(n: int) -> np.ndarray:
    """Q = I_n (x) [[0, -1], [1, 0]]; phi(x) = Q conj(x) Q^-1 fixes the quaternionic matrices."""
    return np.kron(np.eye(n), np.array([[0.0, -1.0], [1.0, 0.0]])).astype(complex)


def herm_quat(n: int) -> AlgebraSpec:
    """Quaternionic hermitian n x n matrices, dimension 2n^2 - n.

    Realised inside complex 2n x 2n matrices; the trace is normalised so
    that diagonal matrix units have unit length.
    """
    n = _check_size("herm_quat", n)
    mats = [quaternion_block(n, i, i, 0) * _SQRT_HALF for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for unit in range(4):
                # Q_ji = conj(unit) keeps the block matrix hermitian
                upper = quaternion_block(n, i, j, unit)
                mats.append((upper + upper.conj().T) * 0.5)
    return _matrix_algebra(f"herm_quat({n})", np.array(mats))


def spin_factor(k: int) -> AlgebraSpec:
    """Spin factor R e + R^k with u o v = <u, v> e, dimension k + 1."""
    k = _check_size("spin_factor", k)
    n = k + 1
    c = np.zeros((n, n, n))
    c[0, 0, 0] = 1.0
    for i in range(1, n):
        c[0, i, i] = 1.0
        c[i, 0, i] = 1.0
        c[i, i, 0] = 1.0
    identity = np.zeros(n)
    identity[0] = 1.0
    return AlgebraSpec(name=f"spin_factor({k})", structure=c, identity=identity)


def abelian(n: int) -> AlgebraSpec:
    """R^n with coordinatewise product."""
    n = _check_size("abelian", n)
    c = np.zeros((n, n, n))
    for i in range(n):
        c[i, i, i] = 1.0
    return AlgebraSpec(name=f"abelian({n})", structure=c, identity=np.ones(n))


def direct_sum(first: AlgebraSpec, second: AlgebraSpec) -> AlgebraSpec:
    """Block-diagonal direct sum; keeps a matrix realisation when both have one."""
    n1, n2 = first.dim, second.dim
    n = n1 + n2
    c = np.zeros((n, n, n))
    c[:n1, :n1, :n1] = first.structure
    c[n1:, n1:, n1:] = second.structure
    identity = np.concatenate([first.identity, second.identity])
    basis = None
    if first.matrix_basis is not None and second.matrix_basis is not None:
        m1, m2 = first.matrix_basis.shape[1], second.matrix_basis.shape[1]
        basis = np.zeros((n, m1 + m2, m1 + m2), dtype=complex)
        basis[:n1, :m1, :m1] = first.matrix_basis
        basis[n1:, m1:, m1:] = second.matrix_basis
    return AlgebraSpec(name=f"{first.name}+{second.name}", structure=c, identity=identity,
                       matrix_basis=basis)


_BUILDERS = {
    "sym_real": sym_real,
    "herm_complex": herm_complex,
    "herm_quat": herm_quat,
    "spin_factor": spin_factor,
    "abelian": abelian,
}


def resolve_name(name: str) -> str:
    if not is_valid_catalog_name(name):
        raise InputError(ERROR_MESSAGES["UNKNOWN_ALGEBRA"].format(name=name))
    return CATALOG_ALIASES.get(name, name)


def catalog(name: str, size: int | None = None,
            summands: list[tuple[str, int]] | None = None) -> AlgebraSpec:
    """Build a catalog algebra by name.

    Args:
        name: catalog name or alias (``spin``, ``sym``, ``herm``, ``quat``).
        size: n for matrix and abelian algebras, k for spin factors.
        summands: (name, size) pairs when ``name`` is ``direct_sum``.
    """
    canonical = resolve_name(name)
    if canonical == "direct_sum":
        if not summands or len(summands) < 2:
            raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(
                name="direct_sum", detail="at least two summands are required"))
        parts = [catalog(part, part_size) for part, part_size in summands]
        out = parts[0]
        for part in parts[1:]:
            out = direct_sum(out, part)
        return out
    logger.debug(f"Building catalog algebra {canonical}({size})")
    return _BUILDERS[canonical](size)


def parse_summand(token: str) -> tuple[str, int]:
    """Parse ``name:size`` as used by ``--summand``."""
    name, sep, size = token.partition(":")
    if not sep or not size.strip().isdigit():
        raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(
            name="direct_sum", detail=f"summand '{token}' must look like name:size"))
    return resolve_name(name.strip()), int(size)

