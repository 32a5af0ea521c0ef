"""Dense-matrix oracles and fixture builders used across the tests."""
import numpy as np

from conelab.jalg import AlgebraSpec


def to_matrix(A, x):
    """Dense matrix realising the element x of a matrix catalog algebra."""
    return np.einsum("k,kab->ab", np.asarray(x, dtype=float), A.matrix_basis)


def from_matrix(A, m):
    """Coordinates of a hermitian matrix over the orthonormal basis of A."""
    return np.einsum("kab,ab->k", A.matrix_basis.conj(), m).real


def perturbed(A, i, j, k, eps):
    """A copy of A whose product b_j o b_k gains eps * b_i (kept symmetric)."""
    c = np.array(A.structure)
    c[i, j, k] += eps
    if j != k:
        c[i, k, j] += eps
    return AlgebraSpec(name=f"{A.name}~", structure=c, identity=A.identity)
