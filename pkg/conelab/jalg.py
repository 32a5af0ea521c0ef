"""Structure-constant Jordan algebra engine.

An algebra is stored as a rank-3 tensor ``c`` with

    (x o y)_k = sum_{i,j} c[k, i, j] x_i y_j

together with the coordinates of its identity and a trace bilinear form.
Elements are plain float vectors of length ``dim``.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from config.settings import (
    CENTER_SINGULAR_TOL, COMMUTATIVITY_TOL, IDENTITY_TOL, JB_PASS_TOL,
    KRYLOV_BREAKDOWN_TOL, POWER_ASSOCIATIVITY_MAX, SPECTRAL_MERGE_TOL,
    SPECTRAL_RECONSTRUCTION_TOL, TRACE_FORM_EIG_TOL, DEFAULT_SAMPLES, DEFAULT_SEED,
)
from config.constants import ERROR_MESSAGES
from conelab.errors import (
    AsymmetricStructureError, DegenerateSpectrumError, InputError,
    SpectralDomainError, StructuralError, dimension_mismatch,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    """A finite-dimensional commutative algebra (V, o, e) with a trace form."""

    name: str
    structure: np.ndarray
    identity: np.ndarray
    trace_form: np.ndarray | None = None
    matrix_basis: np.ndarray | None = None
    spectral_merge: float = SPECTRAL_MERGE_TOL
    _chol: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.structure, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] < 1:
            raise InputError(f"Structure tensor must have shape (n, n, n), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InputError("Structure tensor contains non-finite entries")
        n = c.shape[0]

        asym = float(np.max(np.abs(c - c.transpose(0, 2, 1))))
        if asym > COMMUTATIVITY_TOL * (1.0 + float(np.max(np.abs(c)))):
            raise AsymmetricStructureError(residual=asym)
        c = 0.5 * (c + c.transpose(0, 2, 1))

        e = np.array(self.identity, dtype=float).reshape(-1)
        if e.shape[0] != n:
            raise dimension_mismatch(n, e.shape[0])
        l_e = np.einsum("kij,i->kj", c, e)
        id_residual = float(np.max(np.abs(l_e - np.eye(n))))
        if id_residual > IDENTITY_TOL:
            raise InputError(ERROR_MESSAGES["BAD_IDENTITY"].format(residual=id_residual))

        if self.trace_form is None:
            traces = np.einsum("mkm->k", c)
            gram = np.einsum("kij,k->ij", c, traces)
        else:
            gram = np.array(self.trace_form, dtype=float)
            if gram.shape != (n, n):
                raise InputError(f"Trace form must be {n}x{n}, got {gram.shape}")
            if float(np.max(np.abs(gram - gram.T))) > 1e-12 * (1.0 + float(np.max(np.abs(gram)))):
                raise InputError(ERROR_MESSAGES["TRACE_FORM"].format(value=float("nan")))
        gram = 0.5 * (gram + gram.T)
        eigs = np.linalg.eigvalsh(gram)
        top = float(np.max(np.abs(eigs))) if eigs.size else 0.0
        if top == 0.0 or float(eigs[0]) / top <= TRACE_FORM_EIG_TOL:
            raise InputError(ERROR_MESSAGES["TRACE_FORM"].format(value=float(eigs[0])))

        for arr in (c, e, gram):
            arr.setflags(write=False)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "trace_form", gram)
        chol = np.linalg.cholesky(gram).T  # gram = R^T R
        chol.setflags(write=False)
        object.__setattr__(self, "_chol", chol)
        if self.matrix_basis is not None:
            mb = np.array(self.matrix_basis, dtype=complex)
            mb.setflags(write=False)
            object.__setattr__(self, "matrix_basis", mb)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def __repr__(self):
        return f"AlgebraSpec(name={self.name!r}, dim={self.dim})"


class SpectralDecomposition(NamedTuple):
    values: np.ndarray
    frame: np.ndarray


@dataclass
class JBReport:
    algebra: str
    sample_count: int
    seed: int
    residuals: dict
    passed: bool
    skipped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "residuals": dict(self.residuals),
            "skipped": list(self.skipped),
            "passed": self.passed,
        }


# ── Basic operations ─────────────────────────────────────────────────────────

def as_element(A: AlgebraSpec, x) -> np.ndarray:
    """Coerce ``x`` to a coordinate vector of A, raising InputError on mismatch."""
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape[0] != A.dim:
        raise dimension_mismatch(A.dim, arr.shape[0])
    return arr


def product(A: AlgebraSpec, x, y) -> np.ndarray:
    """Jordan product x o y."""
    x = as_element(A, x)
    y = as_element(A, y)
    return np.einsum("kij,i,j->k", A.structure, x, y)


def l_operator(A: AlgebraSpec, x) -> np.ndarray:
    """Multiplication operator L_x as a dim x dim matrix."""
    x = as_element(A, x)
    return np.einsum("kij,i->kj", A.structure, x)


def power(A: AlgebraSpec, x, k: int) -> np.ndarray:
    """x^k computed as L_x^k applied to e."""
    if k < 0:
        raise InputError(f"Negative power {k}; use functional_calculus for inverses")
    lx = l_operator(A, x)
    out = A.identity.copy()
    for _ in range(k):
        out = lx @ out
    return out


def quad_rep(A: AlgebraSpec, x) -> np.ndarray:
    """Quadratic representation U_x = 2 L_x^2 - L_{x^2}."""
    lx = l_operator(A, x)
    return 2.0 * lx @ lx - l_operator(A, lx @ x)


def inner(A: AlgebraSpec, x, y) -> float:
    return float(as_element(A, x) @ A.trace_form @ as_element(A, y))


def trace_norm(A: AlgebraSpec, x) -> float:
    """Euclidean norm induced by the trace form."""
    return float(np.linalg.norm(A._chol @ as_element(A, x)))


def fingerprint(A: AlgebraSpec) -> str:
    h = hashlib.sha256()
    h.update(np.round(A.structure, 12).tobytes())
    h.update(np.round(A.identity, 12).tobytes())
    return h.hexdigest()[:16]


# ── Spectral theory ──────────────────────────────────────────────────────────

def _ritz_values(A: AlgebraSpec, x: np.ndarray) -> np.ndarray:
    """Roots of the minimal polynomial of x.

    Runs Arnoldi on L_x started at e in trace-form orthonormal coordinates:
    the Krylov space span{e, x, x^2, ...} stops growing exactly when the
    next power depends linearly on the previous ones, and the Hessenberg
    matrix at that point has the minimal polynomial of x as its
    characteristic polynomial.
    """
    r = A._chol
    lx = r @ l_operator(A, x) @ np.linalg.inv(r)
    scale = float(np.linalg.norm(lx, 2))
    if scale == 0.0:
        return np.zeros(1)
    n = A.dim
    q = np.zeros((n + 1, n))
    h = np.zeros((n + 1, n))
    start = r @ A.identity
    q[0] = start / np.linalg.norm(start)
    m = n
    for j in range(n):
        w = lx @ q[j]
        for _ in range(2):
            coeffs = q[: j + 1] @ w
            h[: j + 1, j] += coeffs
            w = w - coeffs @ q[: j + 1]
        beta = float(np.linalg.norm(w))
        if beta <= KRYLOV_BREAKDOWN_TOL * scale or j == n - 1:
            m = j + 1
            break
        h[j + 1, j] = beta
        q[j + 1] = w / beta
    return np.linalg.eigvals(h[:m, :m])


def _merge_roots(A: AlgebraSpec, roots: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(roots))) if roots.size else 0.0
    tol = A.spectral_merge * (1.0 + top)
    imag = float(np.max(np.abs(roots.imag))) if roots.size else 0.0
    if imag > tol:
        raise DegenerateSpectrumError(detail="non-real root of the minimal polynomial", gap=imag)
    values = np.sort(roots.real)
    merged = [[values[0]]]
    for v in values[1:]:
        if v - merged[-1][-1] <= tol:
            merged[-1].append(v)
        else:
            merged.append([v])
    if len(merged) < len(values):
        logger.debug(f"Merged {len(values)} Ritz values into {len(merged)} spectral values")
    return np.array([float(np.mean(group)) for group in merged])


def spectral_values(A: AlgebraSpec, x) -> np.ndarray:
    """Sorted real roots of the minimal polynomial of x (no frame, no checks)."""
    x = as_element(A, x)
    return _merge_roots(A, _ritz_values(A, x))


def spectral(A: AlgebraSpec, x) -> SpectralDecomposition:
    """Spectral decomposition x = sum lambda_i f_i with a complete idempotent frame.

    Raises:
        DegenerateSpectrumError: non-real roots, or clustered roots whose merge
            leaves a reconstruction residual above tolerance.
    """
    x = as_element(A, x)
    values = spectral_values(A, x)
    lx = l_operator(A, x)
    e = A.identity
    frame = np.empty((values.size, A.dim))
    for i, lam in enumerate(values):
        f = e.copy()
        denom = 1.0
        for j, mu in enumerate(values):
            if j == i:
                continue
            f = lx @ f - mu * f
            denom *= lam - mu
        frame[i] = f / denom
    recon = values @ frame
    residual = trace_norm(A, recon - x)
    if residual > SPECTRAL_RECONSTRUCTION_TOL * (1.0 + trace_norm(A, x)):
        gaps = np.diff(values)
        gap = float(np.min(gaps)) if gaps.size else 0.0
        raise DegenerateSpectrumError(
            detail=f"reconstruction residual {residual:.3e} after merging", gap=gap)
    return SpectralDecomposition(values, frame)


def functional_calculus(A: AlgebraSpec, x, f: Callable[[np.ndarray], np.ndarray],
                        domain: Callable[[float], bool] | None = None) -> np.ndarray:
    """Return sum f(lambda_i) f_i.

    Args:
        f: vectorised real function applied to the spectral values.
        domain: optional predicate each spectral value must satisfy.
    """
    values, frame = spectral(A, x)
    for lam in values:
        if domain is not None and not domain(float(lam)):
            raise SpectralDomainError(value=float(lam))
    with np.errstate(all="ignore"):
        mapped = np.asarray(f(values), dtype=float)
    bad = ~np.isfinite(mapped)
    if np.any(bad):
        raise SpectralDomainError(value=float(values[np.argmax(bad)]))
    return mapped @ frame


def _domain_tol(A: AlgebraSpec, x) -> float:
    return 1e-12 * (1.0 + float(np.max(np.abs(spectral_values(A, x)))))


def inverse(A: AlgebraSpec, x) -> np.ndarray:
    tol = _domain_tol(A, x)
    return functional_calculus(A, x, lambda v: 1.0 / v, domain=lambda lam: abs(lam) > tol)


def sqrt(A: AlgebraSpec, x) -> np.ndarray:
    tol = _domain_tol(A, x)
    return functional_calculus(A, x, np.sqrt, domain=lambda lam: lam > tol)


def log(A: AlgebraSpec, x) -> np.ndarray:
    tol = _domain_tol(A, x)
    return functional_calculus(A, x, np.log, domain=lambda lam: lam > tol)


def exp(A: AlgebraSpec, x) -> np.ndarray:
    return functional_calculus(A, x, np.exp)


def real_power(A: AlgebraSpec, x, p: float) -> np.ndarray:
    """x^p for x with positive spectrum (p = -1/2 for the symmetry maps)."""
    tol = _domain_tol(A, x)
    return functional_calculus(A, x, lambda v: np.power(v, p), domain=lambda lam: lam > tol)


# ── Centre and subalgebras ───────────────────────────────────────────────────

def _orthonormalise(A: AlgebraSpec, vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt in the trace form; drops (near-)dependent vectors."""
    out = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for _ in range(2):
            for u in out:
                w = w - inner(A, u, w) * u
        nrm = trace_norm(A, w)
        if nrm > tol * max(1.0, trace_norm(A, v)):
            out.append(w / nrm)
    return np.array(out).reshape(len(out), A.dim)


def center(A: AlgebraSpec) -> np.ndarray:
    """Trace-form orthonormal basis (rows) of the centre {z : [L_z, L_x] = 0}."""
    n = A.dim
    ops = np.einsum("kij->ikj", A.structure)  # ops[i] = L_{b_i}
    # column m: stacked commutators [L_{b_m}, L_{b_i}] over i
    columns = []
    for m in range(n):
        comm = np.einsum("kl,ilj->ikj", ops[m], ops) - np.einsum("ikl,lj->ikj", ops, ops[m])
        columns.append(comm.reshape(-1))
    system = np.array(columns).T
    _, s, vh = np.linalg.svd(system)
    tol = CENTER_SINGULAR_TOL * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > tol))
    kernel = vh[rank:]
    e = A.identity / trace_norm(A, A.identity)
    return _orthonormalise(A, np.vstack([e[None, :], kernel]))


def subalgebra(A: AlgebraSpec, basis, name: str | None = None, tol: float = 1e-9) -> AlgebraSpec:
    """Structure constants of the subspace spanned by ``basis`` (rows).

    Raises:
        StructuralError: the span is not closed under o or misses e.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.shape[1] != A.dim:
        raise dimension_mismatch(A.dim, basis.shape[1])
    pinv = np.linalg.pinv(basis.T)
    prods = np.einsum("kij,ai,bj->abk", A.structure, basis, basis)
    coords = np.einsum("mk,abk->mab", pinv, prods)
    back = np.einsum("mab,mk->abk", coords, basis)
    residual = float(np.max(np.abs(back - prods))) if prods.size else 0.0
    e_coords = pinv @ A.identity
    residual = max(residual, float(np.max(np.abs(e_coords @ basis - A.identity))))
    if residual > tol:
        raise StructuralError(ERROR_MESSAGES["NOT_SUBALGEBRA"].format(residual=residual),
                              residual=residual)
    return AlgebraSpec(name=name or f"sub({A.name})", structure=coords, identity=e_coords,
                       spectral_merge=A.spectral_merge)


# ── JB-axiom verification ────────────────────────────────────────────────────

def _unit_samples(A: AlgebraSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.standard_normal((count, A.dim))
    norms = np.linalg.norm(raw @ A._chol.T, axis=1)
    return raw / norms[:, None]


def verify_jb(A: AlgebraSpec, sample_count: int = DEFAULT_SAMPLES,
              seed: int = DEFAULT_SEED) -> JBReport:
    """Check the JB-algebra axioms on seeded random samples.

    The algebraic identities (commutativity, Jordan identity, power
    associativity) are checked first; the order-unit norm axioms need a
    Jordan algebra to be meaningful and are skipped when those fail.
    """
    from conelab.order import order_unit_seminorm

    rng = np.random.default_rng(seed)
    a_samples = _unit_samples(A, sample_count, rng)
    b_samples = _unit_samples(A, sample_count, rng)
    e = A.identity

    comm = jordan = power_assoc = 0.0
    for a, b in zip(a_samples, b_samples):
        ab = product(A, a, b)
        comm = max(comm, trace_norm(A, ab - product(A, b, a)))
        a2 = product(A, a, a)
        lhs = product(A, a, product(A, b, a2))
        rhs = product(A, ab, a2)
        jordan = max(jordan, trace_norm(A, lhs - rhs))
    x = a_samples[0]
    powers = [power(A, x, k) for k in range(POWER_ASSOCIATIVITY_MAX + 1)]
    for i in range(1, POWER_ASSOCIATIVITY_MAX):
        for j in range(1, POWER_ASSOCIATIVITY_MAX + 1 - i):
            diff = product(A, powers[i], powers[j]) - powers[i + j]
            power_assoc = max(power_assoc, trace_norm(A, diff))

    residuals = {
        "commutativity": comm,
        "jordan_identity": jordan,
        "power_associativity": power_assoc,
    }
    skipped = []
    if max(residuals.values()) > JB_PASS_TOL:
        logger.info(f"{A.name}: algebraic identities fail (jordan residual {jordan:.3e}); "
                    f"norm axioms skipped")
        skipped = ["submultiplicativity", "square_norm", "monotone_square"]
        return JBReport(A.name, sample_count, seed, residuals, False, skipped)

    submult = square = monotone = 0.0
    for a, b in zip(a_samples, b_samples):
        na = order_unit_seminorm(A, e, a)
        nb = order_unit_seminorm(A, e, b)
        ab = product(A, a, b)
        submult = max(submult, (order_unit_seminorm(A, e, ab) - na * nb) / max(na * nb, 1e-300))
        a2 = product(A, a, a)
        b2 = product(A, b, b)
        na2 = order_unit_seminorm(A, e, a2)
        square = max(square, abs(na2 - na * na) / max(na * na, 1e-300))
        nsum = order_unit_seminorm(A, e, a2 + b2)
        monotone = max(monotone, (na2 - nsum) / max(nsum, 1e-300))
    residuals.update({
        "submultiplicativity": max(submult, 0.0),
        "square_norm": square,
        "monotone_square": max(monotone, 0.0),
    })
    passed = max(residuals.values()) <= JB_PASS_TOL
    logger.info(f"verify_jb({A.name}): {'pass' if passed else 'fail'}, "
                f"max residual {max(residuals.values()):.3e}")
    return JBReport(A.name, sample_count, seed, residuals, passed, skipped)
