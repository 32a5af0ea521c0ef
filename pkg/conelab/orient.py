"""Derivation algebras and orientations.

An orientation is a linear map J from the algebra into its derivations
with

    J(J(a) b) = [L_b, L_a]

for all a, b. It is stored as coefficients over a derivation basis D_k:
J(a) = sum_k (coeffs[k] . a) D_k.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import least_squares

from config.constants import (
    ERROR_MESSAGES, FOUND, INCONCLUSIVE, INTERIOR, NOT_FOUND, REPORT_SCHEMA_VERSION,
)
from config.settings import (
    DEFAULT_SEED, DERIVATION_GAP_RATIO, DERIVATION_SINGULAR_TOL, MAX_THREADS,
    ORIENTATION_TOL, SOLVER_INIT_SCALE, SOLVER_MAX_ITER, SOLVER_RESTARTS,
    SOLVER_TOL_FAIL, SOLVER_TOL_SUCCESS,
)
from conelab import jalg, order
from conelab.errors import InputError, NotAdditiveError, PreconditionError
from conelab.jalg import AlgebraSpec
from utils.helpers import array_digest, make_rng, random_elements, random_interior, spawn_seeds

logger = logging.getLogger(__name__)


@dataclass
class DerivationSpace:
    """Trace-form orthonormal basis (d, n, n) of the derivation algebra."""

    basis: np.ndarray
    tolerance: float
    gap_ratio: float = float("inf")
    checks: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def basis_hash(self) -> str:
        return array_digest(self.basis, decimals=10)


@dataclass
class Orientation:
    """J(a) = sum_k (coeffs[k] . a) basis[k]."""

    coeffs: np.ndarray
    basis: np.ndarray
    base_point: np.ndarray
    residual: float = float("nan")
    checks: dict = field(default_factory=dict)

    @property
    def basis_hash(self) -> str:
        return array_digest(self.basis, decimals=10)

    def apply(self, a) -> np.ndarray:
        """The derivation J(a) as a matrix."""
        weights = self.coeffs @ np.asarray(a, dtype=float)
        return np.tensordot(weights, self.basis, axes=1)

    def operators(self) -> np.ndarray:
        """Stack of J(e_i) for every basis vector e_i, shape (n, n, n)."""
        n = self.coeffs.shape[1]
        if self.basis.shape[0] == 0:
            return np.zeros((n, n, n))
        return np.einsum("ki,kpq->ipq", self.coeffs, self.basis)

    def scaled(self, factor: float) -> "Orientation":
        return replace(self, coeffs=factor * self.coeffs, residual=float("nan"), checks={})


@dataclass
class OrientationReport:
    residuals: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        return {"residuals": dict(self.residuals), "tol": self.tol, "passed": self.passed}


@dataclass
class SolveResult:
    status: str
    residual: float
    orientation: Orientation
    restarts: int

    def to_dict(self) -> dict:
        return {"status": self.status, "residual": self.residual, "restarts": self.restarts}


# ── Derivations ──────────────────────────────────────────────────────────────

def leibniz_system(A: AlgebraSpec) -> np.ndarray:
    """Matrix M with M vec(D) = 0 iff D(x o y) = Dx o y + x o Dy on basis pairs."""
    n = A.dim
    c = A.structure
    eye = np.eye(n)
    m = (np.einsum("ka,bij->kijab", eye, c)
         - np.einsum("kaj,bi->kijab", c, eye)
         - np.einsum("kia,bj->kijab", c, eye))
    return m.reshape(n ** 3, n * n)


def leibniz_residual(A: AlgebraSpec, D) -> float:
    return float(np.max(np.abs(leibniz_system(A) @ np.asarray(D, dtype=float).reshape(-1))))


def _whiten(A: AlgebraSpec, mats: np.ndarray) -> np.ndarray:
    r = A._chol
    return np.einsum("pq,kqs,st->kpt", r, mats, np.linalg.inv(r))


def _unwhiten(A: AlgebraSpec, mats: np.ndarray) -> np.ndarray:
    r = A._chol
    return np.einsum("pq,kqs,st->kpt", np.linalg.inv(r), mats, r)


def derivation_space(A: AlgebraSpec, tol: float = DERIVATION_SINGULAR_TOL,
                     seed: int = DEFAULT_SEED) -> DerivationSpace:
    """Kernel of the Leibniz system, orthonormal for tr(G^-1 D1^T G D2).

    Cross-checks on samples that exp(tD) fixes e and maps interior points to
    interior points for t in {+-1, +-0.1}.
    """
    n = A.dim
    _, s, vh = np.linalg.svd(leibniz_system(A))
    top = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > tol * max(top, 1e-300))) if top > 0 else 0
    kernel = vh[rank:].reshape(-1, n, n)
    gap_ratio = float("inf")
    if 0 < rank < s.size:
        gap_ratio = float(s[rank - 1]) / max(float(s[rank]), 1e-300)
        if gap_ratio < DERIVATION_GAP_RATIO:
            logger.warning(f"{A.name}: ambiguous derivation dimension, "
                           f"singular value gap ratio {gap_ratio:.3g}")
    if kernel.shape[0]:
        white = _whiten(A, kernel).reshape(kernel.shape[0], -1)
        u, sv, vt = np.linalg.svd(white, full_matrices=False)
        basis = _unwhiten(A, vt[sv > 1e-12 * sv[0]].reshape(-1, n, n))
    else:
        basis = np.zeros((0, n, n))

    checks = {"fixes_identity": 0.0, "cone_escapes": 0.0}
    if basis.shape[0]:
        rng = make_rng(seed)
        points = random_interior(A, 5, rng, spread=0.5)
        for x, w in zip(points, rng.standard_normal((5, basis.shape[0]))):
            D = np.tensordot(w / np.linalg.norm(w), basis, axes=1)
            for t in (1.0, -1.0, 0.1, -0.1):
                g = expm(t * D)
                checks["fixes_identity"] = max(checks["fixes_identity"],
                                               float(np.linalg.norm(g @ A.identity - A.identity)))
                if order.positivity(A, g @ x) != INTERIOR:
                    checks["cone_escapes"] += 1.0
        if checks["fixes_identity"] > 1e-8 or checks["cone_escapes"]:
            logger.warning(f"{A.name}: derivation cross-check failed {checks}")
    logger.info(f"{A.name}: derivation algebra has dimension {basis.shape[0]}")
    return DerivationSpace(basis=basis, tolerance=tol, gap_ratio=gap_ratio, checks=checks)


# ── Verification ─────────────────────────────────────────────────────────────

def _multiplication_operators(A: AlgebraSpec) -> np.ndarray:
    return np.einsum("kij->ikj", A.structure)


def quadratic_residual(A: AlgebraSpec, J: Orientation) -> float:
    """max over basis pairs of |J(J(e_i) e_j) - [L_j, L_i]|_F."""
    T = J.operators()
    L = _multiplication_operators(A)
    lhs = np.einsum("imj,mpq->ijpq", T, T)
    target = np.einsum("jpr,irq->ijpq", L, L) - np.einsum("ipr,jrq->ijpq", L, L)
    return float(np.max(np.linalg.norm(lhs - target, axis=(2, 3))))


def verify_orientation(A: AlgebraSpec, J: Orientation, tol: float = ORIENTATION_TOL) -> OrientationReport:
    """Residuals of the orientation equation and its consequences.

    Raises:
        InputError: J is not valued in the derivations of A.
    """
    n = A.dim
    if J.coeffs.shape != (J.basis.shape[0], n) or J.basis.shape[1:] != (n, n):
        raise InputError(f"Orientation shapes {J.coeffs.shape}/{J.basis.shape} do not fit dim {n}")
    derivation = max((leibniz_residual(A, D) for D in J.basis), default=0.0)
    scale = max(1.0, float(np.max(np.abs(J.basis))) if J.basis.size else 1.0)
    if derivation > 1e-9 * scale:
        raise InputError(ERROR_MESSAGES["NOT_DERIVATION"].format(residual=derivation))

    T = J.operators()
    L = _multiplication_operators(A)
    # [i, j, :] slices: J(e_i) e_j and J(e_j) e_i
    antisym = float(np.max(np.abs(T.transpose(0, 2, 1) + T.transpose(2, 0, 1))))
    centre = max((float(np.linalg.norm(J.apply(z))) for z in jalg.center(A)), default=0.0)
    bracket_l = np.einsum("ipr,jrq->ijpq", L, L) - np.einsum("jpr,irq->ijpq", L, L)
    bracket_j = np.einsum("jpr,irq->ijpq", T, T) - np.einsum("ipr,jrq->ijpq", T, T)
    bracket = float(np.max(np.linalg.norm(bracket_l - bracket_j, axis=(2, 3))))
    return OrientationReport({
        "quadratic": quadratic_residual(A, J),
        "antisymmetry": antisym,
        "center_kernel": centre,
        "bracket": bracket,
    }, tol)


def zero_orientation(A: AlgebraSpec, space: DerivationSpace | None = None) -> Orientation:
    space = space or derivation_space(A)
    return Orientation(np.zeros((space.dim, A.dim)), space.basis, A.identity.copy())


def _project_onto(basis: np.ndarray, mats: np.ndarray, what: str) -> np.ndarray:
    """Least-squares coordinates of each matrix in ``mats`` over ``basis``."""
    flat = basis.reshape(basis.shape[0], -1).T
    coords, *_ = np.linalg.lstsq(flat, mats.reshape(mats.shape[0], -1).T, rcond=None)
    miss = float(np.max(np.abs(flat @ coords - mats.reshape(mats.shape[0], -1).T)))
    if miss > 1e-9:
        raise PreconditionError(f"{what} not in the derivation span (residual {miss:.3e})")
    return coords


def canonical_orientation(A: AlgebraSpec, space: DerivationSpace | None = None) -> Orientation:
    """J(a) x = (i/2)(a x - x a) read through the matrix realisation of A.

    Raises:
        PreconditionError: A has no complex hermitian realisation closed
            under i[a, b] (real symmetric or quaternionic matrices, spin
            factors, ingested algebras).
    """
    M = A.matrix_basis
    if M is None:
        raise PreconditionError(ERROR_MESSAGES["NOT_MATRIX_CATALOG"].format(name=A.name))
    comm = 0.5j * (np.einsum("iab,jbc->ijac", M, M) - np.einsum("jab,ibc->ijac", M, M))
    coords = np.einsum("kab,ijab->kij", M.conj(), comm).real
    back = np.einsum("kij,kac->ijac", coords, M)
    if float(np.max(np.abs(back - comm))) > 1e-10:
        raise PreconditionError(ERROR_MESSAGES["NOT_MATRIX_CATALOG"].format(name=A.name))
    space = space or derivation_space(A)
    ops = coords.transpose(1, 0, 2)  # ops[i][k, j] = coordinate k of J(e_i) e_j
    coeffs = _project_onto(space.basis, ops, "canonical commutator map") if space.dim else \
        np.zeros((0, A.dim))
    J = Orientation(coeffs, space.basis, A.identity.copy())
    J.residual = quadratic_residual(A, J)
    return J


# ── Search ───────────────────────────────────────────────────────────────────

class _OrientationProblem:
    """Stacked residual r[i, j, k] = (alpha W[i, j])_k - target[i, j, k]."""

    def __init__(self, A: AlgebraSpec, space: DerivationSpace, impose_antisymmetry: bool):
        n, d = A.dim, space.dim
        self.n, self.d = n, d
        self.P = space.basis.transpose(0, 2, 1)  # P[k, j, :] = D_k e_j
        L = _multiplication_operators(A)
        bracket = np.einsum("jpr,irq->ijpq", L, L) - np.einsum("ipr,jrq->ijpq", L, L)
        white = _whiten(A, space.basis)
        white_bracket = _whiten(A, bracket.reshape(n * n, n, n))
        # coordinates over the orthonormal basis plus the part no J can reach
        self.target = np.einsum("kpq,mpq->mk", white, white_bracket).reshape(n, n, d)
        reach = np.einsum("mk,kpq->mpq", self.target.reshape(n * n, d), white)
        self.floor = float(np.max(np.linalg.norm(white_bracket - reach, axis=(1, 2))))
        self.white = white

        rows = []
        if impose_antisymmetry and d:
            eye_n = np.eye(n)
            anti = (np.einsum("bi,ajp->ijpab", eye_n, self.P)
                    + np.einsum("bj,aip->ijpab", eye_n, self.P))
            iu = np.triu_indices(n)
            rows.append(anti[iu].reshape(-1, d * n))
            for z in jalg.center(A):
                rows.append(np.einsum("ak,b->kab", np.eye(d), z).reshape(d, d * n))
        if rows:
            self.N = null_space(np.vstack(rows), rcond=1e-10)
        else:
            self.N = np.eye(d * n)

    @property
    def reduced_dim(self) -> int:
        return self.N.shape[1]

    def alpha(self, beta: np.ndarray) -> np.ndarray:
        return (self.N @ beta).reshape(self.d, self.n)

    def residual(self, beta: np.ndarray) -> np.ndarray:
        a = self.alpha(beta)
        W = np.einsum("ki,kjp->ijp", a, self.P)
        return (np.einsum("km,ijm->ijk", a, W) - self.target).reshape(-1)

    def jacobian(self, beta: np.ndarray) -> np.ndarray:
        a = self.alpha(beta)
        W = np.einsum("ki,kjp->ijp", a, self.P)
        Q = np.einsum("km,ajm->ajk", a, self.P)
        jac = (np.einsum("ka,ijb->ijkab", np.eye(self.d), W)
               + np.einsum("bi,ajk->ijkab", np.eye(self.n), Q))
        return jac.reshape(-1, self.d * self.n) @ self.N

    def solve(self, beta0: np.ndarray, max_iter: int) -> tuple[float, np.ndarray]:
        fit = least_squares(self.residual, beta0, jac=self.jacobian, method="lm",
                            max_nfev=max_iter, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        return float(np.linalg.norm(fit.fun)), fit.x


def _verdict(residual: float, tol_success: float, tol_fail: float) -> str:
    if residual < tol_success:
        return FOUND
    if residual > tol_fail:
        return NOT_FOUND
    return INCONCLUSIVE


def solve_orientation(A: AlgebraSpec, restarts: int = SOLVER_RESTARTS,
                      max_iter: int = SOLVER_MAX_ITER, tol_success: float = SOLVER_TOL_SUCCESS,
                      tol_fail: float = SOLVER_TOL_FAIL, seed: int = DEFAULT_SEED,
                      impose_antisymmetry: bool = True, space: DerivationSpace | None = None,
                      threads: int = MAX_THREADS) -> SolveResult:
    """Search for an orientation by Levenberg-Marquardt with random restarts.

    Each restart draws its start from its own child of ``seed``; candidates
    are merged by lowest residual with ties going to the lowest restart
    index, so the verdict does not depend on thread scheduling. The best
    candidate is polished once more before its residual is graded against
    ``tol_success`` and ``tol_fail``.

    Returns:
        SolveResult: verdict, graded residual and the best candidate
    """
    if not tol_success < tol_fail:
        raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(
            name="solve_orientation", detail="tol_success must be below tol_fail"))
    space = space or derivation_space(A)
    problem = _OrientationProblem(A, space, impose_antisymmetry)

    if problem.reduced_dim == 0:
        J = zero_orientation(A, space)
        J.residual = quadratic_residual(A, J)
        status = _verdict(J.residual, tol_success, tol_fail)
        logger.info(f"{A.name}: no free parameters, residual at J = 0 is {J.residual:.3e} ({status})")
        return SolveResult(status, J.residual, J, 0)

    seeds = spawn_seeds(seed, restarts)

    def run(index: int) -> tuple[float, int, np.ndarray]:
        beta0 = SOLVER_INIT_SCALE * make_rng(seeds[index]).standard_normal(problem.reduced_dim)
        cost, beta = problem.solve(beta0, max_iter)
        return cost, index, beta

    workers = max(1, min(threads, restarts))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(restarts)))
    cost, index, beta = min(results, key=lambda item: (item[0], item[1]))
    _, beta = problem.solve(beta, 10 * max_iter)

    J = Orientation(problem.alpha(beta), space.basis, A.identity.copy())
    J.residual = quadratic_residual(A, J)
    status = _verdict(J.residual, tol_success, tol_fail)
    logger.info(f"{A.name}: orientation search {status}, residual {J.residual:.3e} "
                f"(best restart {index} of {restarts}, unreachable floor {problem.floor:.3e})")
    return SolveResult(status, J.residual, J, restarts)


def perturb_orientation(J: Orientation, size: float, seed: int = DEFAULT_SEED) -> Orientation:
    """J plus a random derivation-valued map with coefficient norm ``size``."""
    noise = make_rng(seed).standard_normal(J.coeffs.shape)
    norm = float(np.linalg.norm(noise))
    if norm == 0.0:
        return replace(J, checks={})
    return replace(J, coeffs=J.coeffs + size * noise / norm, residual=float("nan"), checks={})


# ── Extension from the cone and transport ────────────────────────────────────

def extend_cone_map(A: AlgebraSpec, J_on_cone: Callable[[np.ndarray], np.ndarray], v,
                    samples: int = 10, seed: int = DEFAULT_SEED, tol: float = 1e-8) -> np.ndarray:
    """Linear extension J(v) = J(v + mu e) - J(mu e) with mu = 2 |v|_e.

    Raises:
        NotAdditiveError: J_on_cone fails additivity or positive homogeneity
            on sampled cone points, or the extension depends on mu.
    """
    v = jalg.as_element(A, v)
    e = A.identity
    rng = make_rng(seed)
    pts = random_interior(A, 2 * samples, rng, spread=0.5)
    residual = 0.0
    for w1, w2, t in zip(pts[:samples], pts[samples:], rng.uniform(0.1, 3.0, samples)):
        j1, j2 = J_on_cone(w1), J_on_cone(w2)
        scale = max(1.0, float(np.linalg.norm(j1)), float(np.linalg.norm(j2)))
        residual = max(residual, float(np.linalg.norm(J_on_cone(w1 + w2) - j1 - j2)) / scale,
                       float(np.linalg.norm(J_on_cone(t * w1) - t * j1)) / scale)
    if residual > tol:
        raise NotAdditiveError(residual=residual)

    mu = 2.0 * order.order_unit_seminorm(A, e, v)
    if mu == 0.0:
        return np.zeros((A.dim, A.dim))
    out = J_on_cone(v + mu * e) - J_on_cone(mu * e)
    again = J_on_cone(v + 2.0 * mu * e) - J_on_cone(2.0 * mu * e)
    drift = float(np.linalg.norm(out - again)) / max(1.0, float(np.linalg.norm(out)))
    if drift > tol:
        raise NotAdditiveError(residual=drift)
    return out


def transport_orientation(A: AlgebraSpec, J: Orientation, u, samples: int = 5,
                          seed: int = DEFAULT_SEED) -> Orientation:
    """J'(a) = g^-1 J(g a) g with g = transitive_map(u, e).

    The result lives over the conjugated basis g^-1 D_k g. Its checks record
    how far exp(t J'(a)) moves u and the residual of the transported
    equation J'(J'(a) b) = [M_b, M_a] with M(a) = g^-1 L(g a) g.
    """
    from conelab.geom import transitive_map

    u = jalg.as_element(A, u)
    g = transitive_map(A, u, A.identity)
    g_inv = np.linalg.inv(g)
    basis = np.einsum("pq,kqs,st->kpt", g_inv, J.basis, g)
    moved = Orientation(J.coeffs @ g, basis, u.copy())

    fix = 0.0
    for a in random_elements(A, samples, make_rng(seed)):
        Ja = moved.apply(a)
        for t in (1.0, -0.5):
            fix = max(fix, jalg.trace_norm(A, expm(t * Ja) @ u - u))
    T = moved.operators()
    M = np.einsum("pq,iqs,st->ipt", g_inv,
                  np.array([jalg.l_operator(A, g @ b) for b in np.eye(A.dim)]), g)
    lhs = np.einsum("imj,mpq->ijpq", T, T)
    target = np.einsum("jpr,irq->ijpq", M, M) - np.einsum("ipr,jrq->ijpq", M, M)
    transported = float(np.max(np.linalg.norm(lhs - target, axis=(2, 3))))
    moved.residual = transported
    moved.checks = {"fixes_base_point": fix, "transported_equation": transported}
    if max(fix, transported) > 1e-7:
        logger.warning(f"{A.name}: transported orientation residuals {moved.checks}")
    return moved


# ── Serialisation ────────────────────────────────────────────────────────────

def orientation_to_json(J: Orientation) -> dict:
    return {
        "schema": REPORT_SCHEMA_VERSION,
        "basis_hash": J.basis_hash,
        "coeffs": J.coeffs.tolist(),
        "base_point": J.base_point.tolist(),
        "residual": None if np.isnan(J.residual) else float(J.residual),
    }


def orientation_from_json(data: dict, space: DerivationSpace) -> Orientation:
    """Rebuild an orientation; its basis_hash must match ``space``.

    Raises:
        InputError: missing fields or coefficients bound to another basis.
    """
    try:
        coeffs = np.array(data["coeffs"], dtype=float).reshape(space.dim, -1)
        base_point = np.array(data["base_point"], dtype=float)
        digest = data["basis_hash"]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"Malformed orientation record: {e}") from e
    if digest != space.basis_hash:
        raise InputError(ERROR_MESSAGES["BASIS_MISMATCH"].format(expected=space.basis_hash[:12],
                                                                 got=str(digest)[:12]))
    residual = data.get("residual")
    return Orientation(coeffs, space.basis, base_point,
                       float("nan") if residual is None else float(residual))
