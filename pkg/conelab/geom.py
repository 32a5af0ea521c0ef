"""Symmetric-cone geometry.

Symmetries s_p = U_p o inverse, the invariant tangent norm, the
exponential chart, the Cartan split of linear vector fields and recovery
of the Jordan product from a cone oracle.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from config.constants import ERROR_MESSAGES, INTERIOR
from config.settings import (
    DEFAULT_SAMPLES, DEFAULT_SEED, FD_STEP_BOUNDS, FINITE_DIFFERENCE_STEP,
    GEOMETRY_TOL, ORACLE_INVOLUTION_TOL, ORIENTATION_TOL,
)
from conelab import jalg, order
from conelab.errors import InputError, SingularMapError, UnreliableOracleError
from conelab.jalg import AlgebraSpec
from utils.helpers import make_rng, random_elements, random_interior

logger = logging.getLogger(__name__)


@dataclass
class ConeOracle:
    """Black-box access to a symmetric cone: membership, symmetries and chart."""

    dim: int
    membership: Callable[[np.ndarray], str]
    symmetry: Callable[[np.ndarray, np.ndarray], np.ndarray]
    exp_chart: Callable[[np.ndarray], np.ndarray]
    base_point: np.ndarray


@dataclass
class CartanSplit:
    k_basis: np.ndarray
    p_basis: np.ndarray
    theta: Callable[[np.ndarray], np.ndarray]
    residuals: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= ORIENTATION_TOL for v in self.residuals.values())


@dataclass
class GeometryReport:
    """Residuals of a sampled geometric check; ``passed`` compares them to ``tol``."""

    name: str
    residuals: dict
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {"check": self.name, "residuals": dict(self.residuals), "tol": self.tol,
                "details": dict(self.details), "passed": self.passed}


# ── Symmetries and norms ─────────────────────────────────────────────────────

def symmetry_at(A: AlgebraSpec, p, x) -> np.ndarray:
    """s_p(x) = U_p(x^-1); s_e is Jordan inversion."""
    order.require_interior(A, p, "p")
    order.require_interior(A, x, "x")
    return jalg.quad_rep(A, p) @ jalg.inverse(A, x)


def tangent_norm(A: AlgebraSpec, p, v) -> float:
    """nu(p, v) = |v|_p."""
    return order.order_unit_seminorm(A, p, v)


def exp_chart(A: AlgebraSpec, a) -> np.ndarray:
    """exp(L_a)(e) by scaling-and-squaring."""
    return expm(jalg.l_operator(A, a)) @ A.identity


def _derivative(f: Callable[[float], np.ndarray], h: float, richardson: bool = False) -> np.ndarray:
    """Central difference of f at 0, optionally Richardson-extrapolated."""
    d_h = (f(h) - f(-h)) / (2.0 * h)
    if not richardson:
        return d_h
    d_half = (f(h / 2.0) - f(-h / 2.0)) / h
    return (4.0 * d_half - d_h) / 3.0


def symmetry_isometry_check(A: AlgebraSpec, samples: int = 20, seed: int = DEFAULT_SEED,
                            h: float = FINITE_DIFFERENCE_STEP) -> GeometryReport:
    """Involution, fixed point, ds_p(p) = -I and nu-isometry of s_p on samples."""
    rng = make_rng(seed)
    ps = random_interior(A, samples, rng, spread=0.5)
    xs = random_interior(A, samples, rng, spread=0.5)
    vs = random_elements(A, samples, rng)
    involution = fixed = derivative = isometry = 0.0
    for p, x, v in zip(ps, xs, vs):
        sx = symmetry_at(A, p, x)
        involution = max(involution, jalg.trace_norm(A, symmetry_at(A, p, sx) - x))
        fixed = max(fixed, jalg.trace_norm(A, symmetry_at(A, p, p) - p))
        at_p = _derivative(lambda t: symmetry_at(A, p, p + t * v), h, richardson=True)
        derivative = max(derivative, jalg.trace_norm(A, at_p + v))
        at_x = _derivative(lambda t: symmetry_at(A, p, x + t * v), h, richardson=True)
        nu = tangent_norm(A, x, v)
        isometry = max(isometry, abs(tangent_norm(A, sx, at_x) - nu) / max(nu, 1.0))
    return GeometryReport("symmetry_isometry", {
        "involution": involution,
        "fixed_point": fixed,
        "derivative_at_p": derivative,
        "isometry": isometry,
    }, tol=GEOMETRY_TOL)


def chart_compatibility(A: AlgebraSpec, p, samples: int = DEFAULT_SAMPLES,
                        seed: int = DEFAULT_SEED) -> tuple[float, float]:
    """Constants (r, R) with r |v| <= nu(p, v) <= R |v| for the identity chart."""
    order.require_interior(A, p, "p")
    ratios = [tangent_norm(A, p, v) for v in random_elements(A, samples, make_rng(seed))]
    return min(ratios), max(ratios)


def g_invariance_check(A: AlgebraSpec, g, samples: int = DEFAULT_SAMPLES,
                       seed: int = DEFAULT_SEED) -> GeometryReport:
    """Check g(Omega) in Omega and nu(g p, g v) = nu(p, v) on samples.

    Raises:
        SingularMapError: g is (numerically) singular.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (A.dim, A.dim):
        raise InputError(f"Map must be {A.dim}x{A.dim}, got {g.shape}")
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1.0):
        raise SingularMapError(value=float(s[-1]))
    rng = make_rng(seed)
    ps = random_interior(A, samples, rng, spread=0.5)
    vs = random_elements(A, samples, rng)
    outside = 0
    isometry = 0.0
    for p, v in zip(ps, vs):
        gp = g @ p
        if order.positivity(A, gp) != INTERIOR:
            outside += 1
            continue
        nu = tangent_norm(A, p, v)
        isometry = max(isometry, abs(tangent_norm(A, gp, g @ v) - nu) / max(nu, 1.0))
    return GeometryReport("g_invariance", {"isometry": isometry, "cone_escapes": float(outside)},
                          tol=1e-8, details={"samples": samples})


def transitive_map(A: AlgebraSpec, u, p) -> np.ndarray:
    """g = U_{p^1/2} U_{u^-1/2}, an element of G(Omega) with g(u) = p."""
    order.require_interior(A, u, "u")
    order.require_interior(A, p, "p")
    g = jalg.quad_rep(A, jalg.sqrt(A, p)) @ jalg.quad_rep(A, jalg.real_power(A, u, -0.5))
    miss = jalg.trace_norm(A, g @ jalg.as_element(A, u) - p)
    if miss > 1e-9 * (1.0 + jalg.trace_norm(A, p)):
        logger.warning(f"transitive_map: |g(u) - p| = {miss:.3e}")
    return g


# ── Lie algebra of the cone ──────────────────────────────────────────────────

def cartan_involution(A: AlgebraSpec) -> Callable[[np.ndarray], np.ndarray]:
    """theta(X) = -X^#, the trace-form adjoint with a sign."""
    gram = A.trace_form
    gram_inv = np.linalg.inv(gram)
    return lambda X: -gram_inv @ np.asarray(X).T @ gram


def _span_residual(basis: np.ndarray, target: np.ndarray) -> float:
    """Distance from ``target`` to span(basis), relative to max(|target|, 1)."""
    norm = float(np.linalg.norm(target))
    if norm == 0.0:
        return 0.0
    if basis.shape[0] == 0:
        return norm / max(norm, 1.0)
    flat = basis.reshape(basis.shape[0], -1).T
    coeffs, *_ = np.linalg.lstsq(flat, target.reshape(-1), rcond=None)
    return float(np.linalg.norm(flat @ coeffs - target.reshape(-1))) / max(norm, 1.0)


def lie_algebra_linear(A: AlgebraSpec, seed: int = DEFAULT_SEED) -> tuple[np.ndarray, CartanSplit]:
    """Basis of span{L_a} + aut V and its Cartan split.

    Checks that derivations are theta-fixed, multiplication operators are
    theta-negated, theta^2 = id, [p, p] lands in k, k and p meet only in 0,
    and that theta matches conjugation by s_e on the group:
    s_e(exp(tX)(s_e x)) = exp(t theta X)(x).
    """
    from conelab.orient import derivation_space

    n = A.dim
    p_basis = np.array([jalg.l_operator(A, b) for b in np.eye(n)])
    k_basis = derivation_space(A).basis
    theta = cartan_involution(A)

    fixed = max((float(np.linalg.norm(theta(D) - D)) for D in k_basis), default=0.0)
    negated = max(float(np.linalg.norm(theta(X) + X)) for X in p_basis)
    full = np.concatenate([k_basis, p_basis]) if k_basis.size else p_basis
    grading = max(float(np.linalg.norm(theta(theta(X)) - X)) for X in full)
    bracket = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            comm = p_basis[i] @ p_basis[j] - p_basis[j] @ p_basis[i]
            bracket = max(bracket, _span_residual(k_basis, comm))
    flat = full.reshape(full.shape[0], -1)
    rank = np.linalg.matrix_rank(flat, tol=1e-8 * max(1.0, float(np.linalg.norm(flat))))
    overlap = float(full.shape[0] - rank)

    rng = make_rng(seed)
    group = 0.0
    t = 0.3
    for x, c in zip(random_interior(A, 5, rng, spread=0.3), rng.standard_normal((5, full.shape[0]))):
        X = np.tensordot(c / np.linalg.norm(c), full, axes=1)
        lhs = jalg.inverse(A, expm(t * X) @ jalg.inverse(A, x))
        rhs = expm(t * theta(X)) @ x
        group = max(group, jalg.trace_norm(A, lhs - rhs))

    split = CartanSplit(k_basis=k_basis, p_basis=p_basis, theta=theta, residuals={
        "k_fixed": fixed,
        "p_negated": negated,
        "theta_squared": grading,
        "p_bracket_in_k": bracket,
        "k_p_overlap": overlap,
        "group_conjugation": group,
    })
    logger.info(f"{A.name}: dim k = {k_basis.shape[0]}, dim p = {n}")
    return full, split


def evaluation_bijection_check(A: AlgebraSpec, split: CartanSplit) -> GeometryReport:
    """X -> X(e) on p must be a bijection onto V with L(a)(e) = a."""
    n = A.dim
    evaluation = np.array([X @ A.identity for X in split.p_basis]).T
    if evaluation.shape != (n, n):
        return GeometryReport("evaluation_bijection", {"shape": float("inf")}, tol=1e-10,
                              details={"shape": list(evaluation.shape)})
    s = np.linalg.svd(evaluation, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        logger.error(f"{A.name}: evaluation map X -> X(e) is singular")
        return GeometryReport("evaluation_bijection", {"singular": 1.0}, tol=1e-10,
                              details={"condition_number": float("inf")})
    recon = 0.0
    for a in np.eye(n):
        coeffs = np.linalg.solve(evaluation, a)
        L_a = np.tensordot(coeffs, split.p_basis, axes=1)
        recon = max(recon, float(np.linalg.norm(L_a @ A.identity - a)),
                    float(np.linalg.norm(L_a - jalg.l_operator(A, a))))
    return GeometryReport("evaluation_bijection", {"reconstruction": recon}, tol=1e-10,
                          details={"condition_number": float(s[0] / s[-1])})


# ── Oracles and product recovery ─────────────────────────────────────────────

def cone_oracle(A: AlgebraSpec) -> ConeOracle:
    """ConeOracle backed by an algebra."""
    return ConeOracle(
        dim=A.dim,
        membership=lambda x: order.positivity(A, x),
        symmetry=lambda p, x: symmetry_at(A, p, x),
        exp_chart=lambda a: exp_chart(A, a),
        base_point=A.identity.copy(),
    )


def oracle_involution_residual(oracle: ConeOracle, x) -> float:
    e = oracle.base_point
    x = np.asarray(x, dtype=float)
    back = oracle.symmetry(e, oracle.symmetry(e, x))
    return float(np.linalg.norm(back - x)) / (1.0 + float(np.linalg.norm(x)))


def recover_product(oracle: ConeOracle, a, b, h: float = FINITE_DIFFERENCE_STEP,
                    richardson: bool = False) -> np.ndarray:
    """Jordan product a o b read off the cone's symmetries.

    Differentiates t -> s_{gamma(t/2)}(s_e(b)) at t = 0 with
    gamma(t) = exp_chart(t a). The map equals U_{exp(t a / 2)} b, whose
    derivative at 0 is L_a b.

    Raises:
        InputError: h outside the supported step range, or b not interior.
        UnreliableOracleError: s_e fails to be an involution at b.
    """
    lo, hi = FD_STEP_BOUNDS
    if not (lo < h < hi):
        raise InputError(ERROR_MESSAGES["BAD_PARAMETER"].format(
            name="recover_product", detail=f"step {h} outside ({lo}, {hi})"))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.shape != (oracle.dim,) or a.shape != (oracle.dim,):
        raise InputError(f"Vectors must have length {oracle.dim}")
    e = oracle.base_point
    # shift b into the cone; the product is linear in b
    shift = 1.0 + 2.0 * float(np.linalg.norm(b))
    while oracle.membership(b + shift * e) != INTERIOR:
        shift *= 2.0
    b_in = b + shift * e
    residual = oracle_involution_residual(oracle, b_in)
    if residual > ORACLE_INVOLUTION_TOL:
        raise UnreliableOracleError(residual=residual, tol=ORACLE_INVOLUTION_TOL)
    s_b = oracle.symmetry(e, b_in)

    def path(t: float) -> np.ndarray:
        return oracle.symmetry(oracle.exp_chart(0.5 * t * a), s_b)

    shifted = _derivative(path, h, richardson=richardson)
    return shifted - shift * a


def recovered_structure(oracle: ConeOracle, h: float = FINITE_DIFFERENCE_STEP,
                        richardson: bool = False) -> np.ndarray:
    """Structure tensor c[k, i, j] rebuilt from the oracle on basis pairs."""
    n = oracle.dim
    basis = np.eye(n)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            c[:, i, j] = recover_product(oracle, basis[i], basis[j], h=h, richardson=richardson)
    return c
