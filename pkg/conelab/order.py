"""Order structure of the cone of squares.

Order-unit seminorms, positivity verdicts, properness and normality
estimates, and separation of the cone by sampled states.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from config.constants import BOUNDARY, ERROR_MESSAGES, INTERIOR, OUTSIDE
from config.settings import (
    BOUNDARY_REL_TOL, DEFAULT_SAMPLES, DEFAULT_SEED, NORMALITY_BISECTION_STEPS,
    NORMALITY_DIRECTIONS, NORMALITY_PAIRS,
)
from conelab import jalg
from conelab.errors import PreconditionError
from conelab.jalg import AlgebraSpec
from utils.helpers import make_rng, random_elements

logger = logging.getLogger(__name__)


@dataclass
class StateFunctional:
    """A state f(x) = tau(x, coords), normalised so that f(e) = 1."""

    coords: np.ndarray

    def __call__(self, A: AlgebraSpec, x) -> float:
        return jalg.inner(A, self.coords, x)


@dataclass
class ProperReport:
    proper: bool
    kernel: np.ndarray


@dataclass
class NormalityReport:
    gamma: float
    gamma_order_unit: float
    r: float
    # c_low * |x| <= |x|_e <= c_high * |x| over the sampled points
    c_low: float
    c_high: float


@dataclass
class OrderReport:
    seminorm_kernel_dim: int
    normality_gamma: float
    inner_radius_r: float
    state_sample_size: int
    agreements: float = 1.0
    max_residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kernel_dim": self.seminorm_kernel_dim,
            "gamma": self.normality_gamma,
            "r": self.inner_radius_r,
            "state_sample_size": self.state_sample_size,
            "agreements": self.agreements,
            "max_residuals": dict(self.max_residuals),
        }


def _min_spectral(A: AlgebraSpec, x) -> tuple[float, float]:
    values = jalg.spectral_values(A, x)
    return float(values[0]), float(np.max(np.abs(values)))


def require_interior(A: AlgebraSpec, p, what: str = "point") -> None:
    """Raise PreconditionError unless p has strictly positive spectrum."""
    low, top = _min_spectral(A, p)
    if low <= BOUNDARY_REL_TOL * (1.0 + top):
        raise PreconditionError(ERROR_MESSAGES["NOT_INTERIOR"].format(what=what, value=low),
                                value=low)


def order_unit_seminorm(A: AlgebraSpec, base, x) -> float:
    """inf{lam : lam * base +- x >= 0}.

    Computed as the spectral radius of U_{base^{-1/2}} x; for base = e this
    is max |lambda_i(x)|.
    """
    x = jalg.as_element(A, x)
    base = jalg.as_element(A, base)
    if np.allclose(base, A.identity, rtol=0.0, atol=1e-15):
        return float(np.max(np.abs(jalg.spectral_values(A, x))))
    require_interior(A, base, "base")
    y = jalg.quad_rep(A, jalg.real_power(A, base, -0.5)) @ x
    return float(np.max(np.abs(jalg.spectral_values(A, y))))


def positivity(A: AlgebraSpec, x) -> str:
    """Interior, Boundary or Outside with tolerance 1e-9 (1 + |x|_e)."""
    values, _ = jalg.spectral(A, x)
    tol = BOUNDARY_REL_TOL * (1.0 + float(np.max(np.abs(values))))
    low = float(values[0])
    if low > tol:
        return INTERIOR
    if abs(low) <= tol:
        return BOUNDARY
    return OUTSIDE


def properness_check(A: AlgebraSpec, tol: float = 1e-10) -> ProperReport:
    """Kernel of the order-unit seminorm.

    Candidates come from the radical of the canonical form tr(L_{x o y});
    each candidate and each basis vector is then probed for an all-zero
    spectrum.
    """
    traces = np.einsum("mkm->k", A.structure)
    form = np.einsum("kij,k->ij", A.structure, traces)
    eigs, vecs = np.linalg.eigh(0.5 * (form + form.T))
    top = max(float(np.max(np.abs(eigs))), 1.0)
    candidates = list(vecs[:, np.abs(eigs) <= tol * top].T) + list(np.eye(A.dim))
    kernel = []
    for v in candidates:
        v = v / np.linalg.norm(v)
        if float(np.max(np.abs(jalg.spectral_values(A, v)))) <= 1e-8:
            kernel.append(v)
    basis = np.zeros((0, A.dim))
    if kernel:
        u, s, _ = np.linalg.svd(np.array(kernel).T, full_matrices=False)
        basis = u[:, s > 1e-8 * s[0]].T
    proper = basis.shape[0] == 0
    if not proper:
        logger.warning(f"{A.name}: seminorm kernel has dimension {basis.shape[0]}")
    return ProperReport(proper, basis)


def _require_proper(A: AlgebraSpec) -> None:
    report = properness_check(A)
    if not report.proper:
        raise PreconditionError(ERROR_MESSAGES["IMPROPER_CONE"].format(dim=report.kernel.shape[0]))


def _interior_radius(A: AlgebraSpec, v: np.ndarray, steps: int) -> float:
    """Largest t with e - t v interior, by bisection."""
    e = A.identity
    hi = 1.0
    while _min_spectral(A, e - hi * v)[0] > 0.0:
        hi *= 2.0
        if hi > 1e8:
            return hi
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if _min_spectral(A, e - mid * v)[0] > 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _unit_interval_element(A: AlgebraSpec, z) -> np.ndarray:
    """Element with spectrum in (0, 1), so 0 <= w <= e."""
    return jalg.functional_calculus(A, z, lambda v: 1.0 / (1.0 + np.exp(-3.0 * v)))


def normality_estimate(A: AlgebraSpec, seed: int = DEFAULT_SEED,
                       directions: int = NORMALITY_DIRECTIONS,
                       steps: int = NORMALITY_BISECTION_STEPS,
                       pairs: int = NORMALITY_PAIRS) -> NormalityReport:
    """Sampled inner radius r and normality constant gamma.

    gamma is the largest ratio |x| / |y| over sampled 0 <= x <= y, reported
    for the trace-form norm and for the order-unit norm. Pairs are built as
    x = U_{y^1/2} w with 0 <= w <= e; w = e is always included.
    """
    rng = make_rng(seed)
    units = random_elements(A, directions, rng)
    r = min(_interior_radius(A, v, steps) for v in units)

    ratios = []
    seminorm_ratios = []
    for v in units:
        ratios.append(order_unit_seminorm(A, A.identity, v))
    c_high = max(ratios)
    c_low = min(ratios)

    gamma = gamma_ou = 0.0
    ys = random_elements(A, pairs, rng)
    zs = random_elements(A, pairs, rng, unit=False)
    for i, (a, z) in enumerate(zip(ys, zs)):
        y = jalg.exp(A, a)
        w = A.identity if i == 0 else _unit_interval_element(A, z)
        x = jalg.quad_rep(A, jalg.sqrt(A, y)) @ w
        gamma = max(gamma, jalg.trace_norm(A, x) / jalg.trace_norm(A, y))
        seminorm_ratios.append(order_unit_seminorm(A, A.identity, x)
                               / order_unit_seminorm(A, A.identity, y))
    gamma_ou = max(seminorm_ratios)
    logger.info(f"{A.name}: inner radius r={r:.6g}, gamma={gamma:.6g}")
    return NormalityReport(gamma=gamma, gamma_order_unit=gamma_ou, r=r, c_low=c_low, c_high=c_high)


def order_unit_equivalence(A: AlgebraSpec, p, q) -> tuple[float, float]:
    """Constants (c, C) with c |x|_q <= |x|_p <= C |x|_q."""
    big = order_unit_seminorm(A, p, q)
    small = 1.0 / order_unit_seminorm(A, q, p)
    return small, big


def state_from(A: AlgebraSpec, q) -> StateFunctional:
    """f_q(x) = tau(x, q^2) / tau(e, q^2)."""
    q2 = jalg.product(A, q, q)
    return StateFunctional(q2 / jalg.inner(A, A.identity, q2))


def sample_states(A: AlgebraSpec, count: int, rng: np.random.Generator) -> list[StateFunctional]:
    return [state_from(A, q) for q in random_elements(A, count, rng)]


def min_state_value(A: AlgebraSpec, x, sample_count: int = DEFAULT_SAMPLES,
                    seed: int = DEFAULT_SEED, own_frame: bool = True) -> float:
    """Smallest f(x) over sampled states, plus the states of x's own idempotents."""
    _require_proper(A)
    x = jalg.as_element(A, x)
    states = sample_states(A, sample_count, make_rng(seed))
    if own_frame:
        _, frame = jalg.spectral(A, x)
        states.extend(StateFunctional(f / jalg.inner(A, A.identity, f)) for f in frame)
    return min(state(A, x) for state in states)


def state_separation(A: AlgebraSpec, x, sample_count: int = DEFAULT_SAMPLES,
                     seed: int = DEFAULT_SEED, own_frame: bool = True) -> bool:
    """True iff every sampled state is strictly positive on x.

    With ``own_frame`` the states f_i / tau(e, f_i) of x's spectral
    idempotents are included; they evaluate to the spectral values of x, so
    the verdict then matches ``positivity`` by construction. Pass
    ``own_frame=False`` to test the random states alone, which can only
    miss a negative direction, never invent one.

    Raises:
        PreconditionError: the cone is not proper.
    """
    top = float(np.max(np.abs(jalg.spectral_values(A, x))))
    return min_state_value(A, x, sample_count, seed, own_frame) > BOUNDARY_REL_TOL * (1.0 + top)


def order_report(A: AlgebraSpec, sample_count: int = DEFAULT_SAMPLES,
                 seed: int = DEFAULT_SEED) -> OrderReport:
    """Properness, normality constants and state/positivity agreement."""
    proper = properness_check(A)
    if not proper.proper:
        return OrderReport(proper.kernel.shape[0], float("nan"), float("nan"), 0, 0.0, {})
    normality = normality_estimate(A, seed=seed)
    rng = make_rng(seed + 1)
    e = A.identity
    triangle = square = bound = 0.0
    agree = 0
    points = random_elements(A, sample_count, rng)
    shifts = rng.uniform(-1.0, 1.0, sample_count)
    for x, y, s in zip(points, np.roll(points, 1, axis=0), shifts):
        nx = order_unit_seminorm(A, e, x)
        ny = order_unit_seminorm(A, e, y)
        triangle = max(triangle, order_unit_seminorm(A, e, x + y) - nx - ny)
        square = max(square, abs(order_unit_seminorm(A, e, jalg.product(A, x, x)) - nx * nx))
        bound = max(bound, nx - (2.0 / normality.r) * jalg.trace_norm(A, x))
        shifted = x + s * e
        verdict = positivity(A, shifted) == INTERIOR
        agree += verdict == state_separation(A, shifted, sample_count=20, seed=seed)
    report = OrderReport(
        seminorm_kernel_dim=0,
        normality_gamma=normality.gamma,
        inner_radius_r=normality.r,
        state_sample_size=sample_count,
        agreements=agree / sample_count,
        max_residuals={
            "triangle": max(triangle, 0.0),
            "square_norm": square,
            "radius_bound": max(bound, 0.0),
        },
    )
    logger.info(f"{A.name}: order report agreements={report.agreements:.3f}")
    return report
