"""C*-algebras rebuilt from a Jordan algebra and an orientation.

The complexification V + iV carries the product

    a b = a o b - i J(a) b          (a, b in V)

extended complex-bilinearly. Elements are real vectors (x, y) of length
2 dim V standing for x + i y.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from config.constants import BOUNDARY, ERROR_MESSAGES, INTERIOR
from config.settings import (
    ASSOCIATIVITY_TOL, COMPATIBILITY_TOL, CSTAR_IDENTITY_TOL, DEFAULT_SAMPLES,
    DEFAULT_SEED, ORIENTATION_TOL, REVERSIBILITY_TOL, SPAN_RANK_TOL,
)
from conelab import catalog, jalg, order
from conelab.errors import PreconditionError, StructuralError
from conelab.jalg import AlgebraSpec
from conelab.orient import Orientation, canonical_orientation, verify_orientation, zero_orientation
from utils.helpers import make_rng, random_elements, random_interior

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ComplexAlgebra:
    """Real form of the complexification: product tensor on 2n coordinates."""

    base: AlgebraSpec
    orientation: Orientation
    structure: np.ndarray
    gram: np.ndarray

    @property
    def n(self) -> int:
        return self.base.dim

    @property
    def dim(self) -> int:
        return 2 * self.base.dim

    @property
    def identity(self) -> np.ndarray:
        return np.concatenate([self.base.identity, np.zeros(self.n)])

    def embed(self, x) -> np.ndarray:
        """x in V as the hermitian element (x, 0)."""
        return np.concatenate([jalg.as_element(self.base, x), np.zeros(self.n)])

    def mul(self, z, w) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.structure, z, w)

    def star(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.concatenate([z[: self.n], -z[self.n:]])

    def left(self, z) -> np.ndarray:
        """Left-regular operator lambda(z)."""
        return np.einsum("kij,i->kj", self.structure, z)

    def norm(self, z) -> float:
        """C*-norm: operator norm of lambda(z) for the inner product ``gram``."""
        r = self._chol
        return float(np.linalg.norm(r @ self.left(z) @ np.linalg.inv(r), 2))

    def vector_norm(self, z) -> float:
        return float(np.sqrt(z @ self.gram @ z))

    @property
    def _chol(self) -> np.ndarray:
        return np.kron(np.eye(2), self.base._chol)


@dataclass
class CheckReport:
    """Named residuals compared against one tolerance, plus free-form details."""

    name: str
    residuals: dict
    tol: float
    details: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and all(v <= self.tol for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {"check": self.name, "residuals": dict(self.residuals), "tol": self.tol,
                "details": dict(self.details), "violations": list(self.violations),
                "passed": self.passed}


@dataclass(eq=False)
class ExtensionSpec:
    """An oriented ambient algebra with an involutive isometry phi.

    The base algebra V is the fixed subspace of phi, given by ``fixed_basis``
    rows in ambient coordinates (computed as ker(phi - I) when omitted).
    """

    name: str
    ambient: AlgebraSpec
    phi: np.ndarray
    orientation: Orientation
    fixed_basis: np.ndarray | None = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.fixed_basis is None:
            self.fixed_basis = null_space(self.phi - np.eye(self.ambient.dim), rcond=1e-10).T
        self.fixed_basis = np.atleast_2d(np.asarray(self.fixed_basis, dtype=float))

    @property
    def base(self) -> AlgebraSpec:
        return jalg.subalgebra(self.ambient, self.fixed_basis, name=f"fixed({self.name})")


# ── Complexification ─────────────────────────────────────────────────────────

def complexify(A: AlgebraSpec, J: Orientation, verify: bool = True) -> ComplexAlgebra:
    """Build the product tensor of V + iV from (A, J).

    For z = x + iy and w = u + iv:
        Re(zw) = x o u - y o v + J(x) v + J(y) u
        Im(zw) = x o v + y o u - J(x) u + J(y) v

    Raises:
        PreconditionError: ``verify`` is set and J fails verify_orientation.
    """
    if verify:
        report = verify_orientation(A, J, tol=ORIENTATION_TOL)
        if not report.passed:
            raise PreconditionError(ERROR_MESSAGES["ORIENTATION_FAILED"].format(
                residual=report.max_residual))
    n = A.dim
    c = A.structure
    k = J.operators().transpose(1, 0, 2)  # k[m, i, j] = (J(e_i) e_j)_m
    s = np.zeros((2 * n, 2 * n, 2 * n))
    s[:n, :n, :n] = c
    s[:n, :n, n:] = k
    s[:n, n:, :n] = k
    s[:n, n:, n:] = -c
    s[n:, :n, :n] = -k
    s[n:, :n, n:] = c
    s[n:, n:, :n] = c
    s[n:, n:, n:] = k
    gram = np.kron(np.eye(2), A.trace_form)
    return ComplexAlgebra(base=A, orientation=J, structure=s, gram=gram)


def associativity_residual(C: ComplexAlgebra) -> float:
    """max over basis triples of |(xy)z - x(yz)| in the trace-form norm."""
    s = C.structure
    left = np.einsum("mij,pmk->ijkp", s, s)
    right = np.einsum("mjk,pim->ijkp", s, s)
    diff = (left - right).reshape(-1, C.dim)
    return float(np.sqrt(np.max(np.einsum("ap,pq,aq->a", diff, C.gram, diff))))


def hermitian_jordan_tensor(C: ComplexAlgebra) -> np.ndarray:
    """Structure tensor of (ab + ba) / 2 on the hermitian part V x {0}."""
    n = C.n
    s = C.structure[:n, :n, :n]
    return 0.5 * (s + s.transpose(0, 2, 1))


def recover_orientation(C: ComplexAlgebra) -> np.ndarray:
    """Stack of J(e_i) read off the product as (i/2)(ab - ba), shape (n, n, n)."""
    n = C.n
    imag = C.structure[n:, :n, :n]
    # (i/2)(ab - ba) has real part -(1/2) Im(ab - ba)
    k = -0.5 * (imag - imag.transpose(0, 2, 1))
    return k.transpose(1, 0, 2)


def _faithful(C: ComplexAlgebra) -> None:
    rep = C.structure.transpose(1, 0, 2).reshape(C.dim, -1)
    s = np.linalg.svd(rep, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise StructuralError("Left-regular representation is not faithful "
                              f"(smallest singular value {s[-1]:.3e})")


def cstar_identity_check(C: ComplexAlgebra, samples: int = DEFAULT_SAMPLES,
                         seed: int = DEFAULT_SEED) -> CheckReport:
    """C*-identity, *-isometry and positivity of z*z in the left-regular representation.

    Raises:
        PreconditionError: the product is not associative to 1e-8.
        StructuralError: the representation has a kernel.
    """
    assoc = associativity_residual(C)
    if assoc > 1e-8:
        raise PreconditionError(f"Product is not associative (residual {assoc:.3e})")
    _faithful(C)
    rng = make_rng(seed)
    zs = rng.standard_normal((samples, C.dim))
    gram_inv = np.linalg.inv(C.gram)
    identity = star_iso = adjoint = positive = 0.0
    for z in zs:
        z = z / C.vector_norm(z)
        zs_ = C.star(z)
        lam, lam_star = C.left(z), C.left(zs_)
        norm = C.norm(z)
        identity = max(identity, abs(C.norm(C.mul(zs_, z)) - norm ** 2) / norm ** 2)
        star_iso = max(star_iso, abs(C.norm(zs_) - norm) / norm)
        adjoint = max(adjoint, float(np.linalg.norm(lam_star - gram_inv @ lam.T @ C.gram)))
        square = C.mul(zs_, z)
        values = jalg.spectral_values(C.base, square[: C.n])
        positive = max(positive, -float(values[0]) - 1e-9 * (1.0 + float(np.max(np.abs(values)))))
    report = CheckReport("cstar_identity", {
        "cstar_identity": identity,
        "star_isometry": star_iso,
        "adjoint": adjoint,
        "positivity": max(positive, 0.0),
    }, tol=CSTAR_IDENTITY_TOL, details={"associativity": assoc, "samples": samples})
    logger.info(f"{C.base.name}: C*-identity check {'pass' if report.passed else 'fail'}")
    return report


def jb_star_check(C: ComplexAlgebra, samples: int = DEFAULT_SAMPLES,
                  seed: int = DEFAULT_SEED) -> CheckReport:
    """JB*-axioms of the complexification under the C*-norm."""
    def jordan(a, b):
        return 0.5 * (C.mul(a, b) + C.mul(b, a))

    rng = make_rng(seed)
    star = triple = submult = 0.0
    for a, b in zip(rng.standard_normal((samples, C.dim)), rng.standard_normal((samples, C.dim))):
        a = a / C.vector_norm(a)
        b = b / C.vector_norm(b)
        na, nb = C.norm(a), C.norm(b)
        star = max(star, abs(C.norm(C.star(a)) - na) / na)
        t = 2.0 * jordan(a, jordan(a, C.star(a))) - jordan(jordan(a, a), C.star(a))
        triple = max(triple, abs(C.norm(t) - na ** 3) / na ** 3)
        submult = max(submult, (C.norm(jordan(a, b)) - na * nb) / (na * nb))
    return CheckReport("jb_star", {
        "star_isometry": star,
        "triple_norm": triple,
        "submultiplicativity": max(submult, 0.0),
    }, tol=CSTAR_IDENTITY_TOL)


def positive_cone_roundtrip(C: ComplexAlgebra, samples: int = DEFAULT_SAMPLES,
                            seed: int = DEFAULT_SEED) -> CheckReport:
    """z*z lands in the closed cone and interior points factor as (x^1/2)*(x^1/2)."""
    if not cstar_identity_check(C, samples=min(samples, 20), seed=seed).passed:
        raise PreconditionError("C*-identity check failed; positive cone round trip skipped")
    A = C.base
    rng = make_rng(seed)
    agree = 0
    imag = factor = 0.0
    for z in rng.standard_normal((samples, C.dim)):
        square = C.mul(C.star(z), z)
        imag = max(imag, float(np.linalg.norm(square[C.n:])) / max(1.0, C.vector_norm(square)))
        agree += order.positivity(A, square[: C.n]) in (INTERIOR, BOUNDARY)
    for x in random_interior(A, samples, rng):
        root = C.embed(jalg.sqrt(A, x))
        back = C.mul(C.star(root), root)
        factor = max(factor, C.vector_norm(back - C.embed(x)) / max(1.0, jalg.trace_norm(A, x)))
        agree += order.positivity(A, back[: C.n]) == INTERIOR
    rate = agree / (2 * samples)
    violations = [] if rate == 1.0 else [f"agreement rate {rate:.4f} below 1"]
    return CheckReport("positive_cone_roundtrip", {"imaginary_part": imag, "factorisation": factor},
                       tol=1e-9, details={"agreement_rate": rate}, violations=violations)


# ── Extensions and real reconstruction ───────────────────────────────────────

def _matrix_map_coords(M: np.ndarray, images: np.ndarray) -> np.ndarray:
    """Coordinates (columns) of matrix images over the orthonormal basis M."""
    return np.einsum("kab,jab->kj", M.conj(), images).real


def transpose_extension(n: int) -> ExtensionSpec:
    """sym_real(n) as the transpose-fixed part of herm_complex(n)."""
    ambient = catalog.herm_complex(n)
    m = n * (n + 1) // 2
    phi = np.diag(np.concatenate([np.ones(m), -np.ones(n * n - m)]))
    return ExtensionSpec(f"transpose({n})", ambient, phi, canonical_orientation(ambient),
                         fixed_basis=np.eye(n * n)[:m])


def quaternionic_extension(n: int) -> ExtensionSpec:
    """herm_quat(n) inside herm_complex(2n), fixed by x -> Q conj(x) Q^-1."""
    ambient = catalog.herm_complex(2 * n)
    M = ambient.matrix_basis
    Q = catalog.symplectic_form(n)
    images = np.einsum("ab,jbc,cd->jad", Q, M.conj(), np.linalg.inv(Q))
    phi = _matrix_map_coords(M, images)
    return ExtensionSpec(f"quaternionic({n})", ambient, phi, canonical_orientation(ambient))


def trivial_extension(A: AlgebraSpec, J: Orientation | None = None) -> ExtensionSpec:
    """phi = identity; only compatible when J vanishes (e.g. abelian A with J = 0)."""
    return ExtensionSpec(f"trivial({A.name})", A, np.eye(A.dim), J or zero_orientation(A),
                         fixed_basis=np.eye(A.dim))


def extension_verify(E: ExtensionSpec, samples: int = DEFAULT_SAMPLES,
                     seed: int = DEFAULT_SEED) -> CheckReport:
    """Invariants of E plus subalgebra, membership, compatibility and state restriction."""
    Vt = E.ambient
    phi = E.phi
    n = Vt.dim
    e = Vt.identity
    rng = make_rng(seed)
    violations = []

    involution = float(np.max(np.abs(phi @ phi - np.eye(n))))
    unit = jalg.trace_norm(Vt, phi @ e - e)
    isometry = 0.0
    for x in random_elements(Vt, samples // 4 or 1, rng):
        nx = order.order_unit_seminorm(Vt, e, x)
        isometry = max(isometry, abs(order.order_unit_seminorm(Vt, e, phi @ x) - nx))
    fixed_miss = float(np.max(np.abs(E.fixed_basis @ phi.T - E.fixed_basis)))
    if involution > 1e-12 * n:
        violations.append("phi is not an involution")

    # (1) phi is a Jordan automorphism, so its fixed set is a subalgebra
    basis = np.eye(n)
    automorphism = 0.0
    for i in range(n):
        for j in range(i, n):
            lhs = phi @ jalg.product(Vt, basis[i], basis[j])
            automorphism = max(automorphism, float(np.linalg.norm(
                lhs - jalg.product(Vt, phi[:, i], phi[:, j]))))
    try:
        V = E.base
    except StructuralError as exc:
        violations.append(f"fixed subspace is not a Jordan subalgebra: {exc}")
        V = None

    # (2) membership in the ambient cone agrees with the intrinsic verdict
    mismatches = 0
    if V is not None:
        for c, shift in zip(rng.standard_normal((samples, V.dim)), rng.uniform(-1.5, 1.5, samples)):
            c = c / jalg.trace_norm(V, c) + shift * V.identity
            if order.positivity(Vt, c @ E.fixed_basis) != order.positivity(V, c):
                mismatches += 1
        if mismatches:
            violations.append(f"{mismatches} membership mismatches between V and its ambient")

    # (3) phi(J(a) b) = J(phi b)(phi a) on cone pairs
    J = E.orientation
    compat = 0.0
    pts = random_interior(Vt, 2 * (samples // 4 or 1), rng, spread=0.5)
    half = pts.shape[0] // 2
    for a, b in zip(pts[:half], pts[half:]):
        compat = max(compat, float(np.linalg.norm(phi @ (J.apply(a) @ b) - J.apply(phi @ b) @ (phi @ a))))
    if compat > COMPATIBILITY_TOL:
        violations.append(f"orientation compatibility fails (residual {compat:.3e})")

    # (4) states of the ambient restrict to states of V
    restriction = 0.0
    if V is not None:
        squares = [jalg.product(V, x, x) @ E.fixed_basis for x in random_elements(V, 10, rng)]
        for f in order.sample_states(Vt, samples // 4 or 1, rng):
            restriction = max(restriction, abs(f(Vt, V.identity @ E.fixed_basis) - 1.0),
                              max(-f(Vt, s) for s in squares))
    residuals = {
        "involution": involution,
        "unit_fixed": unit,
        "isometry": isometry,
        "fixed_basis": fixed_miss,
        "automorphism": automorphism,
        "compatibility": compat,
        "state_restriction": max(restriction, 0.0),
    }
    report = CheckReport("extension_verify", residuals, tol=COMPATIBILITY_TOL,
                         details={"fixed_dim": E.fixed_basis.shape[0], "ambient_dim": n},
                         violations=violations)
    if not report.passed:
        logger.warning(f"Extension {E.name} failed: {violations or residuals}")
    return report


def _orthonormal_rows(rows: np.ndarray, tol: float = SPAN_RANK_TOL) -> np.ndarray:
    if rows.shape[0] == 0:
        return rows
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    return vt[s > tol * s[0]]


def _projection_residual(basis: np.ndarray, vectors: np.ndarray) -> float:
    """Largest distance of the rows of ``vectors`` from span(orthonormal ``basis``)."""
    if vectors.size == 0:
        return 0.0
    proj = vectors @ basis.T @ basis
    return float(np.max(np.linalg.norm(vectors - proj, axis=1)))


def span_closure(C: ComplexAlgebra, generators: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the real subalgebra generated by ``generators``.

    Iterates S_{k+1} = span(S_k + S_k S_k) until the dimension stops growing.

    Raises:
        StructuralError: the span outgrows the complexification.
    """
    S = _orthonormal_rows(np.atleast_2d(generators))
    while True:
        prods = np.einsum("kij,ai,bj->abk", C.structure, S, S).reshape(-1, C.dim)
        grown = _orthonormal_rows(np.vstack([S, prods]))
        if grown.shape[0] > C.dim:
            raise StructuralError(ERROR_MESSAGES["SPAN_OVERFLOW"].format(dim=C.dim))
        if grown.shape[0] == S.shape[0]:
            return S
        logger.debug(f"span closure grew from {S.shape[0]} to {grown.shape[0]}")
        S = grown


@dataclass
class ReconstructionReport:
    input_algebra: str
    orientation_residual: float
    associativity: float
    cstar_identity: float
    hermitian_part_match: bool
    dims: dict
    residuals: dict
    tol: float = ASSOCIATIVITY_TOL

    @property
    def passed(self) -> bool:
        return (self.hermitian_part_match and self.associativity <= self.tol
                and self.cstar_identity <= CSTAR_IDENTITY_TOL
                and all(v <= self.tol for v in self.residuals.values()))

    def to_dict(self) -> dict:
        return {
            "input_algebra": self.input_algebra,
            "orientation_residual": self.orientation_residual,
            "associativity": self.associativity,
            "cstar_identity": self.cstar_identity,
            "hermitian_part_match": self.hermitian_part_match,
            "dims": dict(self.dims),
            "residuals": dict(self.residuals),
            "passed": self.passed,
        }


def real_reconstruct(E: ExtensionSpec, require_verified: bool = True, samples: int = 50,
                     seed: int = DEFAULT_SEED) -> tuple[np.ndarray, ReconstructionReport]:
    """The real C*-algebra R(V) generated by V inside the complexified ambient.

    Returns:
        tuple: (orthonormal basis rows of R(V) in complexified coordinates, report)

    Raises:
        PreconditionError: ``require_verified`` is set and extension_verify fails.
    """
    if require_verified:
        check = extension_verify(E, seed=seed)
        if not check.passed:
            detail = "; ".join(check.violations) or f"residuals {check.residuals}"
            raise PreconditionError(ERROR_MESSAGES["EXTENSION_INVALID"].format(detail=detail))
    C = complexify(E.ambient, E.orientation, verify=require_verified)
    N = E.ambient.dim
    generators = np.hstack([E.fixed_basis, np.zeros_like(E.fixed_basis)])
    R = span_closure(C, generators)

    prods = np.einsum("kij,ai,bj->abk", C.structure, R, R).reshape(-1, C.dim)
    closed_product = _projection_residual(R, prods)
    closed_star = _projection_residual(R, np.array([C.star(z) for z in R]))

    psi = np.kron(np.eye(2), E.phi)
    rng = make_rng(seed)
    anti = 0.0
    for cz, cw in zip(rng.standard_normal((samples, R.shape[0])), rng.standard_normal((samples, R.shape[0]))):
        z, w = cz @ R, cw @ R
        anti = max(anti, float(np.linalg.norm(psi @ C.mul(z, w) - C.mul(psi @ w, psi @ z))))

    # hermitian part: combinations of R whose imaginary half vanishes
    combos = null_space(R[:, N:].T, rcond=1e-10).T
    herm = _orthonormal_rows(combos @ R) if combos.size else np.zeros((0, C.dim))
    fixed = _orthonormal_rows(generators)
    match = (herm.shape[0] == fixed.shape[0]
             and _projection_residual(fixed, herm) <= 1e-8
             and _projection_residual(herm, fixed) <= 1e-8)

    cstar = 0.0
    for c in rng.standard_normal((samples, R.shape[0])):
        z = c @ R
        norm = C.norm(z)
        cstar = max(cstar, abs(C.norm(C.mul(C.star(z), z)) - norm ** 2) / norm ** 2)

    report = ReconstructionReport(
        input_algebra=E.name,
        orientation_residual=float(verify_orientation(E.ambient, E.orientation).max_residual),
        associativity=associativity_residual(C),
        cstar_identity=cstar,
        hermitian_part_match=bool(match),
        dims={"V": E.fixed_basis.shape[0], "R(V)": R.shape[0], "complexification": C.dim},
        residuals={"product_closure": closed_product, "star_closure": closed_star,
                   "antiautomorphism": anti},
    )
    logger.info(f"{E.name}: R(V) has real dimension {R.shape[0]} "
                f"(V {E.fixed_basis.shape[0]}, ambient complexification {C.dim})")
    return R, report


def reversibility_check(C: ComplexAlgebra, sub_basis, length: int = 4,
                        tol: float = REVERSIBILITY_TOL) -> bool:
    """True iff a_1...a_L + a_L...a_1 stays in span(sub_basis) for all basis tuples.

    ``sub_basis`` rows are hermitian coordinates (length n) or complexified
    coordinates (length 2n).
    """
    rows = np.atleast_2d(np.asarray(sub_basis, dtype=float))
    if rows.shape[1] == C.n:
        rows = np.hstack([rows, np.zeros_like(rows)])
    span = _orthonormal_rows(rows)
    forward = rows
    backward = rows
    for _ in range(length - 1):
        forward = np.einsum("kij,ti,aj->tak", C.structure, forward, rows).reshape(-1, C.dim)
        backward = np.einsum("kij,ai,tj->tak", C.structure, rows, backward).reshape(-1, C.dim)
    residual = _projection_residual(span, forward + backward)
    logger.debug(f"reversibility residual {residual:.3e} over {forward.shape[0]} tuples")
    return residual <= tol * max(1.0, float(np.max(np.linalg.norm(forward + backward, axis=1))))
