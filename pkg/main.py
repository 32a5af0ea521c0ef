"""
Cone Lab - Main Module

Numerical laboratory for Jordan algebras, their symmetric cones,
orientations and the C*-algebras rebuilt from them.
"""

from __future__ import annotations

import os
import sys
import logging
import argparse
from dataclasses import asdict, dataclass, field

from jsonschema import ValidationError, validate

from config.constants import (
    BUILTIN_EXTENSIONS, CATALOG_ALGEBRAS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_INPUT_ERROR,
    EXIT_PASS, FOUND, INCONCLUSIVE, NOT_FOUND,
)
from config.settings import (
    DEFAULT_OUTPUT_FORMAT, DEFAULT_SAMPLES, DEFAULT_SEED, LOG_DATE_FORMAT, LOG_FILE,
    LOG_FORMAT, LOG_LEVEL, SOLVER_RESTARTS, SOLVER_TOL_FAIL, SOLVER_TOL_SUCCESS,
    SPECTRAL_MERGE_TOL, SUPPORTED_OUTPUT_FORMATS,
)

from conelab import catalog, cstar, geom, jalg, order, orient
from conelab.errors import ConeLabError, InputError
from conelab.loader import algebra_from_args, load_extension_data
from conelab.report import ReportFormatter
from utils.helpers import dump_json, make_rng, random_elements, random_interior, write_atomic
from utils.validators import is_valid_output_path, is_valid_seed, is_valid_tolerance_pair

logger = logging.getLogger(__name__)

COMMANDS = ("verify", "orient", "reconstruct", "catalog")

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "catalog": {"type": ["string", "null"]},
        "n": {"type": ["integer", "null"], "minimum": 1},
        "k": {"type": ["integer", "null"], "minimum": 1},
        "file": {"type": ["string", "null"]},
        "summands": {"type": "array", "items": {"type": "string"}},
        "extension": {"type": ["string", "null"]},
        "seed": {"type": "integer", "minimum": 0},
        "restarts": {"type": "integer", "minimum": 1},
        "samples": {"type": "integer", "minimum": 1},
        "tol_success": {"type": "number", "exclusiveMinimum": 0},
        "tol_fail": {"type": "number", "exclusiveMinimum": 0},
        "spectral_merge": {"type": "number", "exclusiveMinimum": 0},
        "output_format": {"enum": SUPPORTED_OUTPUT_FORMATS},
        "out": {"type": ["string", "null"]},
        "witness": {"type": ["string", "null"]},
    },
    "required": ["command"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one CLI run."""

    command: str
    catalog: str | None = None
    n: int | None = None
    k: int | None = None
    file: str | None = None
    summands: list = field(default_factory=list)
    extension: str | None = None
    seed: int = DEFAULT_SEED
    restarts: int = SOLVER_RESTARTS
    samples: int = DEFAULT_SAMPLES
    tol_success: float = SOLVER_TOL_SUCCESS
    tol_fail: float = SOLVER_TOL_FAIL
    spectral_merge: float = SPECTRAL_MERGE_TOL
    output_format: str = DEFAULT_OUTPUT_FORMAT
    out: str | None = None
    witness: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """
        Validate a raw settings mapping and build a RunConfig.

        Raises:
            InputError: unknown keys, wrong types, tol_success >= tol_fail,
                seed outside [0, 2^64), or an unwritable output path
        """
        try:
            validate(instance=data, schema=RUN_CONFIG_SCHEMA)
        except ValidationError as e:
            raise InputError(f"Invalid configuration: {e.message}") from e
        config = cls(**data)
        if not is_valid_tolerance_pair(config.tol_success, config.tol_fail):
            raise InputError("tol_success must be positive and below tol_fail")
        if not is_valid_seed(config.seed):
            raise InputError(f"Seed must be a 64-bit unsigned integer, got {config.seed}")
        for path in (config.out, config.witness):
            if path is not None and not is_valid_output_path(path):
                raise InputError(f"Cannot write output file {path}")
        return config

    def to_dict(self) -> dict:
        return asdict(self)


def configure_logging():
    """Log to LOG_FILE and stderr, keeping stdout free for reports."""
    os.makedirs(os.path.dirname(LOG_FILE), exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        handlers=[
            logging.FileHandler(LOG_FILE),
            logging.StreamHandler(sys.stderr)
        ]
    )


def load_algebra(config):
    A = algebra_from_args(catalog=config.catalog, n=config.n, k=config.k, file=config.file,
                          summands=config.summands)
    if config.spectral_merge != A.spectral_merge:
        A = jalg.AlgebraSpec(name=A.name, structure=A.structure, identity=A.identity,
                             trace_form=A.trace_form, matrix_basis=A.matrix_basis,
                             spectral_merge=config.spectral_merge)
    return A


def algebra_record(A):
    return {"name": A.name, "dim": A.dim, "fingerprint": jalg.fingerprint(A)}


def cmd_verify(config):
    """
    Run the JB-axiom, order and geometry checks on one algebra.

    Args:
        config (RunConfig): Validated run settings

    Returns:
        tuple: (exit code, report sections)
    """
    A = load_algebra(config)
    sections = {"algebra": algebra_record(A)}
    jb = jalg.verify_jb(A, sample_count=config.samples, seed=config.seed)
    sections["jb_axioms"] = jb.to_dict()
    proper = order.properness_check(A)
    sections["properness"] = {"proper": proper.proper, "kernel_dim": proper.kernel.shape[0]}
    if not (jb.passed and proper.proper):
        logger.warning(f"{A.name}: skipping geometry checks (jb={jb.passed}, proper={proper.proper})")
        return EXIT_FAIL, sections

    normality = order.normality_estimate(A, seed=config.seed)
    sections["normality"] = asdict(normality)
    order_rec = order.order_report(A, sample_count=config.samples, seed=config.seed)
    sections["order"] = order_rec.to_dict()

    rng = make_rng(config.seed)
    q = random_interior(A, 1, rng, spread=0.5)[0]
    c_low, c_high = order.order_unit_equivalence(A, A.identity, q)
    r_low, r_high = geom.chart_compatibility(A, q, samples=config.samples, seed=config.seed)
    sections["equivalence"] = {"c": c_low, "C": c_high, "chart_r": r_low, "chart_R": r_high}
    bounded = 0.0 < c_low <= c_high * (1 + 1e-12) and 0.0 < r_low <= r_high
    symmetry = geom.symmetry_isometry_check(A, samples=10, seed=config.seed)
    invariance = geom.g_invariance_check(A, jalg.quad_rep(A, q), samples=20, seed=config.seed)
    tangent_unit = abs(geom.tangent_norm(A, q, q) - 1.0)
    sections["symmetry"] = symmetry.to_dict()
    sections["g_invariance"] = invariance.to_dict()
    sections["tangent_norm"] = {"nu(p, p) - 1": tangent_unit}

    _, split = geom.lie_algebra_linear(A, seed=config.seed)
    evaluation = geom.evaluation_bijection_check(A, split)
    sections["cartan"] = {"dim_k": split.k_basis.shape[0], "dim_p": split.p_basis.shape[0],
                          "residuals": split.residuals, "passed": split.passed}
    sections["evaluation"] = evaluation.to_dict()

    passed = all([jb.passed, proper.proper, order_rec.agreements == 1.0, bounded, symmetry.passed,
                  invariance.passed, tangent_unit <= 1e-9, split.passed, evaluation.passed])
    return (EXIT_PASS if passed else EXIT_FAIL), sections


def cmd_orient(config):
    """
    Search for an orientation and, when one is found, rebuild the C*-algebra.

    Args:
        config (RunConfig): Validated run settings

    Returns:
        tuple: (exit code, report sections)
    """
    A = load_algebra(config)
    space = orient.derivation_space(A, seed=config.seed)
    result = orient.solve_orientation(
        A, restarts=config.restarts, tol_success=config.tol_success, tol_fail=config.tol_fail,
        seed=config.seed, space=space,
    )
    sections = {"algebra": algebra_record(A),
                "solver": {**result.to_dict(), "derivation_dim": space.dim,
                           "basis_hash": space.basis_hash}}
    if result.status == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE, sections
    if result.status == NOT_FOUND:
        return EXIT_FAIL, sections

    J = result.orientation
    sections["orientation"] = orient.verify_orientation(A, J).to_dict()
    C = cstar.complexify(A, J)
    cstar_report = cstar.cstar_identity_check(C, samples=config.samples, seed=config.seed)
    sections["cstar"] = cstar_report.to_dict()
    jb_star = cstar.jb_star_check(C, samples=config.samples, seed=config.seed)
    sections["jb_star"] = jb_star.to_dict()
    if cstar_report.passed:
        roundtrip = cstar.positive_cone_roundtrip(C, samples=config.samples, seed=config.seed)
        sections["positive_cone"] = roundtrip.to_dict()
    if config.witness:
        write_atomic(config.witness, dump_json(orient.orientation_to_json(J)) + "\n")
        sections["solver"]["witness"] = config.witness
    passed = sections["orientation"]["passed"] and cstar_report.passed and jb_star.passed
    return (EXIT_PASS if passed else EXIT_FAIL), sections


def build_extension(config):
    """Extension from --extension FILE or the built-in one for the catalog algebra."""
    if config.extension:
        data = load_extension_data(config.extension)
        ambient = data["ambient"]
        space = orient.derivation_space(ambient, seed=config.seed)
        if data["coeffs"] is not None:
            if data["coeffs"].shape != (space.dim, ambient.dim):
                raise InputError(f"coeffs must have shape {(space.dim, ambient.dim)}")
            J = orient.Orientation(data["coeffs"], space.basis, ambient.identity.copy())
        else:
            result = orient.solve_orientation(ambient, restarts=config.restarts, seed=config.seed,
                                              tol_success=config.tol_success,
                                              tol_fail=config.tol_fail, space=space)
            if result.status != FOUND:
                raise InputError(f"Ambient algebra of {config.extension} has no orientation "
                                 f"({result.status}, residual {result.residual:.3e})")
            J = result.orientation
        return cstar.ExtensionSpec(data["name"], ambient, data["phi"], J)

    name = catalog.resolve_name(config.catalog or "")
    if name not in BUILTIN_EXTENSIONS:
        raise InputError(f"No built-in extension for {name}; pass --extension FILE")
    if config.n is None:
        raise InputError("--n is required")
    if name == "sym_real":
        return cstar.transpose_extension(config.n)
    if name == "herm_quat":
        return cstar.quaternionic_extension(config.n)
    return cstar.trivial_extension(catalog.abelian(config.n))


def cmd_reconstruct(config):
    """
    Verify an orientable extension and rebuild the real C*-algebra R(V).

    Args:
        config (RunConfig): Validated run settings

    Returns:
        tuple: (exit code, report sections)
    """
    E = build_extension(config)
    check = cstar.extension_verify(E, samples=config.samples, seed=config.seed)
    sections = {"extension": check.to_dict()}
    if not check.passed:
        return EXIT_FAIL, sections
    _, report = cstar.real_reconstruct(E, seed=config.seed)
    sections["reconstruction"] = report.to_dict()
    C = cstar.complexify(E.ambient, E.orientation, verify=False)
    reversible = cstar.reversibility_check(C, E.fixed_basis)
    sections["reversibility"] = {"reversible": reversible}
    passed = report.passed and reversible
    return (EXIT_PASS if passed else EXIT_FAIL), sections


def cmd_catalog(config):
    """
    List catalog algebras with dimension, rank and derivation dimension.

    Args:
        config (RunConfig): Validated run settings

    Returns:
        tuple: (exit code, report sections)
    """
    size = config.n or config.k or 2
    rows = []
    rng = make_rng(config.seed)
    for name, description in CATALOG_ALGEBRAS.items():
        if name == "direct_sum":
            continue
        A = catalog.catalog(name, size)
        x = random_elements(A, 1, rng)[0]
        rows.append({
            "name": A.name,
            "description": description,
            "dim": A.dim,
            "rank": int(jalg.spectral_values(A, x).size),
            "derivations": orient.derivation_space(A).dim,
        })
    return EXIT_PASS, {"catalog": rows}


HANDLERS = {
    "verify": cmd_verify,
    "orient": cmd_orient,
    "reconstruct": cmd_reconstruct,
    "catalog": cmd_catalog,
}


def setup_args(argv=None):
    """Set up command-line arguments."""
    parser = argparse.ArgumentParser(
        description="Cone Lab - Jordan algebras, symmetric cones and C*-reconstruction"
    )
    parser.add_argument("command", choices=COMMANDS, help="Pipeline to run")

    # Algebra selection
    algebra_group = parser.add_argument_group("Algebra Selection")
    algebra_group.add_argument(
        "--catalog", type=str,
        help=f"Catalog algebra ({', '.join(CATALOG_ALGEBRAS)}; aliases spin, sym, herm, quat)"
    )
    algebra_group.add_argument("--n", type=int, help="Matrix size or abelian dimension")
    algebra_group.add_argument("--k", type=int, help="Spin factor rank")
    algebra_group.add_argument("--file", type=str, help="Algebra JSON file")
    algebra_group.add_argument(
        "--summand", dest="summands", action="append", default=[],
        help="Direct-sum summand as name:size (repeat for each summand)"
    )
    algebra_group.add_argument("--extension", type=str, help="Extension JSON file (reconstruct)")

    # Solver options
    solver_group = parser.add_argument_group("Solver Options")
    solver_group.add_argument("--seed", type=int, default=DEFAULT_SEED,
                              help=f"Random seed (default: {DEFAULT_SEED})")
    solver_group.add_argument("--restarts", type=int, default=SOLVER_RESTARTS,
                              help=f"Orientation solver restarts (default: {SOLVER_RESTARTS})")
    solver_group.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                              help=f"Samples per sampled check (default: {DEFAULT_SAMPLES})")
    solver_group.add_argument("--tol-success", type=float, default=SOLVER_TOL_SUCCESS,
                              help=f"Residual below which an orientation is Found (default: {SOLVER_TOL_SUCCESS})")
    solver_group.add_argument("--tol-fail", type=float, default=SOLVER_TOL_FAIL,
                              help=f"Residual above which the search is NotFound (default: {SOLVER_TOL_FAIL})")
    solver_group.add_argument("--spectral-merge", type=float, default=SPECTRAL_MERGE_TOL,
                              help=f"Spectral root merge tolerance (default: {SPECTRAL_MERGE_TOL})")

    # Output options
    output_group = parser.add_argument_group("Output Options")
    output_group.add_argument("--json", action="store_true", help="Emit the report as JSON")
    output_group.add_argument("--out", type=str, help="Also write the report to this file")
    output_group.add_argument("--witness", type=str,
                              help="Write the Found orientation to this JSON file (orient)")

    return parser.parse_args(argv)


def config_from_args(args):
    return RunConfig.from_dict({
        "command": args.command,
        "catalog": args.catalog,
        "n": args.n,
        "k": args.k,
        "file": args.file,
        "summands": list(args.summands),
        "extension": args.extension,
        "seed": args.seed,
        "restarts": args.restarts,
        "samples": args.samples,
        "tol_success": args.tol_success,
        "tol_fail": args.tol_fail,
        "spectral_merge": args.spectral_merge,
        "output_format": "json" if args.json else "text",
        "out": args.out,
        "witness": args.witness,
    })


def run(config):
    """
    Execute one command and render its report.

    Args:
        config (RunConfig): Validated run settings

    Returns:
        tuple: (exit code, report dict)
    """
    algebra = config.file or config.extension or (
        f"{config.catalog}({config.n if config.k is None else config.k})" if config.catalog else "-")
    try:
        code, sections = HANDLERS[config.command](config)
    except InputError as e:
        logger.error(f"Input error: {e}")
        code, sections = EXIT_INPUT_ERROR, {"error": {"type": type(e).__name__, "message": str(e)}}
    except ConeLabError as e:
        logger.error(f"{config.command} failed: {e}", exc_info=True)
        code, sections = EXIT_FAIL, {"error": {"type": type(e).__name__, "message": str(e)}}
    verdict = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_INPUT_ERROR: "input-error",
               EXIT_INCONCLUSIVE: "inconclusive"}[code]
    config_record = {key: value for key, value in config.to_dict().items()
                     if key not in ("out", "witness", "output_format")}
    report = ReportFormatter.build(config.command, algebra, verdict, code, sections, config_record)
    return code, report


def main(argv=None):
    """Main entry point for Cone Lab."""
    args = setup_args(argv)
    configure_logging()
    try:
        config = config_from_args(args)
    except InputError as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    code, report = run(config)
    formatter = ReportFormatter(config.output_format)
    print(formatter.render(report))
    if config.out:
        formatter.save(report, config.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
