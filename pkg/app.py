"""
Point d'entrée en ligne de commande de la boîte à outils de vérification des
solutions multi-bulles ségrégées.

Sous-commandes : construct, residual, reduce, tune, spectrum, solve, verify,
report. Les résultats sont écrits dans le répertoire de sortie (JSON et/ou
CSV) ; les journaux vont sur la sortie d'erreur.
"""
import argparse
import datetime
import glob
import json
import logging
import os
import sys

import numpy as np

from config import DEFAULT_DELTA_GRID, configure_logging, get_worker_count
from errors import ToolkitError
from geometry.fields import zero_field
from geometry.invariance import symmetry_report
from bubbles.ansatz import bubble_family_field, family_centers, radial_field
from bubbles.profiles import bubble_values
from reduction.coefficients import reduction_report, solve_d_beta, solve_delta_star, stated_ratio
from reduction.residual_scan import residual_norms, residual_scan
from solver.basis import RING_SPACE, TORUS_PHI_SPACE, TORUS_PSI_SPACE, build_basis, operator_rule, space_generators
from solver.iteration import discretize, gauss_newton_full, projected_fixed_point
from solver.linearized import assemble_linearized, min_singular_value
from utils.export_utils import generate_pdf_report, write_csv, write_json
from utils.run_config import RunConfig

logger = logging.getLogger(__name__)

COMMANDS = ("construct", "residual", "reduce", "tune", "spectrum", "solve", "verify", "report")
_METADATA_FILE = "metadata.json"


class OutputWriter:
    """Écrit les résultats d'une sous-commande selon le format demandé."""

    def __init__(self, directory, output_format="both"):
        self.directory = directory
        self.output_format = output_format
        self.written = []

    def _path(self, name):
        return os.path.join(self.directory, name)

    def json(self, name, data):
        if self.output_format in ("json", "both"):
            self.written.append(write_json(self._path(f"{name}.json"), data))

    def csv(self, name, rows, columns=None):
        if self.output_format in ("csv", "both"):
            self.written.append(write_csv(self._path(f"{name}.csv"), rows, columns))


def cmd_construct(config, writer):
    """Décrit l'ansatz : centres, valeurs aux pics, rapport de symétrie."""
    logger.info("Étape 1/2 : construction de la famille")
    family = config.build_family()
    centers = family_centers(family)

    logger.info("Étape 2/2 : contrôle des symétries")
    peaks = [float(bubble_values(c[None, :], family.delta, c)[0]) for c in centers]
    generators = space_generators(family, TORUS_PSI_SPACE if family.config.is_torus else RING_SPACE)
    report = symmetry_report(bubble_family_field(family, 1), generators, seed=config.seed, tol=1e-10)
    payload = {
        "family": family.to_dict(),
        "rho": family.config.rho,
        "centers": centers,
        "center_norms": np.linalg.norm(centers, axis=-1),
        "peak_values": peaks,
        "radial_peak": float(radial_field()(np.zeros(4))),
        "symmetry": report.to_dict(),
    }
    writer.json("ansatz", payload)
    writer.csv("ansatz", [{"index": i + 1, "x1": c[0], "x2": c[1], "x3": c[2], "x4": c[3], "peak": p}
                          for i, (c, p) in enumerate(zip(centers, peaks))])
    return 0


def cmd_residual(config, writer):
    """Normes L^{4/3} des termes d'erreur, sur δ seul ou sur une grille."""
    family = config.build_family()
    if config.family.delta_grid:
        logger.info("Étape 1/2 : normes des termes d'erreur sur %d valeurs de δ", len(config.deltas()))
        scan = residual_scan(family, config.deltas(), config.quadrature, config.workers)
        logger.info("Étape 2/2 : ajustements (R² à deux termes = %.6f en log, %.6f en linéaire)",
                    scan.two_term_r_squared, scan.two_term_linear_r_squared)
        writer.json("residual", scan.to_dict())
        writer.csv("residual", scan.rows())
        return 0
    logger.info("Étape 1/1 : normes des termes d'erreur à δ = %g", family.delta)
    report = residual_norms(family, config.quadrature, config.workers)
    writer.json("residual", report.to_dict())
    writer.csv("residual", [{"delta": report.delta, "beta": report.beta, "norm_E1": report.norm_E1,
                             "norm_E2": report.norm_E2, "interior_share": report.interior_share}])
    return 0


def cmd_reduce(config, writer):
    """Échantillonne l'équation réduite et ajuste ses coefficients."""
    family = config.build_family()
    grid = config.delta_grid(DEFAULT_DELTA_GRID)
    logger.info("Étape 1/2 : intégrales réduites sur %d valeurs de δ", len(grid))
    report = reduction_report(family, grid, config.quadrature, config.workers)
    logger.info("Étape 2/2 : c1 ajusté = %.6g, c2 ajusté = %.6g", report.fitted_c1, report.fitted_c2)
    writer.json("reduce", report.to_dict())
    writer.csv("reduce", report.rows())
    return 0


def _measured_ratio(config):
    if "ratio" in config.options:
        return float(config.options["ratio"])
    path = os.path.join(config.output_dir, "reduce.json")
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if data.get("fitted_c1") and data.get("fitted_c2") and data["fitted_c1"] > 0 and data["fitted_c2"] > 0:
            return data["fitted_c1"] / data["fitted_c2"]
    return None


def cmd_tune(config, writer):
    """Table δ*(β) : loi énoncée et, si disponible, rapport mesuré."""
    k = config.family.k
    logger.info("Étape 1/1 : racines de l'équation réduite pour %d valeurs de β", len(config.betas))
    measured = _measured_ratio(config)
    rows = []
    for beta in config.betas:
        row = {"k": k, "beta": beta, "ratio": stated_ratio(k), "d_beta": solve_d_beta(beta, k),
               "delta_star": solve_delta_star(beta, k)}
        if measured is not None:
            row["measured_ratio"] = measured
            row["delta_star_measured"] = solve_delta_star(beta, k, measured)
        rows.append(row)
    writer.json("tune", {"k": k, "rows": rows})
    writer.csv("tune", rows)
    return 0


def _bases(config, family, rule):
    solver = config.solver
    basis = build_basis(family, solver.widths_count, solver.radial_count, rule=rule)
    phi_basis = None
    if family.config.is_torus:
        phi_basis = build_basis(family, solver.widths_count, solver.radial_count, space=TORUS_PHI_SPACE, rule=rule)
    return basis, phi_basis


def cmd_spectrum(config, writer):
    """Plus petite valeur singulière de l'opérateur linéarisé, avec et sans projection."""
    family = config.build_family()
    logger.info("Étape 1/3 : règle fixe et bases symétriques")
    rule = operator_rule(family, angular_level=config.solver.rule_level)
    basis, phi_basis = _bases(config, family, rule)
    logger.info("Étape 2/3 : assemblage du système linéarisé (%d éléments)", basis.dimension)
    system = assemble_linearized(family, basis, phi_basis, rule)
    logger.info("Étape 3/3 : problèmes propres généralisés")
    projected = min_singular_value(system, project_out_z=True)
    unprojected = min_singular_value(system, project_out_z=False)
    ratio = projected / unprojected if unprojected > 0.0 else float("inf")
    writer.json("spectrum", {
        "family": family.to_dict(),
        "dimension": len(system.matrix),
        "rule_size": rule.size,
        "min_singular_projected": projected,
        "min_singular_unprojected": unprojected,
        "ratio": ratio,
        "symmetry_defect": float(np.max(np.abs(system.matrix - system.matrix.T))),
    })
    writer.csv("spectrum_matrix", system.to_frame())
    return 0


def cmd_solve(config, writer):
    """Point fixe projeté puis raffinement de Gauss-Newton."""
    family = config.build_family()
    logger.info("Étape 1/3 : règle fixe et bases symétriques")
    rule = operator_rule(family, angular_level=config.solver.rule_level)
    basis, phi_basis = _bases(config, family, rule)
    base_fields = (radial_field(), zero_field()) if config.sanity else None
    problem = discretize(family, basis, phi_basis, rule, base_fields)

    logger.info("Étape 2/3 : itération de point fixe projetée")
    state = projected_fixed_point(family, basis, config.solver.max_iter, config.solver.tol, problem=problem)

    logger.info("Étape 3/3 : raffinement de Gauss-Newton")
    refined = gauss_newton_full(family, basis, state, problem=problem)
    writer.json("solve", {"family": family.to_dict(), "fixed_point": state.to_dict(),
                          "gauss_newton": refined.to_dict()})
    writer.csv("solve", [{"iteration": i + 1, "distance": d} for i, d in enumerate(state.history)])
    return 0


def cmd_verify(config, writer):
    """Suite de contrôles d'invariants ; code 1 si un contrôle échoue."""
    from analysis.invariant_checks import run_invariant_suite

    options = config.options
    report = run_invariant_suite(config.quadrature, include_solver=not options.get("skip_solver", False),
                                 include_integrals=not options.get("skip_integrals", False))
    writer.json("verify", report.to_dict())
    writer.csv("verify", [c.to_dict() for c in report.checks], ["name", "passed", "value", "threshold"])
    return 0 if report.ok else 1


def cmd_report(config, writer):
    """Rapport PDF récapitulatif des JSON du répertoire de sortie."""
    logger.info("Étape 1/2 : lecture des résultats")
    results = {}
    for path in sorted(glob.glob(os.path.join(config.output_dir, "*.json"))):
        name = os.path.basename(path)
        if name == _METADATA_FILE:
            continue
        with open(path, "r", encoding="utf-8") as handle:
            results[name] = json.load(handle)
    logger.info("Étape 2/2 : génération du PDF (%d fichiers)", len(results))
    pdf = generate_pdf_report(results)
    path = os.path.join(config.output_dir, "report.pdf")
    os.makedirs(config.output_dir, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(pdf)
    writer.written.append(path)
    return 0


HANDLERS = {
    "construct": cmd_construct,
    "residual": cmd_residual,
    "reduce": cmd_reduce,
    "tune": cmd_tune,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="bubbles", description="Vérification numérique de solutions multi-bulles")
    parser.add_argument("command", choices=COMMANDS, help="sous-commande")
    parser.add_argument("--config", help="fichier JSON de configuration")
    parser.add_argument("--out", help="répertoire de sortie")
    parser.add_argument("--format", choices=("json", "csv", "both"), default="both", help="format de sortie")
    parser.add_argument("--workers", type=int, help="nombre de threads (défaut : BUBBLES_WORKERS ou 1)")
    parser.add_argument("--log-level", help="niveau de journalisation (défaut : BUBBLES_LOG_LEVEL ou INFO)")
    return parser


def _write_metadata(directory, command, config, exit_code):
    metadata = {
        "command": command,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "exit_code": exit_code,
        "config": config.to_dict(),
    }
    write_json(os.path.join(directory, _METADATA_FILE), metadata)


def _report_error(error):
    sys.stderr.write(json.dumps(error.to_dict(), ensure_ascii=False, default=str) + "\n")


def main(argv=None):
    """
    Exécute une sous-commande.

    Args:
        argv: arguments (défaut : sys.argv[1:])

    Returns:
        Code de sortie : 0 succès, 1 échec numérique, 2 échec de validation
    """
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level.upper() if args.log_level else None)
    except ValueError as exc:
        sys.stderr.write(json.dumps({"code": 2, "message": str(exc), "context": {}}) + "\n")
        return 2

    try:
        config = RunConfig.from_file(args.config) if args.config else RunConfig()
        overrides = {}
        if args.out:
            overrides["output_dir"] = args.out
        workers = args.workers if args.workers is not None else (config.workers if args.config else get_worker_count())
        if workers != config.workers:
            overrides["workers"] = workers
        if overrides:
            data = config.to_dict()
            data.update(overrides)
            config = RunConfig.from_dict(data)
        writer = OutputWriter(config.output_dir, args.format)
        logger.info("Sous-commande %s (sortie : %s)", args.command, config.output_dir)
        exit_code = HANDLERS[args.command](config, writer)
        _write_metadata(config.output_dir, args.command, config, exit_code)
        return exit_code
    except ToolkitError as exc:
        logger.error("%s", exc.message)
        _report_error(exc)
        return exc.code
    except ValueError as exc:
        # accesseurs de config.py
        sys.stderr.write(json.dumps({"code": 2, "message": str(exc), "context": {}}, ensure_ascii=False) + "\n")
        return 2
    except Exception as exc:
        logger.exception("Erreur inattendue")
        sys.stderr.write(json.dumps({"code": 1, "message": str(exc), "context": {"type": type(exc).__name__}},
                                    ensure_ascii=False) + "\n")
        return 1
