"""
Suite de contrôles d'invariants exécutée par la sous-commande verify.

Chaque contrôle renvoie un CheckResult (nom, succès, valeur mesurée, seuil).
Un contrôle qui lève une exception est compté comme un échec, avec le message
de l'exception. Les groupes « intégrales » et « solveur », les plus coûteux,
peuvent être omis.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from config import C4, RULE_ORACLE_TOL
from errors import InvalidConfigurationError, ToolkitError
from geometry.cones import cone_identity_sums
from geometry.configurations import Configuration, lattice_sum, pair_distance_sq
from geometry.fields import pointwise, zero_field
from geometry.invariance import ring_space_generators, sample_points, symmetry_report, torus_space_generators
from geometry.symmetry import apply_op, is_orthogonal, kelvin
from bubbles.ansatz import AnsatzFamily, bubble_family_field, radial_field, ring_tags
from bubbles.expansion import reduction_identity_check
from bubbles.nonlinear import nonlinear_values
from bubbles.profiles import KernelElement, bubble_field, bubble_sum_field, bubble_values, kernel_field
from bubbles.residuals import cubic_cross_terms, error_terms
from quadrature.accumulator import CompensatedSum
from quadrature.integrate import energy_product, integrate
from quadrature.rules import gauss_legendre, sphere_rule
from quadrature.spec import QuadratureSpec
from reduction.coefficients import A1, U4_INTEGRAL, delta_star_closed_form, i1_num, i2_num, predicted_c1, \
    predicted_c2, solve_delta_star
from reduction.projection import make_projection_context, project_out, z_pairing
from solver.basis import build_basis, operator_rule, rule_oracle_errors
from solver.iteration import SolveState, discretize, gauss_newton_full, projected_fixed_point, psi_constraint_value
from solver.linearized import assemble_linearized, basis_from, kernel_sanity_system, min_singular_value

logger = logging.getLogger(__name__)

_SYMMETRY_CHECK_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    message: Optional[str] = None

    def to_dict(self):
        data = {"name": self.name, "passed": bool(self.passed), "value": self.value, "threshold": self.threshold}
        if self.message:
            data["message"] = self.message
        return data


@dataclass
class VerifyReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self):
        return sum(1 for c in self.checks if c.passed)

    @property
    def failed(self):
        return len(self.checks) - self.passed

    @property
    def ok(self):
        return self.failed == 0

    def to_dict(self):
        return {"passed": self.passed, "failed": self.failed, "checks": [c.to_dict() for c in self.checks]}


def _at_most(name, value, threshold):
    value = float(value)
    return CheckResult(name, bool(value <= threshold), value, threshold)


def _relative(value, reference):
    return abs(value - reference) / abs(reference)


def _fd_laplacian(f, x, h=1e-3):
    x = np.asarray(x, dtype=float)
    total = -8.0 * f(x)
    for axis in range(4):
        shift = np.zeros(4)
        shift[axis] = h
        total = total + f(x + shift) + f(x - shift)
    return total / h ** 2


# --- géométrie -------------------------------------------------------------

def check_ring_centers():
    config = Configuration("ring", 2, 1, 0.1)
    norms = np.linalg.norm(config.centers, axis=-1)
    return _at_most("geometry.ring_centers_on_sphere", np.max(np.abs(norms - config.rho)), 1e-14)


def check_torus_centers():
    config = Configuration("torus", 2, 2, 0.1)
    norms = np.linalg.norm(config.centers, axis=-1)
    result = _at_most("geometry.torus_centers_on_sphere", np.max(np.abs(norms - config.rho)), 1e-14)
    result.passed = result.passed and len(config.centers) == 4
    return result


def check_torus_distances():
    config = Configuration("torus", 4, 3, 0.2)
    worst = 0.0
    for r in range(1, 4):
        for s in range(1, 4):
            for i in range(1, 5):
                for j in range(1, 5):
                    direct = np.sum((config.sheet_centers(r)[i - 1] - config.sheet_centers(s)[j - 1]) ** 2)
                    worst = max(worst, abs(pair_distance_sq(config, i, j, r, s) - direct))
    return _at_most("geometry.torus_pair_distance_formula", worst, 1e-12)


def check_lattice_sum():
    # Σ_j 1/(4 sin²(πj/k)) = (k² - 1)/12
    worst = max(_relative(lattice_sum(k), (k * k - 1) / 12.0) for k in (2, 3, 7, 12))
    return _at_most("geometry.lattice_sum_closed_form", worst, 1e-12)


def check_odd_torus_rejected():
    try:
        Configuration("torus", 3, 2, 0.1)
    except InvalidConfigurationError:
        return CheckResult("geometry.torus_odd_k_rejected", True, "rejected", "rejected")
    return CheckResult("geometry.torus_odd_k_rejected", False, "accepted", "rejected")


def check_generators_orthogonal():
    ops = [op for op in torus_space_generators(4, 3) + ring_space_generators(3) if not op.conformal]
    bad = [op.name for op in ops if not is_orthogonal(op)]
    return CheckResult("geometry.generators_orthogonal", not bad, len(bad), 0)


def check_kelvin_involution():
    points = sample_points(100)
    op = kelvin()
    return _at_most("geometry.kelvin_involution", np.max(np.abs(apply_op(op, apply_op(op, points)) - points)), 1e-12)


def check_cone_identity():
    k = 4

    def g(t1, t2):
        return 1.0 + np.cos(t1 - t2) + np.cos(k * t1) * np.sin(k * t2) + 0.3 * np.cos(2.0 * (t1 - t2))

    weighted, plain = cone_identity_sums(g, k, 8 * k)
    return _at_most("geometry.cone_identity", _relative(weighted, plain), 1e-12)


def check_ring_symmetry():
    family = AnsatzFamily(Configuration("ring", 3, 1, 0.1), -0.1)
    report = symmetry_report(bubble_family_field(family), ring_space_generators(3), tol=_SYMMETRY_CHECK_TOL)
    return _at_most("geometry.ring_bubble_sum_symmetry", max(report.deviations.values()), _SYMMETRY_CHECK_TOL)


def check_torus_symmetry():
    family = AnsatzFamily(Configuration("torus", 2, 2, 0.1), -0.1)
    report = symmetry_report(bubble_family_field(family, 1), torus_space_generators(2, 2, False),
                             tol=_SYMMETRY_CHECK_TOL)
    return _at_most("geometry.torus_sheet_symmetry", max(report.deviations.values()), _SYMMETRY_CHECK_TOL)


# --- bulles ----------------------------------------------------------------

def check_bubble_peak():
    value = bubble_field(0.1, (0.3, 0.0, 0.4, 0.0))((0.3, 0.0, 0.4, 0.0))
    return _at_most("bubbles.peak_value", _relative(value, C4 / 0.1), 1e-14)


def check_bubble_equation():
    bubble = bubble_field(0.5, (0.2, -0.1, 0.0, 0.3))
    x = np.array([0.5, 0.1, -0.2, 0.6])
    error = _relative(-_fd_laplacian(bubble.func, x), bubble.neg_laplacian(x))
    return _at_most("bubbles.bubble_solves_critical_equation", error, 1e-5)


def check_kernel_equation():
    element = kernel_field(KernelElement(0, 0.7, (0.1, 0.0, -0.2, 0.0)))
    x = np.array([0.9, 0.3, 0.1, -0.5])
    error = _relative(-_fd_laplacian(element.func, x), element.neg_laplacian(x))
    return _at_most("bubbles.kernel_element_linearized_equation", error, 1e-5)


def check_stable_cross_terms():
    centers = Configuration("ring", 4, 1, 0.2).centers
    points = sample_points(200, scale=2.0)
    values = bubble_values(centers, 0.2, points)
    naive = np.sum(values, axis=0) ** 3 - np.sum(values ** 3, axis=0)
    stable = cubic_cross_terms(values)
    return _at_most("bubbles.stable_cross_terms", np.max(np.abs(stable - naive) / (np.abs(naive) + 1e-300)), 1e-10)


def check_reduction_identity():
    family = AnsatzFamily(Configuration("torus", 2, 3, 0.3), -0.1)
    v = bubble_family_field(family, 1)
    points = sample_points(100)
    scale = float(np.max(v(points) ** 2))
    worst = max(float(np.max(reduction_identity_check(v, 3, i, points))) for i in (1, 2, 3))
    return _at_most("bubbles.reduction_identity", worst / scale, 1e-12)


def check_nonlinear_vanishes():
    points = sample_points(50)
    u = radial_field()(points)
    v = bubble_family_field(AnsatzFamily(Configuration("ring", 2, 1, 0.1), -0.2))(points)
    zero = np.zeros_like(u)
    n1, n2 = nonlinear_values(-0.2, 0.0, u, zero, [v], [zero])
    return _at_most("bubbles.nonlinear_terms_vanish_at_zero", max(np.max(np.abs(n1)), np.max(np.abs(n2))), 0.0)


def check_error_linear_in_beta():
    config = Configuration("ring", 2, 1, 0.1)
    points = sample_points(50)
    e1, _ = error_terms(AnsatzFamily(config, -0.1), points)
    e1_double, _ = error_terms(AnsatzFamily(config, -0.2), points)
    return _at_most("bubbles.E1_linear_in_beta", np.max(np.abs(e1_double - 2.0 * e1)), 1e-10)


# --- quadrature ------------------------------------------------------------

def check_compensated_sum():
    total = CompensatedSum().extend([1e16, 1.0, -1e16, 1e-3]).value
    return _at_most("quadrature.compensated_sum", abs(total - 1.001), 1e-15)


def check_gauss_legendre():
    x, w = gauss_legendre(4)
    return _at_most("quadrature.gauss_legendre_degree7", abs(float(w @ x ** 6) - 2.0 / 7.0), 1e-15)


def check_sphere_area():
    full = float(np.sum(sphere_rule(0).weights))
    sector = float(np.sum(sphere_rule(0, 4).weights))
    error = max(_relative(full, 2.0 * math.pi ** 2), _relative(4.0 * sector, 2.0 * math.pi ** 2))
    return _at_most("quadrature.sphere_rule_area", error, 1e-8)


def check_u4_integral(spec):
    u = radial_field()
    value = integrate(pointwise(lambda values: values ** 4, u, name="U^4"), spec).value
    return _at_most("quadrature.integral_U4", _relative(value, U4_INTEGRAL), 1e-6)


def check_z0_energy(spec):
    z = kernel_field(KernelElement(0))
    return _at_most("quadrature.energy_Z0", _relative(energy_product(z, z, spec), A1), 1e-6)


# --- intégrales ------------------------------------------------------------

def _agreement_threshold(spec):
    return max(1e-6, 100.0 * spec.rel_tol)


def _ring_power(k, delta, p):
    family = AnsatzFamily(Configuration("ring", k, 1, delta), -0.1)
    return pointwise(lambda values: values ** p, bubble_family_field(family), name=f"V^{p}")


def check_symmetry_reduction(spec):
    field = _ring_power(3, 0.1, 4)
    reduced = integrate(field, spec.replace(use_symmetry=True)).value
    full = integrate(field, spec.replace(use_symmetry=False)).value
    return _at_most("quadrature.symmetry_reduction_agreement", _relative(reduced, full),
                    _agreement_threshold(spec))


def check_exterior_maps(spec):
    field = _ring_power(2, 0.1, 4)
    inversion = integrate(field, spec.replace(exterior_map="inversion")).value
    tangent = integrate(field, spec.replace(exterior_map="tangent")).value
    return _at_most("quadrature.exterior_maps_agreement", _relative(tangent, inversion),
                    _agreement_threshold(spec))


def check_z_energy_limit(spec):
    # ‖∇Z‖² = k A₁ (1 + O(δ²)) : l'écart décroît avec δ
    k = 2
    deviations = {}
    for delta in (0.05, 0.1):
        context = make_projection_context(AnsatzFamily(Configuration("ring", k, 1, delta), -0.1), spec)
        deviations[delta] = _relative(context.z_energy, k * A1)
    result = _at_most("reduction.z_energy_limit", deviations[0.05], 2.0 * 0.05 ** 2)
    result.passed = result.passed and deviations[0.05] < deviations[0.1]
    return result


def check_projection(spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.1), -0.1)
    context = make_projection_context(family, spec)
    config = family.config
    psi = bubble_sum_field(config.centers, 2.0 * config.delta, ring_tags(config.k), name="b[2δ]")
    projected = project_out(context, psi)
    orthogonality = abs(z_pairing(context, projected)) / abs(z_pairing(context, psi))
    points = sample_points(200)
    twice = project_out(context, projected)
    idempotence = float(np.max(np.abs(twice(points) - projected(points))) / np.max(np.abs(projected(points))))
    return _at_most("reduction.projection_orthogonal_idempotent", max(orthogonality, idempotence), 1e-5)


def check_reduced_integral_signs(spec):
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.02), -0.1)
    i1, i2 = i1_num(family, spec), i2_num(family, spec)
    return CheckResult("reduction.I1_negative_I2_positive", bool(i1 < 0.0 < i2), [i1, i2], "I1 < 0 < I2")


# --- réduction -------------------------------------------------------------

def check_predicted_coefficients():
    error = max(_relative(predicted_c1(2), 74.442), _relative(predicted_c2(2), 11.3137))
    return _at_most("reduction.predicted_coefficients_k2", error, 1e-4)


def check_delta_star():
    error = _relative(solve_delta_star(-0.5, 2), delta_star_closed_form(-0.5, 2))
    return _at_most("reduction.delta_star_bisection", error, 1e-10)


# --- solveur ---------------------------------------------------------------

def _uncoupled_family():
    return AnsatzFamily(Configuration("ring", 2, 1, 0.1), 0.0, allow_uncoupled=True)


def check_rule_oracles():
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.05), -0.05)
    errors = rule_oracle_errors(operator_rule(family))
    return _at_most("solver.rule_closed_form_integrals", max(errors.values()), RULE_ORACLE_TOL)


def check_gram_of_u():
    family = _uncoupled_family()
    basis = build_basis(family, widths_count=0, radial_count=1)
    return _at_most("solver.gram_of_U", _relative(basis.gram[0, 0], U4_INTEGRAL), 1e-5)


def check_kernel_sanity():
    return _at_most("solver.kernel_sanity_singular_value",
                    min_singular_value(kernel_sanity_system(), project_out_z=False), 1e-6)


def check_exact_bubble_recovery():
    family = _uncoupled_family()
    rule = operator_rule(family)
    phi_basis = basis_from([radial_field()], "X", ("U",))
    state = gauss_newton_full(family, basis_from([], "X"), SolveState(np.array([0.9]), np.zeros(0)),
                              phi_basis=phi_basis, rule=rule, base_fields=(zero_field(), zero_field()))
    return _at_most("solver.exact_bubble_recovery", abs(state.phi[0] - 1.0), 1e-8)


def check_trivial_fixed_point():
    family = _uncoupled_family()
    rule = operator_rule(family)
    basis = build_basis(family, widths_count=0, radial_count=2, rule=rule)
    problem = discretize(family, basis, rule=rule, base_fields=(radial_field(), zero_field()))
    state = projected_fixed_point(family, basis, problem=problem)
    result = _at_most("solver.trivial_fixed_point", state.correction_norm, 1e-12)
    result.passed = result.passed and state.converged
    return result


def _default_ring_system():
    family = AnsatzFamily(Configuration("ring", 2, 1, 0.05), -0.05)
    rule = operator_rule(family)
    basis = build_basis(family, rule=rule)
    return family, rule, basis


def check_projected_coercivity():
    family, rule, basis = _default_ring_system()
    system = assemble_linearized(family, basis, rule=rule)
    projected = min_singular_value(system, project_out_z=True)
    unprojected = min_singular_value(system, project_out_z=False)
    passed = projected >= 0.1 and projected >= 10.0 * unprojected
    return CheckResult("solver.projected_coercivity", bool(passed), [projected, unprojected],
                       "σ_proj >= 0.1 et >= 10 σ")


def check_fixed_point_constraint():
    family, rule, basis = _default_ring_system()
    problem = discretize(family, basis, rule=rule)
    state = projected_fixed_point(family, basis, problem=problem)
    scale = float(np.linalg.norm(problem.constraint) * np.linalg.norm(state.psi))
    value = abs(psi_constraint_value(problem, state)) / scale if scale > 0.0 else 0.0
    result = _at_most("solver.fixed_point_in_constrained_space", value, 1e-10)
    result.passed = result.passed and state.converged
    return result


def run_invariant_suite(spec=None, include_solver=True, include_integrals=True):
    """
    Exécute tous les contrôles, module par module.

    Args:
        spec: QuadratureSpec pour les contrôles d'intégration
        include_solver: inclut les contrôles du solveur (les plus coûteux)
        include_integrals: inclut les comparaisons d'intégrales sur les anneaux

    Returns:
        VerifyReport
    """
    spec = spec or QuadratureSpec()
    groups = [
        ("géométrie", [check_ring_centers, check_torus_centers, check_torus_distances, check_lattice_sum,
                       check_odd_torus_rejected, check_generators_orthogonal, check_kelvin_involution,
                       check_cone_identity, check_ring_symmetry, check_torus_symmetry]),
        ("bulles", [check_bubble_peak, check_bubble_equation, check_kernel_equation, check_stable_cross_terms,
                    check_reduction_identity, check_nonlinear_vanishes, check_error_linear_in_beta]),
        ("quadrature", [check_compensated_sum, check_gauss_legendre, check_sphere_area,
                        lambda: check_u4_integral(spec), lambda: check_z0_energy(spec)]),
        ("réduction", [check_predicted_coefficients, check_delta_star]),
    ]
    if include_integrals:
        groups.append(("intégrales", [lambda: check_symmetry_reduction(spec), lambda: check_exterior_maps(spec),
                                      lambda: check_z_energy_limit(spec), lambda: check_projection(spec),
                                      lambda: check_reduced_integral_signs(spec)]))
    if include_solver:
        groups.append(("solveur", [check_rule_oracles, check_gram_of_u, check_kernel_sanity,
                                   check_exact_bubble_recovery, check_trivial_fixed_point,
                                   check_projected_coercivity, check_fixed_point_constraint]))

    report = VerifyReport()
    for index, (label, checks) in enumerate(groups, start=1):
        logger.info("Étape %d/%d : contrôles %s", index, len(groups), label)
        for check in checks:
            name = getattr(check, "__name__", "check")
            try:
                result = check()
            except (ToolkitError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
                logger.warning("Contrôle %s en erreur : %s", name, exc)
                result = CheckResult(name, False, None, None, str(exc))
            if not result.passed:
                logger.warning("Contrôle %s en échec : valeur %s, seuil %s", result.name, result.value,
                               result.threshold)
            report.checks.append(result)
    logger.info("%d contrôles réussis, %d en échec", report.passed, report.failed)
    return report
