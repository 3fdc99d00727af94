"""
Itération de point fixe projetée pour (φ, ψ) et raffinement de Gauss-Newton
sur le résidu fort complet.

Toutes les valeurs (U, nappes Ṽᵣ, termes d'erreur, éléments de base et leurs
laplaciens, éléments de ψ aux nœuds transformés par 𝒯ᵣ) sont calculées une
seule fois sur la règle fixe de l'opérateur.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, lstsq, lu_factor, lu_solve, null_space

from config import (
    ARMIJO_CONSTANT,
    CONTRACTION_LIMIT,
    CONTRACTION_PATIENCE,
    DEFAULT_MAX_ITER,
    DEFAULT_SOLVER_TOL,
    GAUSS_NEWTON_MAX_ITER,
    MAX_FIXED_POINT_BETA,
    MAX_LINE_SEARCH_HALVINGS,
    MIN_SOLVER_DELTA,
)
from errors import DomainError, EigensolverError, LineSearchError, MaxIterationsError, NonContractionError
from bubbles.ansatz import kernel_direction_field, radial_field
from bubbles.nonlinear import nonlinear_values
from bubbles.profiles import bubble_values
from bubbles.residuals import error_terms, sheet_points
from solver.basis import TORUS_PHI_SPACE, build_basis, operator_rule
from solver.linearized import operator_block, psi_elements

logger = logging.getLogger(__name__)


@dataclass
class SolveState:
    """
    Coefficients de φ et ψ dans leurs bases, avec l'historique de l'itération.

    Args:
        phi: coefficients de φ
        psi: coefficients de ψ (base ψ complète, direction Z comprise)
        history: distances successives (point fixe) ou normes du résidu (Gauss-Newton)
        contraction: rapports des distances successives
    """

    phi: np.ndarray
    psi: np.ndarray
    history: List[float] = field(default_factory=list)
    contraction: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    method: str = "fixed_point"
    phi_norm: float = 0.0
    psi_norm: float = 0.0
    residual_norm: Optional[float] = None
    phi_labels: Tuple[str, ...] = ()
    psi_labels: Tuple[str, ...] = ()

    @property
    def correction_norm(self):
        """‖φ‖ + ‖ψ‖ en norme d'énergie discrète."""
        return self.phi_norm + self.psi_norm

    def to_dict(self):
        return {
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "phi": dict(zip(self.phi_labels, map(float, self.phi))) if self.phi_labels else list(map(float, self.phi)),
            "psi": dict(zip(self.psi_labels, map(float, self.psi))) if self.psi_labels else list(map(float, self.psi)),
            "phi_norm": self.phi_norm,
            "psi_norm": self.psi_norm,
            "correction_norm": self.correction_norm,
            "residual_norm": self.residual_norm,
            "history": [float(h) for h in self.history],
            "contraction": [float(c) for c in self.contraction],
        }


@dataclass(eq=False)
class DiscreteProblem:
    """Valeurs aux nœuds et matrices du problème discret."""

    family: object
    weights: np.ndarray
    u: np.ndarray
    sheets: List[np.ndarray]
    e1: np.ndarray
    e2: np.ndarray
    phi_values: np.ndarray
    phi_laplacians: np.ndarray
    psi_sheet_values: List[np.ndarray]
    psi_laplacians: np.ndarray
    m_phi: np.ndarray
    g_phi: np.ndarray
    m_psi: np.ndarray
    g_psi: np.ndarray
    constraint: np.ndarray
    phi_labels: Tuple[str, ...] = ()
    psi_labels: Tuple[str, ...] = ()

    @property
    def psi_values(self):
        return self.psi_sheet_values[0]

    @property
    def phi_dim(self):
        return len(self.phi_values)

    @property
    def psi_dim(self):
        return len(self.psi_laplacians)

    def fields_at(self, a, c):
        """(φ, [ψ∘𝒯ᵣ]) aux nœuds."""
        return a @ self.phi_values, [c @ values for values in self.psi_sheet_values]

    def nonlinear(self, a, c):
        phi, psis = self.fields_at(a, c)
        return nonlinear_values(self.family.beta, self.family.alpha, self.u, phi, self.sheets, psis)

    def energy_norms(self, a, c):
        return (float(np.sqrt(max(a @ self.g_phi @ a, 0.0))),
                float(np.sqrt(max(c @ self.g_psi @ c, 0.0))))

    def strong_residual(self, a, c):
        """Résidu fort (R1, R2) = L(φ, ψ) - E - N(φ, ψ) aux nœuds."""
        phi, psis = self.fields_at(a, c)
        n1, n2 = nonlinear_values(self.family.beta, self.family.alpha, self.u, phi, self.sheets, psis)
        r1 = a @ self.phi_laplacians - 3.0 * self.u ** 2 * phi - self.e1 - n1
        r2 = c @ self.psi_laplacians - 3.0 * self.sheets[0] ** 2 * psis[0] - self.e2 - n2
        return r1, r2

    def residual_norm(self, a, c):
        r1, r2 = self.strong_residual(a, c)
        return float(np.sqrt(max(self.weights @ (r1 ** 2 + r2 ** 2), 0.0)))


def _values(elements, points):
    if not elements:
        return np.zeros((0, len(points)))
    return np.array([e.func(points) for e in elements])


def _laplacians(elements, points):
    if not elements:
        return np.zeros((0, len(points)))
    return np.array([e.neg_laplacian(points) for e in elements])


def _block(elements, potential, rule):
    if not elements:
        return np.zeros((0, 0)), np.zeros((0, 0))
    return operator_block(elements, potential, rule)


def _base_values(family, rule, base_fields):
    """(u, nappes, E1, E2) pour l'ansatz de la famille ou des champs de base donnés."""
    nodes = rule.nodes
    points = sheet_points(family, nodes)
    if base_fields is None:
        u = radial_field().func(nodes)
        centers = family.config.sheet_centers(1)
        sheets = [np.sum(bubble_values(centers, family.delta, y), axis=0) for y in points]
        e1, e2 = error_terms(family, nodes)
        return u, sheets, e1, e2
    u_field, v_field = base_fields
    u = u_field.func(nodes)
    sheets = [v_field.func(y) for y in points]
    beta, alpha = family.beta, family.alpha
    v = sheets[0]
    e1 = u ** 3 + beta * u * sum(s ** 2 for s in sheets) - u_field.neg_laplacian(nodes)
    e2 = v ** 3 + beta * u ** 2 * v - v_field.neg_laplacian(nodes)
    if len(sheets) > 1 and alpha != 0.0:
        e2 = e2 + alpha * v * sum(s ** 2 for s in sheets[1:])
    return u, sheets, e1, e2


def discretize(family, basis, phi_basis=None, rule=None, base_fields=None):
    """
    Précalcule le problème discret.

    Args:
        family: famille d'ansatz
        basis: base des ψ
        phi_basis: base des φ (défaut : basis pour l'anneau, X̃₁ pour le tore)
        rule: règle fixe (défaut : operator_rule)
        base_fields: couple (u₀, v₀) remplaçant (U, V) comme point de départ

    Returns:
        DiscreteProblem
    """
    rule = rule or operator_rule(family)
    if phi_basis is None:
        if family.config.is_torus:
            widths, radial = basis.counts
            phi_basis = build_basis(family, widths, radial, space=TORUS_PHI_SPACE, rule=rule)
        else:
            phi_basis = basis
    u, sheets, e1, e2 = _base_values(family, rule, base_fields)

    phi_list = list(phi_basis.elements)
    psi_list, psi_labels = psi_elements(basis)
    m_phi, g_phi = _block(phi_list, 3.0 * u ** 2, rule)
    m_psi, g_psi = _block(psi_list, 3.0 * sheets[0] ** 2, rule)
    psi_sheet_values = [_values(psi_list, y) for y in sheet_points(family, rule.nodes)]
    constraint = np.zeros(len(psi_list))
    if psi_list:
        z_laplacian = kernel_direction_field(family).neg_laplacian(rule.nodes)
        constraint = rule.gram(psi_sheet_values[0], z_laplacian[None, :])[:, 0]

    return DiscreteProblem(
        family=family,
        weights=rule.weights,
        u=u,
        sheets=sheets,
        e1=e1,
        e2=e2,
        phi_values=_values(phi_list, rule.nodes),
        phi_laplacians=_laplacians(phi_list, rule.nodes),
        psi_sheet_values=psi_sheet_values,
        psi_laplacians=_laplacians(psi_list, rule.nodes),
        m_phi=m_phi,
        g_phi=g_phi,
        m_psi=m_psi,
        g_psi=g_psi,
        constraint=constraint,
        phi_labels=tuple(phi_basis.labels),
        psi_labels=tuple(psi_labels),
    )


def _factor(matrix):
    if matrix.size == 0:
        return None
    try:
        return lu_factor(matrix)
    except (LinAlgError, ValueError) as exc:
        raise EigensolverError(f"factorisation LU impossible : {exc}") from exc


def _solve(factor, rhs):
    if factor is None:
        return np.zeros(0)
    return lu_solve(factor, rhs)


def _check_fixed_point_domain(family):
    if abs(family.beta) > MAX_FIXED_POINT_BETA:
        raise DomainError(f"|β| = {abs(family.beta):g} au-delà du seuil du point fixe",
                          beta=family.beta, limit=MAX_FIXED_POINT_BETA)
    if family.delta < MIN_SOLVER_DELTA:
        raise DomainError(f"δ = {family.delta:g} trop petit pour la règle de l'opérateur",
                          delta=family.delta, limit=MIN_SOLVER_DELTA)


def projected_fixed_point(family, basis, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_SOLVER_TOL,
                          phi_basis=None, rule=None, problem=None):
    """
    Itération (φ, ψ) ← L⁻¹(E + N(φ, ψ)) dans X × K⊥ discrétisé.

    Args:
        family: famille d'ansatz
        basis: base des ψ
        max_iter: nombre maximal d'itérations
        tol: seuil sur la distance d'énergie entre itérés successifs
        phi_basis: base des φ (voir discretize)
        rule: règle fixe de l'opérateur
        problem: DiscreteProblem déjà construit

    Returns:
        SolveState

    Raises:
        NonContractionError: rapport de distances > 0.95 sur 5 pas consécutifs
        MaxIterationsError: max_iter atteint sans convergence
    """
    _check_fixed_point_domain(family)
    problem = problem or discretize(family, basis, phi_basis, rule)

    # ψ = K b avec K base du noyau de la contrainte ⟨ψ, Z⟩ = 0
    kernel = np.eye(problem.psi_dim)
    if problem.psi_dim and np.any(problem.constraint):
        kernel = null_space(problem.constraint[None, :])
    phi_factor = _factor(problem.m_phi)
    psi_factor = _factor(kernel.T @ problem.m_psi @ kernel)

    a = np.zeros(problem.phi_dim)
    c = np.zeros(problem.psi_dim)
    history, ratios = [], []
    streak = 0
    for iteration in range(1, max_iter + 1):
        n1, n2 = problem.nonlinear(a, c)
        rhs_phi = (problem.phi_values * problem.weights) @ (problem.e1 + n1)
        rhs_psi = (problem.psi_values * problem.weights) @ (problem.e2 + n2)
        a_next = _solve(phi_factor, rhs_phi)
        c_next = kernel @ _solve(psi_factor, kernel.T @ rhs_psi) if problem.psi_dim else c
        distance = sum(problem.energy_norms(a_next - a, c_next - c))
        if history and history[-1] > 0.0:
            ratio = distance / history[-1]
            ratios.append(ratio)
            streak = streak + 1 if ratio > CONTRACTION_LIMIT else 0
        history.append(distance)
        a, c = a_next, c_next
        logger.debug("Itération %d : distance %.3e", iteration, distance)
        if distance < tol:
            phi_norm, psi_norm = problem.energy_norms(a, c)
            logger.info("Point fixe atteint en %d itérations : ‖φ‖ + ‖ψ‖ = %.6e", iteration, phi_norm + psi_norm)
            return SolveState(a, c, history, ratios, iteration, True, "fixed_point", phi_norm, psi_norm,
                              problem.residual_norm(a, c), problem.phi_labels, problem.psi_labels)
        if streak >= CONTRACTION_PATIENCE:
            raise NonContractionError("l'itération de point fixe ne contracte pas",
                                      iteration=iteration, ratios=ratios[-CONTRACTION_PATIENCE:])
    raise MaxIterationsError(f"pas de convergence en {max_iter} itérations",
                             max_iter=max_iter, last_distance=history[-1] if history else None)


def _weighted_jacobian(problem, a, c, root_weights):
    """Jacobien du résidu fort pondéré par √w, colonnes (a, c)."""
    beta, alpha = problem.family.beta, problem.family.alpha
    phi, psis = problem.fields_at(a, c)
    total_u = problem.u + phi
    totals = [v_r + psi_r for v_r, psi_r in zip(problem.sheets, psis)]
    total_v = totals[0]
    phi_e = problem.phi_values
    psi_e = problem.psi_sheet_values

    d1_phi = problem.phi_laplacians - (3.0 * total_u ** 2 + beta * sum(t ** 2 for t in totals)) * phi_e
    d2_phi = -2.0 * beta * total_u * total_v * phi_e
    d1_psi = -2.0 * beta * total_u * sum(t * e for t, e in zip(totals, psi_e))
    potential = 3.0 * total_v ** 2 + beta * total_u ** 2
    d2_psi = problem.psi_laplacians - potential * psi_e[0]
    if alpha != 0.0 and len(totals) > 1:
        d2_psi = d2_psi - alpha * sum(t ** 2 for t in totals[1:]) * psi_e[0]
        d2_psi = d2_psi - 2.0 * alpha * total_v * sum(t * e for t, e in zip(totals[1:], psi_e[1:]))

    top = np.hstack([d1_phi.T, d1_psi.T])
    bottom = np.hstack([d2_phi.T, d2_psi.T])
    return np.vstack([top * root_weights[:, None], bottom * root_weights[:, None]])


def gauss_newton_full(family, basis, initial=None, max_iter=GAUSS_NEWTON_MAX_ITER, phi_basis=None,
                      rule=None, base_fields=None, problem=None):
    """
    Minimise ‖R(φ, ψ)‖²_{L²} sur le résidu fort complet, par pas de
    Gauss-Newton amortis (Armijo, constante 1e-4).

    Args:
        family: famille d'ansatz
        basis: base des ψ
        initial: SolveState de départ (défaut : zéro)
        max_iter: nombre maximal de pas
        phi_basis: base des φ
        rule: règle fixe de l'opérateur
        base_fields: couple (u₀, v₀) remplaçant (U, V)
        problem: DiscreteProblem déjà construit

    Returns:
        SolveState (meilleur état, historique des normes du résidu)

    Raises:
        LineSearchError: aucun pas accepté après 30 divisions par deux
    """
    problem = problem or discretize(family, basis, phi_basis, rule, base_fields)
    a = np.zeros(problem.phi_dim) if initial is None else np.array(initial.phi, dtype=float)
    c = np.zeros(problem.psi_dim) if initial is None else np.array(initial.psi, dtype=float)
    if a.shape != (problem.phi_dim,) or c.shape != (problem.psi_dim,):
        raise DomainError("état initial incompatible avec les bases",
                          phi=a.shape, psi=c.shape, expected=(problem.phi_dim, problem.psi_dim))
    root_weights = np.sqrt(np.clip(problem.weights, 0.0, None))

    def objective(a_, c_):
        r1, r2 = problem.strong_residual(a_, c_)
        return np.concatenate([r1 * root_weights, r2 * root_weights])

    residual = objective(a, c)
    value = 0.5 * float(residual @ residual)
    history = [float(np.sqrt(2.0 * value))]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        jacobian = _weighted_jacobian(problem, a, c, root_weights)
        step = lstsq(jacobian, -residual)[0]
        scale = 1.0 + float(np.linalg.norm(np.concatenate([a, c])))
        if float(np.linalg.norm(step)) <= 1e-12 * scale:
            converged = True
            break
        slope = float((jacobian.T @ residual) @ step)
        if slope >= 0.0:
            converged = True
            break
        t = 1.0
        for _ in range(MAX_LINE_SEARCH_HALVINGS + 1):
            trial_a = a + t * step[:problem.phi_dim]
            trial_c = c + t * step[problem.phi_dim:]
            trial = objective(trial_a, trial_c)
            trial_value = 0.5 * float(trial @ trial)
            if trial_value <= value + ARMIJO_CONSTANT * t * slope:
                break
            t *= 0.5
        else:
            raise LineSearchError("recherche linéaire sans pas acceptable",
                                  iteration=iterations, halvings=MAX_LINE_SEARCH_HALVINGS)
        a, c, residual, value = trial_a, trial_c, trial, trial_value
        history.append(float(np.sqrt(2.0 * value)))
        logger.debug("Gauss-Newton %d : résidu %.6e (pas %.3g)", iterations, history[-1], t)

    phi_norm, psi_norm = problem.energy_norms(a, c)
    logger.info("Gauss-Newton : résidu %.6e → %.6e en %d pas", history[0], history[-1], iterations)
    return SolveState(a, c, history, [], iterations, converged, "gauss_newton", phi_norm, psi_norm,
                      history[-1], problem.phi_labels, problem.psi_labels)


def psi_constraint_value(problem, state):
    """⟨ψ, Z⟩ pour les coefficients de l'état."""
    return float(problem.constraint @ state.psi) if problem.psi_dim else 0.0
