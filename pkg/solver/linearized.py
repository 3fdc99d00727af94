"""
Opérateur linéarisé L(φ, ψ) = (-Δφ - 3U²φ, -Δψ - 3V²ψ) discrétisé sur une base
de Galerkin, et sa plus petite valeur singulière en norme d'énergie.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, eigh, null_space

from config import RULE_RADIAL_ORDER
from errors import DomainError, EigensolverError
from geometry.fields import Peak
from bubbles.ansatz import bubble_family_field, kernel_direction_field, radial_field
from bubbles.profiles import KernelElement, kernel_field
from quadrature.regions import decompose
from quadrature.rules import build_rule
from quadrature.spec import QuadratureSpec
from solver.basis import GalerkinBasis, gram_matrix, operator_rule

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearizedSystem:
    """
    Matrices bloc-diagonales (φ puis ψ) de l'opérateur et du produit d'énergie.

    Args:
        matrix: M_ij = ∫ e_i (-Δe_j) - ∫ P e_i e_j, symétrisée
        gram: G_ij = ∫ e_i (-Δe_j), symétrisée
        constraint: g_i = ⟨e_i, Z⟩ pour les éléments de ψ
        phi_dim, psi_dim: tailles des blocs
        labels: noms des éléments, φ puis ψ
    """

    matrix: np.ndarray
    gram: np.ndarray
    constraint: np.ndarray
    phi_dim: int
    psi_dim: int
    labels: Tuple[str, ...] = ()

    def psi_slice(self):
        return slice(self.phi_dim, self.phi_dim + self.psi_dim)

    def to_frame(self):
        """Matrice de l'opérateur en DataFrame étiqueté (export CSV)."""
        labels = list(self.labels) or [str(i) for i in range(len(self.matrix))]
        return pd.DataFrame(self.matrix, index=labels, columns=labels)


def _symmetric(matrix):
    return 0.5 * (matrix + matrix.T)


def operator_block(elements, potential, rule):
    """(M, G) pour des éléments et un potentiel donné aux nœuds."""
    values = np.array([e.func(rule.nodes) for e in elements])
    gram = gram_matrix(elements, rule)
    mass = rule.gram(values * potential, values)
    return _symmetric(gram - mass), gram


def psi_elements(basis):
    """Éléments de ψ : la base, plus la direction Z symétrisée."""
    elements = list(basis.elements)
    labels = list(basis.labels)
    if basis.kernel_direction is not None:
        elements.append(basis.kernel_direction)
        labels.append("kernel_direction")
    return elements, labels


def assemble_linearized(family, basis, phi_basis=None, rule=None):
    """
    Assemble le système linéarisé autour de (U, V) ou (U, Ṽ).

    Args:
        family: famille d'ansatz
        basis: base des ψ (espace X ou X̃₂)
        phi_basis: base des φ (défaut : basis ; X̃₁ pour le tore)
        rule: règle fixe (défaut : operator_rule)

    Returns:
        LinearizedSystem
    """
    rule = rule or operator_rule(family)
    phi_basis = phi_basis or basis
    u = radial_field().func(rule.nodes)
    v = bubble_family_field(family, 1).func(rule.nodes)

    m_phi, g_phi = operator_block(phi_basis.elements, 3.0 * u ** 2, rule)
    elements, labels = psi_elements(basis)
    m_psi, g_psi = operator_block(elements, 3.0 * v ** 2, rule)

    z_laplacian = kernel_direction_field(family).neg_laplacian(rule.nodes)
    values = np.array([e.func(rule.nodes) for e in elements])
    constraint = rule.gram(values, z_laplacian[None, :])[:, 0]

    n_phi, n_psi = len(phi_basis.elements), len(elements)
    matrix = np.zeros((n_phi + n_psi, n_phi + n_psi))
    gram = np.zeros_like(matrix)
    matrix[:n_phi, :n_phi], gram[:n_phi, :n_phi] = m_phi, g_phi
    matrix[n_phi:, n_phi:], gram[n_phi:, n_phi:] = m_psi, g_psi
    logger.debug("Système linéarisé : %d + %d inconnues", n_phi, n_psi)
    return LinearizedSystem(matrix, gram, constraint, n_phi, n_psi,
                            tuple(f"phi:{l}" for l in phi_basis.labels) + tuple(f"psi:{l}" for l in labels))


def constraint_projector(system, project_out_z=True):
    """
    Matrice P dont les colonnes engendrent l'espace admissible :
    φ libre, ψ dans le noyau de la contrainte ⟨ψ, Z⟩ = 0.
    """
    n = system.phi_dim + system.psi_dim
    if not project_out_z or system.psi_dim == 0 or not np.any(system.constraint):
        return np.eye(n)
    kernel = null_space(system.constraint[None, :])
    projector = np.zeros((n, system.phi_dim + kernel.shape[1]))
    projector[:system.phi_dim, :system.phi_dim] = np.eye(system.phi_dim)
    projector[system.phi_dim:, system.phi_dim:] = kernel
    return projector


def generalized_spectrum(system, project_out_z=True):
    """Valeurs propres de M v = λ G v sur l'espace admissible."""
    projector = constraint_projector(system, project_out_z)
    matrix = projector.T @ system.matrix @ projector
    gram = projector.T @ system.gram @ projector
    try:
        return eigh(_symmetric(matrix), _symmetric(gram), eigvals_only=True)
    except (LinAlgError, ValueError) as exc:
        raise EigensolverError(f"échec du solveur propre généralisé : {exc}",
                               dimension=len(matrix)) from exc


def min_singular_value(system, project_out_z=True):
    """
    Plus petite valeur singulière de L en norme d'énergie.

    Args:
        system: LinearizedSystem
        project_out_z: impose ⟨ψ, Z⟩ = 0 (sinon la direction Z reste libre)

    Returns:
        min |λ| du problème généralisé M v = λ G v
    """
    spectrum = generalized_spectrum(system, project_out_z)
    value = float(np.min(np.abs(spectrum)))
    logger.debug("σ_min = %.6e (projection : %s)", value, project_out_z)
    return value


def kernel_sanity_system(spec=None, radial_order=RULE_RADIAL_ORDER, angular_level=None):
    """
    Système de contrôle à un seul élément Z⁰ autour de U : Z⁰ est dans le
    noyau de -Δ - 3U², la valeur singulière attendue est nulle.
    """
    spec = spec or QuadratureSpec()
    element = kernel_field(KernelElement(0, 1.0, (0.0, 0.0, 0.0, 0.0)))
    decomposition = decompose((Peak.at((0.0, 0.0, 0.0, 0.0), 1.0),), spec, element.symmetry)
    rule = build_rule(decomposition, radial_order, angular_level)
    if rule.size == 0:
        raise DomainError("règle de contrôle vide")
    u = radial_field().func(rule.nodes)
    matrix, gram = operator_block([element], 3.0 * u ** 2, rule)
    return LinearizedSystem(matrix, gram, np.zeros(1), 0, 1, ("psi:Z0",))


def basis_from(elements, space, labels=()):
    """
    Base explicite formée des éléments donnés, sans symétrisation ni contrôle
    de conditionnement.

    Sert aux sous-espaces imposés : la vérification de la récupération exacte
    de U (sous-commande verify) et les systèmes de contrôle des tests. La
    matrice de Gram n'est pas calculée ; elle l'est par l'assemblage qui
    reçoit la base.
    """
    return GalerkinBasis(tuple(elements), space, tuple(labels) or tuple(e.name for e in elements))
