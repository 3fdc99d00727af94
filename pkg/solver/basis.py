"""
Bases de Galerkin des espaces symétriques X (anneau), X̃₁ et X̃₂ (tore).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import DEFAULT_PEAK_RADIUS, MAX_GRAM_CONDITION, RULE_ORACLE_TOL, RULE_RADIAL_ORDER
from errors import DomainError, IllConditionedBasisError
from geometry.fields import AXIAL, KELVIN, Peak, ScalarField
from geometry.invariance import ring_space_generators, symmetrize, torus_space_generators
from bubbles.ansatz import kernel_direction_field, radial_field, ring_tags, torus_tags
from bubbles.profiles import KernelElement, bubble_sum_field, envelope_field, kernel_field
from quadrature.regions import decompose
from quadrature.rules import build_rule
from quadrature.spec import QuadratureSpec
from reduction.coefficients import A1, U3_INTEGRAL, U4_INTEGRAL

logger = logging.getLogger(__name__)

RING_SPACE = "X"
TORUS_PHI_SPACE = "X1"
TORUS_PSI_SPACE = "X2"

# Les moyennes de Kelvin (1 + r^(2s-2)) (1+r²)^-s doivent rester indépendantes :
# s = 2 redonnerait e_1 / 2.
_ENVELOPE_EXPONENTS = (1.0, 1.5, 2.5, 3.5, 4.5)


@dataclass(frozen=True, eq=False)
class GalerkinBasis:
    """
    Famille d'éléments symétriques, chacun avec son laplacien fermé.

    Args:
        elements: champs de la base
        space: "X", "X1" ou "X2"
        labels: noms des éléments
        kernel_direction: direction Z symétrisée (espaces de ψ)
        gram: matrice (∫ e_i (-Δe_j)) sur la règle de l'opérateur
    """

    elements: Tuple[ScalarField, ...]
    space: str
    labels: Tuple[str, ...] = ()
    kernel_direction: Optional[ScalarField] = None
    gram: Optional[np.ndarray] = None

    @property
    def dimension(self):
        return len(self.elements)

    @property
    def counts(self):
        """(nombre de largeurs, nombre d'enveloppes) d'après les étiquettes."""
        widths = sum(1 for label in self.labels if label.startswith("bubble_"))
        radial = sum(1 for label in self.labels if label.startswith("envelope_"))
        return widths, radial


def space_generators(family, space):
    config = family.config
    if space == RING_SPACE:
        return ring_space_generators(config.k)
    if space == TORUS_PHI_SPACE:
        return torus_space_generators(config.k, config.q, include_sheet_rotation=True)
    if space == TORUS_PSI_SPACE:
        return torus_space_generators(config.k, config.q, include_sheet_rotation=False)
    raise DomainError(f"espace inconnu : {space}", space=space)


def _space_centers_and_tags(family, space):
    config = family.config
    if space == RING_SPACE:
        return config.centers, ring_tags(config.k)
    if space == TORUS_PHI_SPACE:
        tags = set(torus_tags(config.k))
        if config.q > 1:
            tags.add(f"sheet_rotation:{config.q}")
        return config.centers, frozenset(tags)
    return config.sheet_centers(1), torus_tags(config.k)


def auxiliary_widths(delta, count):
    """Largeurs δ·2^j centrées sur δ : δ/2, δ, 2δ pour count = 3."""
    exponents = np.arange(count) - count // 2
    return [float(delta * 2.0 ** e) for e in exponents]


def operator_rule(family, spec=None, radial_order=RULE_RADIAL_ORDER, angular_level=None):
    """
    Règle fixe de l'opérateur : boules autour de tous les centres, à la plus
    petite largeur auxiliaire, extérieur réduit par la rotation de la famille.
    Les espaces de l'anneau sont axiaux (θ2 intégré exactement) ; ceux du tore
    ne le sont pas et utilisent le niveau RULE_FULL_ANGULAR_LEVEL.
    """
    config = family.config
    spec = spec or QuadratureSpec(peak_radius=DEFAULT_PEAK_RADIUS, use_symmetry=True)
    peaks = tuple(Peak.at(c, 0.5 * config.delta) for c in config.centers)
    tag = f"block_rotation:{config.k}" if config.is_torus else f"rotation:{config.k}"
    tags = frozenset({tag}) if config.is_torus else frozenset({tag, AXIAL})
    decomposition = decompose(peaks, spec, tags)
    rule = build_rule(decomposition, radial_order, angular_level)
    errors = rule_oracle_errors(rule)
    logger.debug("Règle de l'opérateur : %d nœuds, écarts %s", rule.size, errors)
    if max(errors.values()) > RULE_ORACLE_TOL:
        logger.warning("Règle de l'opérateur imprécise (k = %d, δ = %.3g) : %s",
                       config.k, config.delta, {name: f"{value:.2e}" for name, value in errors.items()})
    return rule


def rule_oracle_errors(rule):
    """
    Écarts relatifs de la règle sur les intégrales fermées ∫U⁴, ∫U³ et
    ‖∇Z⁰‖² = ∫ 3U²(Z⁰)².
    """
    u = radial_field().func(rule.nodes)
    z = kernel_field(KernelElement(0)).func(rule.nodes)
    values = {
        "U4": (rule.integrate(u ** 4), U4_INTEGRAL),
        "U3": (rule.integrate(u ** 3), U3_INTEGRAL),
        "Z0_energy": (rule.integrate(3.0 * u ** 2 * z ** 2), A1),
    }
    return {name: abs(float(value) - exact) / exact for name, (value, exact) in values.items()}


def gram_matrix(elements, rule):
    values = np.array([e.func(rule.nodes) for e in elements])
    laplacians = np.array([e.neg_laplacian(rule.nodes) for e in elements])
    gram = rule.gram(values, laplacians)
    return 0.5 * (gram + gram.T)


def build_basis(family, widths_count=3, radial_count=3, space=None, rule=None):
    """
    Construit et symétrise la base d'un espace.

    Args:
        family: famille d'ansatz
        widths_count: nombre de largeurs auxiliaires par orbite
        radial_count: nombre d'enveloppes radiales (1+|x|²)^-s
        space: "X" (anneau), "X1" ou "X2" (tore ; défaut "X2")
        rule: règle fixe pour la matrice de Gram (défaut : operator_rule)

    Returns:
        GalerkinBasis

    Raises:
        IllConditionedBasisError: conditionnement de Gram > MAX_GRAM_CONDITION
    """
    if widths_count < 0 or radial_count < 0 or widths_count + radial_count < 1:
        raise DomainError("la base doit contenir au moins un élément",
                          widths_count=widths_count, radial_count=radial_count)
    if radial_count > len(_ENVELOPE_EXPONENTS):
        raise DomainError(f"au plus {len(_ENVELOPE_EXPONENTS)} enveloppes radiales", radial_count=radial_count)
    if space is None:
        space = TORUS_PSI_SPACE if family.config.is_torus else RING_SPACE
    generators = space_generators(family, space)
    centers, tags = _space_centers_and_tags(family, space)

    elements, labels = [], []
    for width in auxiliary_widths(family.delta, widths_count):
        profile = bubble_sum_field(centers, width, tags, name=f"b[{width:.4g}]")
        elements.append(symmetrize(profile, generators))
        labels.append(f"bubble_{width:.6g}")
    for s in _ENVELOPE_EXPONENTS[:radial_count]:
        elements.append(symmetrize(envelope_field(s), generators))
        labels.append(f"envelope_{s:g}")

    kernel = None
    if space != TORUS_PHI_SPACE:
        kernel = symmetrize(kernel_direction_field(family), generators)

    rule = rule or operator_rule(family)
    gram = gram_matrix(elements, rule)
    condition = float(np.linalg.cond(gram))
    logger.debug("Base %s : %d éléments, conditionnement %.3e", space, len(elements), condition)
    if not np.isfinite(condition) or condition > MAX_GRAM_CONDITION:
        raise IllConditionedBasisError(f"matrice de Gram mal conditionnée : {condition:.3e}",
                                       condition=condition, space=space)
    return GalerkinBasis(tuple(elements), space, tuple(labels), kernel, gram)


def is_kelvin_symmetric(basis):
    return all(KELVIN in e.symmetry for e in basis.elements)
