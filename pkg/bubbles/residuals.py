"""
Termes d'erreur en forme forte.

Numérotation des termes d'erreur (distincte de celle des composantes) :
1 -> équation de la composante radiale U, 2 -> équation de la famille de bulles.

Anneau :
    E1 = β U V²
    E2 = V³ - Σ U_i³ + β U² V
Tore :
    E1 = β U Σ_r Ṽ_r²
    E2 = Ṽ³ - Σ U_i³ + β U² Ṽ + α Ṽ Σ_{r>=2} Ṽ_r²
"""
import numpy as np

from errors import DomainError
from geometry.fields import ScalarField, merge_symmetry
from geometry.symmetry import apply_op
from bubbles.ansatz import bubble_family_field, radial_field, sheet_transform
from bubbles.profiles import bubble_values


def cubic_cross_terms(values):
    """
    (Σ u_i)³ - Σ u_i³ sans annulation catastrophique.

    Évalué comme Σ_i u_i·a_i·(S + u_i), où a_i = Σ_{j≠i} u_j est formé par
    sommes préfixe et suffixe, jamais par S - u_i.

    Args:
        values: tableau (n, ...) des valeurs positives u_i
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return np.zeros(values.shape[1:])
    prefix = np.cumsum(values, axis=0)
    suffix = np.cumsum(values[::-1], axis=0)[::-1]
    zeros = np.zeros((1,) + values.shape[1:])
    before = np.concatenate([zeros, prefix[:-1]])
    after = np.concatenate([suffix[1:], zeros])
    others = before + after
    total = prefix[-1]
    return np.sum(values * others * (total + values), axis=0)


def sheet_points(family, x):
    """Points T_r x pour r = 1..q (une seule nappe pour l'anneau)."""
    config = family.config
    if not config.is_torus:
        return [np.asarray(x, dtype=float)]
    return [apply_op(sheet_transform(config.q, r), x) for r in range(1, config.q + 1)]


def _sheet_values(family, x):
    centers = family.config.sheet_centers(1)
    bubbles = bubble_values(centers, family.delta, x)
    sheets = [np.sum(bubbles, axis=0)]
    for y in sheet_points(family, x)[1:]:
        sheets.append(np.sum(bubble_values(centers, family.delta, y), axis=0))
    return bubbles, sheets


def error_terms(family, x):
    """(E1, E2) au point (ou tableau de points) x."""
    x = np.asarray(x, dtype=float)
    u = radial_field()(x)
    bubbles, sheets = _sheet_values(family, x)
    v = sheets[0]
    beta, alpha = family.beta, family.alpha
    e1 = beta * u * sum(s ** 2 for s in sheets)
    e2 = cubic_cross_terms(bubbles) + beta * u ** 2 * v
    if len(sheets) > 1 and alpha != 0.0:
        e2 = e2 + alpha * v * sum(s ** 2 for s in sheets[1:])
    return e1, e2


def residual_strong(family, index, x):
    """
    Terme d'erreur E_index = -Δu* - (non-linéarité)(u*) en forme forte.

    Args:
        family: famille d'ansatz
        index: 1 (équation radiale) ou 2 (équation des bulles)
        x: point ou tableau de points
    """
    if index not in (1, 2):
        raise DomainError(f"indice de terme d'erreur hors de 1..2 : {index}", index=index)
    return error_terms(family, x)[index - 1]


def _family_symmetry(family):
    return merge_symmetry(bubble_family_field(family, 1), radial_field())


def error_field(family, index):
    """Champ scalaire E_index, portant les symétries de la famille."""
    if index not in (1, 2):
        raise DomainError(f"indice de terme d'erreur hors de 1..2 : {index}", index=index)

    def evaluate(x):
        return residual_strong(family, index, x)

    peaks = bubble_family_field(family, 1).peaks
    if family.config.is_torus:
        peaks = tuple(p for r in range(1, family.q + 1) for p in bubble_family_field(family, r).peaks)
    return ScalarField(evaluate, None, peaks, _family_symmetry(family), f"E{index}")


def alpha_term_field(family):
    """α Ṽ Σ_{r>=2} Ṽ_r², contribution intra-famille du tore."""
    def evaluate(x):
        _, sheets = _sheet_values(family, x)
        if len(sheets) < 2:
            return np.zeros(np.asarray(x).shape[:-1])
        return family.alpha * sheets[0] * sum(s ** 2 for s in sheets[1:])

    peaks = tuple(p for r in range(1, family.q + 1) for p in bubble_family_field(family, r).peaks)
    return ScalarField(evaluate, None, peaks, _family_symmetry(family), "alpha_term")


def cross_term_field(family):
    """V³ - Σ U_i³ (premier polygone), intégrande de I₁ sans le facteur Z."""
    centers = family.config.sheet_centers(1)

    def evaluate(x):
        return cubic_cross_terms(bubble_values(centers, family.delta, x))

    return ScalarField(evaluate, None, bubble_family_field(family, 1).peaks,
                       _family_symmetry(family), "cross")
