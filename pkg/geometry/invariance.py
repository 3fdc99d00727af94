"""
Contrôle et imposition des invariances : rapport de symétrie par échantillonnage,
moyenne sur les groupes engendrés, générateurs des espaces fonctionnels.
"""
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from config import DEFAULT_SEED, SYMMETRY_TOL
from geometry.fields import AXIAL, linear_combination, with_symmetry
from geometry.symmetry import (
    block_rotation,
    conjugate_function,
    coordinate_swap,
    kelvin,
    reflection,
    sheet_rotation,
    theta_rotation,
)

logger = logging.getLogger(__name__)

_MIN_SAMPLE_NORM = 1e-3


@dataclass(frozen=True)
class SymmetryReport:
    """Écart maximal |f - f∘g| par opération."""

    deviations: Dict[str, float]
    tol: float

    @property
    def passed(self):
        return all(d <= self.tol for d in self.deviations.values())

    def to_dict(self):
        return {"tol": self.tol, "deviations": dict(self.deviations), "passed": self.passed}


def sample_points(count, seed=DEFAULT_SEED, scale=1.0):
    """Points gaussiens de R^4, ceux trop proches de l'origine étant tirés à nouveau."""
    rng = np.random.default_rng(seed)
    points = scale * rng.standard_normal((count, 4))
    while True:
        small = np.linalg.norm(points, axis=-1) < _MIN_SAMPLE_NORM
        if not np.any(small):
            return points
        points[small] = scale * rng.standard_normal((int(small.sum()), 4))


def symmetry_report(f, ops, sample_count=200, tol=SYMMETRY_TOL, seed=DEFAULT_SEED):
    """
    Mesure l'invariance d'un champ sous une liste d'opérations.

    Args:
        f: champ scalaire
        ops: opérations de symétrie
        sample_count: nombre de points tirés
        tol: seuil d'acceptation
        seed: graine du tirage

    Returns:
        SymmetryReport
    """
    points = sample_points(sample_count, seed)
    reference = f(points)
    deviations = {}
    for op in ops:
        image = conjugate_function(op, f)(points)
        deviations[op.name] = float(np.max(np.abs(reference - image)))
    report = SymmetryReport(deviations, tol)
    if not report.passed:
        logger.debug("Symétrie non vérifiée pour %s : %s", f.name, deviations)
    return report


def preserves_axis_plane(op):
    """Vrai si op laisse stable le plan (x3, x4) : l'invariance axiale est conservée."""
    if op.conformal:
        return True
    return not np.any(op.matrix[2:, :2]) and not np.any(op.matrix[:2, 2:])


def group_average(f, op):
    """Moyenne de f sur le groupe cyclique engendré par op."""
    images = [conjugate_function(op.power(n), f) for n in range(op.order)]
    average = linear_combination(images, [1.0 / op.order] * op.order, name=f"<{f.name}>")
    tags = f.symmetry | {op.tag}
    if not preserves_axis_plane(op):
        tags = tags - {AXIAL}
    return with_symmetry(average, tags)


def symmetrize(f, generators):
    """
    Projette f sur les champs invariants par le groupe engendré.

    Les générateurs doivent être ordonnés de sorte que chacun normalise le
    sous-groupe engendré par les précédents ; les moyennes successives sont
    alors invariantes par tout le groupe.
    """
    for op in generators:
        if f.certifies(op.tag):
            continue
        f = group_average(f, op)
    return f


def ring_space_generators(k):
    """Générateurs de l'espace X : Θ_k, réflexions de x2, x3, x4, Kelvin."""
    return [theta_rotation(k), reflection((1,)), reflection((2,)), reflection((3,)), kelvin()]


def torus_space_generators(k, q, include_sheet_rotation=True):
    """
    Générateurs des espaces du tore : R_k, T_{π/q} (espace X̃₁ seulement),
    réflexion conjointe de x2 et x4, échange des plans, Kelvin.
    """
    generators = [block_rotation(k)]
    if include_sheet_rotation and q > 1:
        generators.append(sheet_rotation(q))
    generators.extend([reflection((1, 3)), coordinate_swap(), kelvin()])
    return generators
