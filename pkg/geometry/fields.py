"""
Champs scalaires sur R^4.

Un champ est une fermeture d'évaluation vectorisée (tableaux de forme (..., 4)),
accompagnée éventuellement de son laplacien changé de signe sous forme fermée,
des pics qu'il déclare (centre, largeur) pour guider la quadrature, et des
symétries qu'il certifie.
"""
from dataclasses import dataclass
from typing import Callable, FrozenSet, Optional, Tuple

import numpy as np

from errors import DomainError

# Étiquettes de symétrie
RADIAL = "radial"
KELVIN = "kelvin"
AXIAL = "axial"  # invariance par rotation du plan (x3, x4)


@dataclass(frozen=True)
class Peak:
    """Pic déclaré d'un champ : centre dans R^4 et largeur de concentration."""

    center: Tuple[float, float, float, float]
    width: float

    @classmethod
    def at(cls, center, width):
        return cls(tuple(float(c) for c in np.asarray(center, dtype=float).reshape(4)), float(width))


@dataclass(frozen=True)
class ScalarField:
    """
    Champ scalaire évaluable sur des tableaux de points.

    Args:
        func: fonction (..., 4) -> (...)
        neg_laplacian: fonction (..., 4) -> (...) donnant -Δf sous forme fermée
        peaks: pics déclarés
        symmetry: étiquettes des invariances certifiées
        name: nom lisible
    """

    func: Callable[[np.ndarray], np.ndarray]
    neg_laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    peaks: Tuple[Peak, ...] = ()
    symmetry: FrozenSet[str] = frozenset()
    name: str = "f"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    @property
    def has_laplacian(self):
        return self.neg_laplacian is not None

    def minus_laplacian(self, x):
        if self.neg_laplacian is None:
            raise DomainError(f"le champ {self.name} n'a pas de laplacien fermé", field=self.name)
        return self.neg_laplacian(np.asarray(x, dtype=float))

    def certifies(self, tag):
        """Indique si le champ est invariant sous l'opération étiquetée `tag`."""
        if tag in self.symmetry:
            return True
        return RADIAL in self.symmetry and tag != KELVIN

    def rotation_order(self, prefix):
        """Ordre k de la plus grande invariance `prefix:k` certifiée, ou None."""
        orders = [int(tag.split(":", 1)[1]) for tag in self.symmetry if tag.startswith(prefix + ":")]
        return max(orders) if orders else None


def merge_peaks(*fields):
    peaks = []
    for field in fields:
        for peak in field.peaks:
            if peak not in peaks:
                peaks.append(peak)
    return tuple(peaks)


def merge_symmetry(*fields, linear=False):
    """
    Symétries d'une combinaison de champs.

    Une invariance orthogonale passe aux sommes et aux produits ; l'invariance
    de Kelvin (à poids |x|^-2) ne passe qu'aux combinaisons linéaires.
    """
    orthogonal = None
    for field in fields:
        if RADIAL in field.symmetry:
            continue
        tags = set(field.symmetry) - {KELVIN}
        orthogonal = tags if orthogonal is None else orthogonal & tags
    result = {RADIAL} if orthogonal is None else orthogonal
    if linear and all(KELVIN in field.symmetry for field in fields):
        result.add(KELVIN)
    return frozenset(result)


def pointwise(func, *fields, name="g"):
    """Champ x -> func(f1(x), ..., fn(x)), sans laplacien."""
    def evaluate(x):
        return func(*(field.func(x) for field in fields))
    return ScalarField(evaluate, None, merge_peaks(*fields), merge_symmetry(*fields), name)


def linear_combination(fields, coefficients, name="combinaison"):
    """Combinaison linéaire de champs ; le laplacien est conservé si tous en ont un."""
    fields = tuple(fields)
    coefficients = [float(c) for c in coefficients]

    def evaluate(x):
        total = np.zeros(x.shape[:-1])
        for c, field in zip(coefficients, fields):
            if c != 0.0:
                total = total + c * field.func(x)
        return total

    neg_laplacian = None
    if all(field.has_laplacian for field in fields):
        def neg_laplacian(x):
            total = np.zeros(x.shape[:-1])
            for c, field in zip(coefficients, fields):
                if c != 0.0:
                    total = total + c * field.neg_laplacian(x)
            return total

    return ScalarField(evaluate, neg_laplacian, merge_peaks(*fields),
                       merge_symmetry(*fields, linear=True), name)


def with_symmetry(field, tags):
    """Copie du champ portant les étiquettes données."""
    return ScalarField(field.func, field.neg_laplacian, field.peaks, frozenset(tags), field.name)


def zero_field():
    def zeros(x):
        return np.zeros(np.asarray(x).shape[:-1])
    return ScalarField(zeros, zeros, (), frozenset({RADIAL, KELVIN}), "0")


def squared_norm(x):
    return np.einsum("...i,...i->...", x, x)
