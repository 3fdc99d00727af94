"""
Bulles U_{δ,ξ} = c4 δ/(δ² + |x-ξ|²) et éléments du noyau du linéarisé.

Tous les laplaciens sont donnés sous forme fermée : ΔU_{δ,ξ} = -U_{δ,ξ}³ et
-ΔZ_{δ,ξ} = 3U_{δ,ξ}² Z_{δ,ξ}.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from config import C4
from errors import DomainError
from geometry.fields import AXIAL, KELVIN, RADIAL, Peak, ScalarField, squared_norm

ORIGIN = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BubbleField:
    delta: float = 1.0
    xi: Tuple[float, float, float, float] = ORIGIN
    c4: float = C4

    def __post_init__(self):
        if not self.delta > 0.0:
            raise DomainError(f"largeur de bulle non positive : {self.delta}", delta=self.delta)


def _offsets(xi, x):
    return np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)


def bubble_eval(field, x):
    d2 = squared_norm(_offsets(field.xi, x))
    return field.c4 * field.delta / (field.delta ** 2 + d2)


def bubble_grad(field, x):
    y = _offsets(field.xi, x)
    denominator = (field.delta ** 2 + squared_norm(y)) ** 2
    return -2.0 * field.c4 * field.delta * y / denominator[..., None]


def bubble_laplacian(field, x):
    return -bubble_eval(field, x) ** 3


def _in_axis_plane(xi):
    return xi[2] == 0.0 and xi[3] == 0.0


def _bubble_tags(field):
    center = np.asarray(field.xi)
    if np.any(center != 0.0):
        return frozenset({AXIAL}) if _in_axis_plane(center) else frozenset()
    tags = {RADIAL}
    if field.delta == 1.0:
        tags.add(KELVIN)
    return frozenset(tags)


def bubble_field(delta=1.0, xi=ORIGIN, name=None):
    """Champ scalaire de la bulle U_{δ,ξ} (U lorsque δ = 1, ξ = 0)."""
    profile = BubbleField(float(delta), tuple(float(c) for c in xi))

    def evaluate(x):
        return bubble_eval(profile, x)

    def neg_laplacian(x):
        return bubble_eval(profile, x) ** 3

    return ScalarField(evaluate, neg_laplacian, (Peak.at(profile.xi, profile.delta),),
                       _bubble_tags(profile), name or f"U[{delta:.6g}]")


def kelvin_bubble_image(delta, xi):
    """Image de Kelvin de U_{δ,ξ} : la bulle U_{δ/λ, ξ/λ}, λ = δ² + |ξ|²."""
    xi = np.asarray(xi, dtype=float)
    scale = delta ** 2 + float(xi @ xi)
    return delta / scale, xi / scale


@dataclass(frozen=True)
class KernelElement:
    """Élément Z^j_{δ,ξ} du noyau, j = 0 (dilatation) ou 1..4 (translations)."""

    j: int
    delta: float = 1.0
    xi: Tuple[float, float, float, float] = ORIGIN

    def __post_init__(self):
        if self.j not in (0, 1, 2, 3, 4):
            raise DomainError(f"indice d'élément du noyau hors de 0..4 : {self.j}", j=self.j)


def kernel_eval(element, x):
    """
    Z⁰_{δ,ξ} = δ(δ² - |x-ξ|²)/(δ² + |x-ξ|²)², Zʲ_{δ,ξ} = δ²(x-ξ)_j/(δ² + |x-ξ|²)².
    """
    y = _offsets(element.xi, x)
    d2 = squared_norm(y)
    delta = element.delta
    denominator = (delta ** 2 + d2) ** 2
    if element.j == 0:
        return delta * (delta ** 2 - d2) / denominator
    return delta ** 2 * y[..., element.j - 1] / denominator


def kernel_field(element, name=None):
    profile = BubbleField(element.delta, element.xi)

    def evaluate(x):
        return kernel_eval(element, x)

    def neg_laplacian(x):
        return 3.0 * bubble_eval(profile, x) ** 2 * kernel_eval(element, x)

    center = np.asarray(element.xi)
    if element.j == 0 and not np.any(center != 0.0):
        tags = frozenset({RADIAL})
    elif element.j in (0, 1, 2) and _in_axis_plane(center):
        tags = frozenset({AXIAL})
    else:
        tags = frozenset()
    return ScalarField(evaluate, neg_laplacian, (Peak.at(element.xi, element.delta),), tags,
                       name or f"Z{element.j}[{element.delta:.6g}]")


def envelope_field(s):
    """Enveloppe radiale e_s = c4 (1 + |x|²)^-s ; s = 1 donne U."""
    s = float(s)

    def evaluate(x):
        return C4 * (1.0 + squared_norm(x)) ** (-s)

    def neg_laplacian(x):
        r2 = squared_norm(x)
        return -4.0 * s * C4 * (1.0 + r2) ** (-s - 2.0) * ((s - 1.0) * r2 - 2.0)

    tags = {RADIAL, KELVIN} if s == 1.0 else {RADIAL}
    return ScalarField(evaluate, neg_laplacian, (Peak.at(ORIGIN, 1.0),), frozenset(tags), f"e[{s:g}]")


def bubble_values(centers, delta, x):
    """Valeurs des bulles de largeur δ aux centres donnés : tableau (n, ...)."""
    x = np.asarray(x, dtype=float)
    centers = np.asarray(centers, dtype=float)
    d2 = np.sum((x[None, ...] - centers.reshape((len(centers),) + (1,) * (x.ndim - 1) + (4,))) ** 2, axis=-1)
    return C4 * delta / (delta ** 2 + d2)


def bubble_sum_field(centers, delta, tags=frozenset(), name="V"):
    """Somme Σ_i U_{δ,ξ_i}, avec laplacien Σ_i U_{δ,ξ_i}³."""
    centers = np.asarray(centers, dtype=float)

    def evaluate(x):
        return np.sum(bubble_values(centers, delta, x), axis=0)

    def neg_laplacian(x):
        return np.sum(bubble_values(centers, delta, x) ** 3, axis=0)

    peaks = tuple(Peak.at(c, delta) for c in centers)
    return ScalarField(evaluate, neg_laplacian, peaks, frozenset(tags), name)


def kernel_sum_field(centers, delta, tags=frozenset(), name="Z"):
    """Somme Σ_i Z⁰_{δ,ξ_i} des directions de dilatation."""
    elements = [KernelElement(0, delta, tuple(c)) for c in np.asarray(centers, dtype=float)]

    def evaluate(x):
        return sum(kernel_eval(e, x) for e in elements)

    def neg_laplacian(x):
        total = 0.0
        for e in elements:
            total = total + 3.0 * bubble_eval(BubbleField(e.delta, e.xi), x) ** 2 * kernel_eval(e, x)
        return total

    peaks = tuple(Peak.at(e.xi, delta) for e in elements)
    return ScalarField(evaluate, neg_laplacian, peaks, frozenset(tags), name)
