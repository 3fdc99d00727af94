"""
Découpage de R^4 en boules autour des pics et en un extérieur compactifié.

Une partition de l'unité analytique sépare les deux : la boule de centre c et
de rayon R porte le poids w(|x-c|/R), w(u) = exp(-ln2 · u^6), l'extérieur le
poids 1 - Σ w. Le poids vaut 1/2 en u = 1 et devient négligeable (< 2^-39)
au-delà de BALL_EXTENT ; la boule est tronquée à ce rayon.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import BALL_NEGLIGIBLE_EXPONENT, BALL_WEIGHT_POWER
from errors import SymmetryError
from geometry.configurations import orbit_representatives
from geometry.fields import AXIAL, RADIAL
from geometry.symmetry import block_rotation, theta_rotation
from quadrature.spec import ExteriorMap

logger = logging.getLogger(__name__)

# Écart minimal fictif pour un pic isolé
_ISOLATED_SPACING = 2.0
# Largeur au-delà de laquelle un pic n'est pas concentré
_NARROW_WIDTH = 0.25
# Rayon réduit au-delà duquel le poids d'une boule est négligeable
BALL_EXTENT = (BALL_NEGLIGIBLE_EXPONENT / math.log(2.0)) ** (1.0 / BALL_WEIGHT_POWER)
# Ruptures radiales dans la zone de transition (en unités du rayon)
_TRANSITION = (0.5, 0.75, 1.0, 1.25, 1.5)


def ball_profile(u):
    """w(u) = exp(-ln2 · u^6) : proche de 1 pour u < 1/2, 1/2 en u = 1."""
    u = np.asarray(u, dtype=float)
    return np.exp(-math.log(2.0) * u ** BALL_WEIGHT_POWER)


def cluster_peaks(peaks):
    """Fusionne les pics distants de moins que la plus grande des deux largeurs."""
    clusters = []
    for peak in peaks:
        center = np.asarray(peak.center, dtype=float)
        for index, (other, width) in enumerate(clusters):
            if np.linalg.norm(center - other) <= max(width, peak.width):
                clusters[index] = (other, min(width, peak.width))
                break
        else:
            clusters.append((center, peak.width))
    return clusters


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    width: float
    radius: float
    multiplicity: int = 1

    @property
    def scaled_radius(self):
        return self.radius / self.width

    @property
    def in_axis_plane(self):
        """Centre dans le plan (x1, x2) : la boule hérite de l'invariance axiale."""
        return bool(self.center[2] == 0.0 and self.center[3] == 0.0)

    def radial_breaks(self):
        """Points de rupture en t = |x-c|/largeur : dyadiques, transition, puis extension."""
        scale = self.scaled_radius
        breaks = {0.0, 0.5, BALL_EXTENT * scale}
        breaks.update(u * scale for u in _TRANSITION)
        level = 1.0
        while level < _TRANSITION[0] * scale:
            breaks.add(level)
            level *= 2.0
        return sorted(breaks)

    def points(self, t, directions):
        return self.center + (self.width * t) * directions

    def jacobian(self, t):
        return self.width ** 4 * t ** 3


@dataclass(frozen=True)
class ExteriorPiece:
    """Morceau radial de l'extérieur : "inner" (r dans [0, 1]), "outer" (s = 1/r) ou "tangent"."""

    kind: str
    lower: float
    upper: float
    breaks: Tuple[float, ...]

    def radius(self, t):
        if self.kind == "inner":
            return t
        if self.kind == "outer":
            return 1.0 / t
        return np.tan(t)

    def jacobian(self, t):
        if self.kind == "inner":
            return t ** 3
        if self.kind == "outer":
            return t ** -5
        return np.tan(t) ** 3 / np.cos(t) ** 2


@dataclass(frozen=True)
class Decomposition:
    """
    Découpage d'un intégrande.

    Args:
        balls: boules représentatives, avec leur multiplicité d'orbite
        weight_balls: toutes les boules (pour le poids de l'extérieur)
        pieces: morceaux radiaux de l'extérieur
        sector_order: k si l'extérieur est réduit à θ1 ∈ [-π/k, π/k]
        coupled: si vrai, θ2 = θ1 + χ (réduction par R_k)
        axial: intégrande invariant par rotation du plan (x3, x4) ; θ2 est
            alors intégré exactement
    """

    balls: Tuple[Ball, ...]
    weight_balls: Tuple[Ball, ...]
    pieces: Tuple[ExteriorPiece, ...]
    sector_order: Optional[int] = None
    coupled: bool = False
    axial: bool = False

    @property
    def exterior_multiplicity(self):
        return self.sector_order or 1

    @property
    def region_count(self):
        return len(self.balls) + len(self.pieces)

    def ball_is_axial(self, ball):
        return self.axial and ball.in_axis_plane

    def exterior_weight(self, x):
        weight = np.ones(x.shape[:-1])
        for ball in self.weight_balls:
            distance = np.linalg.norm(x - ball.center, axis=-1)
            weight = weight - ball_profile(distance / ball.radius)
        return weight

    def ball_weight(self, ball, t):
        return ball_profile(ball.width * t / ball.radius)


def _reduction_op(symmetry):
    block = [int(tag.split(":")[1]) for tag in symmetry if tag.startswith("block_rotation:")]
    if block:
        return block_rotation(max(block)), True
    ring = [int(tag.split(":")[1]) for tag in symmetry if tag.startswith("rotation:")]
    if ring:
        return theta_rotation(max(ring)), False
    return None, False


def _exterior_pieces(balls, exterior_map):
    radii = {0.25, 0.5, 2.0}
    offsets = (*_TRANSITION[::2], BALL_EXTENT)
    for ball in balls:
        norm = float(np.linalg.norm(ball.center))
        for u in offsets:
            for radius in (norm - u * ball.radius, norm + u * ball.radius):
                if radius > 0.0:
                    radii.add(radius)
    radii = sorted(radii)
    if ExteriorMap.parse(exterior_map) is ExteriorMap.TANGENT:
        breaks = [math.atan(r) for r in radii]
        return (ExteriorPiece("tangent", 0.0, math.pi / 2.0, tuple(breaks)),)
    inner = tuple(r for r in radii if r < 1.0)
    outer = tuple(sorted(1.0 / r for r in radii if r > 1.0))
    return (ExteriorPiece("inner", 0.0, 1.0, inner), ExteriorPiece("outer", 0.0, 1.0, outer))


def decompose(peaks, spec, symmetry=frozenset()):
    """
    Construit les boules et l'extérieur pour des pics donnés.

    L'invariance axiale (étiquettes AXIAL ou RADIAL) est toujours exploitée,
    indépendamment de `spec.use_symmetry` qui ne gouverne que la réduction
    par rotation.

    Args:
        peaks: pics déclarés par l'intégrande
        spec: QuadratureSpec
        symmetry: étiquettes certifiées par l'intégrande

    Returns:
        Decomposition
    """
    clusters = cluster_peaks(peaks)
    narrow = [(c, w) for c, w in clusters if w < _NARROW_WIDTH]
    if len(narrow) > 1:
        centers = np.array([c for c, _ in narrow])
        gaps = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        spacing = float(np.min(gaps[np.triu_indices(len(narrow), 1)]))
    else:
        spacing = _ISOLATED_SPACING
    radius = spec.peak_radius * spacing
    balls = tuple(Ball(c, w, radius) for c, w in narrow if w <= radius / 2.0)
    axial = AXIAL in symmetry or RADIAL in symmetry

    sector_order, coupled, representatives = None, False, balls
    if spec.use_symmetry:
        op, coupled_op = _reduction_op(symmetry)
        if op is None:
            logger.info("Aucune rotation certifiée : intégration sur R^4 entier")
        else:
            try:
                orbits = orbit_representatives([b.center for b in balls], op) if balls else []
            except SymmetryError:
                logger.warning("Pics non invariants par %s : intégration sur R^4 entier", op.name)
            else:
                representatives = tuple(Ball(balls[i].center, balls[i].width, radius, size)
                                        for i, size in orbits)
                sector_order, coupled = op.order, coupled_op
    pieces = _exterior_pieces(balls, spec.exterior_map)
    return Decomposition(representatives, balls, pieces, sector_order, coupled and not axial, axial)
