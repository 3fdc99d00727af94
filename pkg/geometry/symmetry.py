"""
Opérations de symétrie de R^4 : rotations planes, rotations doubles T_θ,
rotation par blocs R_k, réflexions, échange de plans, antipodie et
transformation de Kelvin.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from errors import DomainError
from geometry.fields import KELVIN, Peak, ScalarField, squared_norm


class OpKind(str, Enum):
    PLANAR_ROTATION = "planar_rotation"
    DOUBLE_ROTATION = "double_rotation"
    BLOCK_ROTATION = "block_rotation"
    REFLECTION = "reflection"
    COORDINATE_SWAP = "coordinate_swap"
    ANTIPODAL = "antipodal"
    KELVIN = "kelvin"


@dataclass(frozen=True, eq=False)
class SymmetryOp:
    """
    Opération de symétrie.

    Args:
        kind: nature de l'opération
        matrix: représentation orthogonale 4x4 (None pour Kelvin)
        tag: étiquette d'invariance associée (ex. "rotation:4")
        order: ordre du sous-groupe cyclique engendré
        name: nom lisible
    """

    kind: OpKind
    matrix: Optional[np.ndarray]
    tag: str
    order: int
    name: str
    conformal: bool = field(default=False)

    def power(self, n):
        """Puissance n-ième de l'opération (n >= 0)."""
        if self.conformal:
            return self if n % 2 else identity_op()
        return SymmetryOp(self.kind, np.linalg.matrix_power(self.matrix, n), self.tag,
                          self.order, f"{self.name}^{n}")


def _reduce_angle(angle):
    return math.remainder(float(angle), 2.0 * math.pi)


def _rotation_block(angle):
    angle = _reduce_angle(angle)
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def identity_op():
    return SymmetryOp(OpKind.PLANAR_ROTATION, np.eye(4), "identity", 1, "id")


def planar_rotation(angle, plane=(0, 1), tag=None, order=1):
    """Rotation d'angle `angle` dans le plan de coordonnées `plane`."""
    i, j = plane
    matrix = np.eye(4)
    block = _rotation_block(angle)
    matrix[i, i], matrix[i, j] = block[0]
    matrix[j, i], matrix[j, j] = block[1]
    return SymmetryOp(OpKind.PLANAR_ROTATION, matrix, tag or f"planar:{angle:.17g}", order,
                      f"rot{plane}({angle:.6g})")


def theta_rotation(k):
    """Rotation Θ_k d'angle 2π/k dans le plan (x1, x2)."""
    op = planar_rotation(2.0 * math.pi / k, (0, 1), tag=f"rotation:{k}", order=k)
    return SymmetryOp(op.kind, op.matrix, op.tag, k, f"Theta_{k}")


def double_rotation(theta):
    """Rotation double T_θ : +θ dans le plan (x1, x2), -θ dans le plan (x3, x4)."""
    theta = _reduce_angle(theta)
    c, s = math.cos(theta), math.sin(theta)
    matrix = np.array([
        [c, -s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, c, s],
        [0.0, 0.0, -s, c],
    ])
    return SymmetryOp(OpKind.DOUBLE_ROTATION, matrix, f"double:{theta:.17g}", 1, f"T({theta:.6g})")


def sheet_rotation(q):
    """T_{π/q}, qui envoie chaque grand cercle du tore sur le suivant."""
    op = double_rotation(math.pi / q)
    return SymmetryOp(op.kind, op.matrix, f"sheet_rotation:{q}", 2 * q, f"T_pi/{q}")


def block_rotation(k):
    """R_k : rotation de 2π/k de même orientation dans les deux plans."""
    matrix = np.zeros((4, 4))
    block = _rotation_block(2.0 * math.pi / k)
    matrix[:2, :2] = block
    matrix[2:, 2:] = block
    return SymmetryOp(OpKind.BLOCK_ROTATION, matrix, f"block_rotation:{k}", k, f"R_{k}")


def reflection(axes):
    """Changement de signe des coordonnées d'indices `axes` (base 0)."""
    axes = tuple(sorted(axes))
    matrix = np.eye(4)
    for axis in axes:
        matrix[axis, axis] = -1.0
    label = "".join(str(a) for a in axes)
    return SymmetryOp(OpKind.REFLECTION, matrix, f"reflect:{label}", 2, f"sigma_{label}")


def coordinate_swap():
    """Échange des plans (x1, x2) et (x3, x4)."""
    matrix = np.zeros((4, 4))
    matrix[0, 2] = matrix[1, 3] = matrix[2, 0] = matrix[3, 1] = 1.0
    return SymmetryOp(OpKind.COORDINATE_SWAP, matrix, "swap", 2, "swap")


def antipodal():
    return SymmetryOp(OpKind.ANTIPODAL, -np.eye(4), "antipodal", 2, "antipodal")


def kelvin():
    return SymmetryOp(OpKind.KELVIN, None, KELVIN, 2, "Kelvin", conformal=True)


def is_orthogonal(op, tol=1e-12):
    if op.conformal:
        return False
    defect = op.matrix.T @ op.matrix - np.eye(4)
    return float(np.max(np.abs(defect))) <= tol


def _kelvin_points(x):
    r2 = squared_norm(x)
    if np.any(r2 == 0.0):
        raise DomainError("transformation de Kelvin à l'origine")
    return x / r2[..., None], r2


def apply_op(op, x):
    """
    Applique une opération à un point (ou un tableau de points).

    Args:
        op: opération de symétrie
        x: tableau (..., 4)

    Returns:
        Tableau (..., 4) des images
    """
    x = np.asarray(x, dtype=float)
    if op.conformal:
        return _kelvin_points(x)[0]
    return x @ op.matrix.T


def _kelvin_peak(peak):
    center = np.asarray(peak.center)
    scale = float(center @ center) + peak.width ** 2
    return Peak.at(center / scale, peak.width / scale)


def conjugate_function(op, f):
    """
    Champ tiré en arrière par l'opération.

    Composition simple x -> f(Mx) pour les opérations orthogonales ;
    (Kf)(x) = |x|^-2 f(x/|x|^2) pour Kelvin, dont le laplacien vaut
    |x|^-6 (Δf)(x/|x|^2).

    Args:
        op: opération de symétrie
        f: champ scalaire

    Returns:
        Le champ conjugué
    """
    if op.conformal:
        def evaluate(x):
            y, r2 = _kelvin_points(x)
            return f.func(y) / r2

        neg_laplacian = None
        if f.has_laplacian:
            def neg_laplacian(x):
                y, r2 = _kelvin_points(x)
                return f.neg_laplacian(y) / r2 ** 3

        peaks = tuple(_kelvin_peak(p) for p in f.peaks)
        tags = f.symmetry if f.certifies(KELVIN) else f.symmetry - {KELVIN}
        return ScalarField(evaluate, neg_laplacian, peaks, tags, f"K[{f.name}]")

    matrix = op.matrix

    def evaluate(x):
        return f.func(x @ matrix.T)

    neg_laplacian = None
    if f.has_laplacian:
        def neg_laplacian(x):
            return f.neg_laplacian(x @ matrix.T)

    peaks = tuple(Peak.at(matrix.T @ np.asarray(p.center), p.width) for p in f.peaks)
    tags = f.symmetry if f.certifies(op.tag) else frozenset()
    return ScalarField(evaluate, neg_laplacian, peaks, tags, f"{f.name}o{op.name}")
