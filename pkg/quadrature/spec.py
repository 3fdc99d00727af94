"""
Paramètres de quadrature et résultat d'intégration.
"""
import math
from dataclasses import dataclass, fields
from enum import Enum

from config import (
    DEFAULT_ABS_TOL,
    DEFAULT_EXTERIOR_MAP,
    DEFAULT_MAX_SUBDIVISIONS,
    DEFAULT_PEAK_RADIUS,
    DEFAULT_REL_TOL,
)
from errors import InvalidConfigurationError, NumericalError


class ExteriorMap(str, Enum):
    INVERSION = "inversion"
    TANGENT = "tangent"

    @classmethod
    def parse(cls, value):
        aliases = {"inversion": cls.INVERSION, "tangent": cls.TANGENT, "tangentmap": cls.TANGENT,
                   "tangent_map": cls.TANGENT}
        key = value.value if isinstance(value, cls) else str(value).lower()
        if key not in aliases:
            raise InvalidConfigurationError(f"compactification extérieure inconnue : {value}", exterior_map=value)
        return aliases[key]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_subdivisions: int = DEFAULT_MAX_SUBDIVISIONS
    peak_radius: float = DEFAULT_PEAK_RADIUS
    use_symmetry: bool = False
    exterior_map: ExteriorMap = ExteriorMap.parse(DEFAULT_EXTERIOR_MAP)

    def __post_init__(self):
        object.__setattr__(self, "exterior_map", ExteriorMap.parse(self.exterior_map))
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidConfigurationError(f"rel_tol doit appartenir à ]0, 1[, reçu : {self.rel_tol}")
        if not self.abs_tol > 0.0:
            raise InvalidConfigurationError(f"abs_tol doit être positive, reçu : {self.abs_tol}")
        if not 0.0 < self.peak_radius < 0.5:
            raise InvalidConfigurationError(f"peak_radius doit appartenir à ]0, 1/2[, reçu : {self.peak_radius}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise InvalidConfigurationError("max_subdivisions doit être un entier positif")

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return QuadratureSpec(**values)

    def to_dict(self):
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_subdivisions": int(self.max_subdivisions),
            "peak_radius": self.peak_radius,
            "use_symmetry": bool(self.use_symmetry),
            "exterior_map": self.exterior_map.value,
        }

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigurationError(f"champs de quadrature inconnus : {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class IntegralResult:
    """
    Résultat d'intégration, avec la décomposition intérieur (boules autour des
    pics) / extérieur.
    """

    value: float
    error_estimate: float
    evaluations: int
    regions: int
    interior: float = 0.0
    exterior: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise NumericalError(f"valeur d'intégrale non finie : {self.value}")

    def to_dict(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "evaluations": self.evaluations,
            "regions": self.regions,
            "interior": self.interior,
            "exterior": self.exterior,
        }
