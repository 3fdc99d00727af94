"""
Familles d'ansatz multi-composantes.

Numérotation des composantes (ansatz_eval) : anneau, 1 -> V et 2 -> U ;
tore, r = 1..q -> Ṽ_r = Ṽ∘T_r et m = q+1 -> U.
"""
import math
from dataclasses import dataclass

import numpy as np

from errors import DomainError, InvalidConfigurationError
from geometry.configurations import Configuration
from geometry.fields import AXIAL, KELVIN
from geometry.symmetry import double_rotation
from bubbles.profiles import bubble_field, bubble_sum_field, kernel_sum_field


@dataclass(frozen=True)
class AnsatzFamily:
    """
    Famille (configuration, β, α).

    β < 0 est exigé ; β = 0 n'est admis qu'avec `allow_uncoupled` pour les
    cas de contrôle.
    """

    config: Configuration
    beta: float
    alpha: float = 0.0
    allow_uncoupled: bool = False

    def __post_init__(self):
        beta = float(self.beta)
        if beta > 0.0 or (beta == 0.0 and not self.allow_uncoupled):
            raise InvalidConfigurationError(f"le couplage beta doit être négatif, reçu : {beta}", beta=beta)
        if not self.config.is_torus and self.alpha != 0.0:
            raise InvalidConfigurationError("le couplage alpha n'existe que pour le tore", alpha=self.alpha)
        if not math.isfinite(float(self.alpha)):
            raise InvalidConfigurationError("alpha doit être fini", alpha=self.alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def m(self):
        return self.config.q + 1 if self.config.is_torus else 2

    @property
    def delta(self):
        return self.config.delta

    @property
    def k(self):
        return self.config.k

    @property
    def q(self):
        return self.config.q

    def with_delta(self, delta):
        return AnsatzFamily(self.config.with_delta(delta), self.beta, self.alpha, self.allow_uncoupled)

    def with_beta(self, beta):
        return AnsatzFamily(self.config, beta, self.alpha, self.allow_uncoupled)

    def to_dict(self):
        return {"config": self.config.to_dict(), "beta": self.beta, "alpha": self.alpha, "m": self.m}


def sheet_transform(q, r):
    """T_r = T_{(r-1)π/q}."""
    return double_rotation((r - 1) * math.pi / q)


def ring_tags(k):
    return frozenset({f"rotation:{k}", "reflect:1", "reflect:2", "reflect:3", AXIAL})


def torus_tags(k):
    return frozenset({f"block_rotation:{k}", "reflect:13", "swap", "antipodal"})


def radial_field():
    """La bulle standard U."""
    return bubble_field(1.0, name="U")


def bubble_family_field(family, r=1):
    """V (anneau) ou Ṽ_r (tore, nappe r)."""
    config = family.config
    if config.is_torus:
        tags = {f"block_rotation:{config.k}", "antipodal", KELVIN}
        if r == 1:
            tags |= torus_tags(config.k)
        return bubble_sum_field(config.sheet_centers(r), config.delta, tags, name=f"V~{r}")
    return bubble_sum_field(config.sheet_centers(1), config.delta, ring_tags(config.k) | {KELVIN}, name="V")


def full_family_field(family):
    """Σ_r Ṽ_r, invariante par le groupe complet (T_{π/q} compris)."""
    config = family.config
    tags = {KELVIN} | (ring_tags(config.k) if not config.is_torus else torus_tags(config.k))
    if config.is_torus and config.q > 1:
        tags.add(f"sheet_rotation:{config.q}")
    return bubble_sum_field(config.centers, config.delta, tags, name="SumV")


def ansatz_field(family, component):
    if int(component) != component or not 1 <= component <= family.m:
        raise DomainError(f"composante hors de 1..{family.m} : {component}", component=component)
    if component == family.m:
        return radial_field()
    return bubble_family_field(family, component)


def ansatz_eval(family, component, x):
    """Valeur de la composante `component` de l'ansatz au point x."""
    return ansatz_field(family, component)(x)


def kernel_direction_field(family):
    """Z = Σ_i Z⁰_{δ,ξ_i} sur le polygone de la première nappe."""
    config = family.config
    tags = torus_tags(config.k) if config.is_torus else ring_tags(config.k)
    return kernel_sum_field(config.sheet_centers(1), config.delta, tags, name="Z")


def family_centers(family):
    return np.asarray(family.config.centers)
