"""
Configurations de centres de bulles : anneau (polygone régulier dans le plan
(x1, x2)) et tore (q polygones placés sur des grands cercles du tore de Clifford).
"""
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from errors import DomainError, InvalidConfigurationError, SymmetryError
from geometry.symmetry import apply_op


class ConfigurationKind(str, Enum):
    RING = "ring"
    TORUS = "torus"


def ring_centers(k, rho, allow_degenerate=False):
    """
    Sommets du polygone régulier à k côtés de rayon rho dans le plan (x1, x2).
    Une bulle unique (k = 1) n'est admise qu'avec `allow_degenerate`.

    Returns:
        Tableau (k, 4) des centres ξ_j = ρ (cos 2π(j-1)/k, sin 2π(j-1)/k, 0, 0)
    """
    minimum = 1 if allow_degenerate else 2
    if int(k) != k or k < minimum:
        raise InvalidConfigurationError(f"k doit être un entier >= {minimum}, reçu : {k}", k=k)
    angles = 2.0 * math.pi * np.arange(int(k)) / k
    centers = np.zeros((int(k), 4))
    centers[:, 0] = rho * np.cos(angles)
    centers[:, 1] = rho * np.sin(angles)
    return centers


def torus_centers(k, q, r, rho):
    """
    Centres de la nappe r (1..q) du tore :
    ξ̃_l^r = (ρ/√2)(cos(a - φ), sin(a - φ), cos(a + φ), sin(a + φ)),
    avec a = 2π(l-1)/k et φ = (r-1)π/q.
    """
    if int(k) != k or k < 1 or k % 2:
        raise InvalidConfigurationError(f"le tore exige k pair, reçu : {k}", k=k)
    if int(q) != q or q < 1:
        raise InvalidConfigurationError(f"q doit être un entier >= 1, reçu : {q}", q=q)
    if not 1 <= r <= q:
        raise InvalidConfigurationError(f"indice de nappe hors de 1..{q} : {r}", r=r, q=q)
    a = 2.0 * math.pi * np.arange(int(k)) / k
    phi = (r - 1) * math.pi / q
    scale = rho / math.sqrt(2.0)
    first = np.remainder(a - phi, 2.0 * math.pi)
    second = np.remainder(a + phi, 2.0 * math.pi)
    return scale * np.stack([np.cos(first), np.sin(first), np.cos(second), np.sin(second)], axis=-1)


@dataclass(frozen=True)
class Configuration:
    """
    Configuration de bulles.

    ρ est dérivé de δ par δ² + ρ² = 1 et n'est jamais stocké.
    """

    kind: ConfigurationKind
    k: int
    q: int = 1
    delta: float = 0.1
    allow_degenerate: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        try:
            kind = ConfigurationKind(self.kind)
        except ValueError:
            raise InvalidConfigurationError(f"type de configuration inconnu : {self.kind}", kind=self.kind)
        object.__setattr__(self, "kind", kind)
        minimum = 1 if self.allow_degenerate else 2
        if int(self.k) != self.k or self.k < minimum:
            raise InvalidConfigurationError(f"k doit être un entier >= {minimum}, reçu : {self.k}", k=self.k)
        if kind is ConfigurationKind.TORUS and self.k % 2:
            raise InvalidConfigurationError(f"le tore exige k pair, reçu : {self.k}", k=self.k)
        if kind is ConfigurationKind.RING and self.q != 1:
            raise InvalidConfigurationError("l'anneau n'a qu'un cercle (q = 1)", q=self.q)
        if int(self.q) != self.q or self.q < 1:
            raise InvalidConfigurationError(f"q doit être un entier >= 1, reçu : {self.q}", q=self.q)
        if not 0.0 < self.delta < 1.0:
            raise InvalidConfigurationError(f"delta doit appartenir à ]0, 1[, reçu : {self.delta}",
                                            delta=self.delta)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def rho(self):
        return math.sqrt((1.0 - self.delta) * (1.0 + self.delta))

    @property
    def is_torus(self):
        return self.kind is ConfigurationKind.TORUS

    def sheet_centers(self, r=1):
        if self.is_torus:
            return torus_centers(self.k, self.q, r, self.rho)
        if r != 1:
            raise InvalidConfigurationError("l'anneau n'a qu'une nappe", r=r)
        return ring_centers(self.k, self.rho, self.allow_degenerate)

    @property
    def centers(self):
        """Tous les centres, nappe par nappe."""
        return np.concatenate([self.sheet_centers(r) for r in range(1, self.q + 1)])

    def with_delta(self, delta):
        return Configuration(self.kind, self.k, self.q, delta, self.allow_degenerate)

    def to_dict(self):
        return {"kind": self.kind.value, "k": self.k, "q": self.q, "delta": self.delta}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["kind"], data["k"], data.get("q", 1), data["delta"])
        except KeyError as exc:
            raise InvalidConfigurationError(f"champ de configuration manquant : {exc.args[0]}")


def pair_distance_sq(config, i, j, r=1, s=1):
    """
    |ξ̃_i^r - ξ̃_j^s|² = 2ρ²(1 - cos((r-s)π/q) cos(2π(i-j)/k)).

    Indices à partir de 1. Le facteur ρ² est conservé exactement.
    """
    for index in (i, j):
        if not 1 <= index <= config.k:
            raise DomainError(f"indice de centre hors de 1..{config.k} : {index}", index=index)
    for sheet in (r, s):
        if not 1 <= sheet <= config.q:
            raise DomainError(f"indice de nappe hors de 1..{config.q} : {sheet}", sheet=sheet)
    sheet_angle = math.remainder((r - s) * math.pi / config.q, 2.0 * math.pi)
    polygon_angle = math.remainder(2.0 * math.pi * (i - j) / config.k, 2.0 * math.pi)
    if r == s:
        # 1 - cos = 2 sin² sans annulation
        return 4.0 * config.rho ** 2 * math.sin(polygon_angle / 2.0) ** 2
    return 2.0 * config.rho ** 2 * (1.0 - math.cos(sheet_angle) * math.cos(polygon_angle))


def lattice_sum(k, rho=1.0):
    """Σ_{j=2..k} |ξ_1 - ξ_j|^-2 pour l'anneau, par sommation directe."""
    if k < 2:
        return 0.0
    j = np.arange(1, int(k))
    terms = 1.0 / (4.0 * rho ** 2 * np.sin(math.pi * j / k) ** 2)
    return float(np.sum(np.sort(terms)))


def torus_lattice_sum(k, q, rho=1.0, include_other_sheets=False):
    """Σ |ξ̃_1^1 - ξ|^-2 sur la nappe 1 (et les autres nappes sur demande)."""
    first = torus_centers(k, q, 1, rho)[0]
    sheets = range(1, q + 1) if include_other_sheets else (1,)
    terms = []
    for r in sheets:
        centers = torus_centers(k, q, r, rho)
        d2 = np.sum((centers - first) ** 2, axis=-1)
        terms.extend(d2[d2 > 0.0])
    return float(np.sum(np.sort(1.0 / np.asarray(terms)))) if terms else 0.0


def empirical_lattice_constant(k, q, include_other_sheets=False):
    """Constante A(k) = (somme de réseau à ρ = 1)/k² pour la configuration torique."""
    return torus_lattice_sum(k, q, 1.0, include_other_sheets) / k ** 2


def orbit_representatives(centers, op, tol=1e-9):
    """
    Représentants des orbites d'un ensemble de centres sous le groupe
    cyclique engendré par `op`.

    Returns:
        Liste de couples (indice du représentant, taille de l'orbite)

    Raises:
        SymmetryError: si l'ensemble n'est pas invariant par l'opération
    """
    centers = np.asarray(centers, dtype=float)
    assigned = np.zeros(len(centers), dtype=bool)
    representatives = []
    for index in range(len(centers)):
        if assigned[index]:
            continue
        orbit = {index}
        point = centers[index]
        for _ in range(op.order):
            point = apply_op(op, point)
            distances = np.linalg.norm(centers - point, axis=-1)
            match = int(np.argmin(distances))
            if distances[match] > tol:
                raise SymmetryError(f"ensemble de centres non invariant par {op.name}", op=op.name)
            orbit.add(match)
        for member in orbit:
            assigned[member] = True
        representatives.append((index, len(orbit)))
    return representatives
