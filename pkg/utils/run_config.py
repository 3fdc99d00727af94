"""
Configuration d'exécution chargée depuis le JSON passé à --config.
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

from config import (
    DEFAULT_DELTA_GRID,
    DEFAULT_MAX_ITER,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_RADIAL_COUNT,
    DEFAULT_SEED,
    DEFAULT_SOLVER_TOL,
    DEFAULT_TUNE_BETAS,
    DEFAULT_WIDTHS_COUNT,
)
from errors import InvalidConfigurationError
from geometry.configurations import Configuration
from bubbles.ansatz import AnsatzFamily
from quadrature.spec import QuadratureSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FamilyParams:
    kind: str = "ring"
    k: int = 2
    q: int = 1
    delta: Optional[float] = 0.05
    delta_grid: Optional[List[float]] = None
    beta: float = -0.05
    alpha: float = 0.0


@dataclass(frozen=True)
class SolverParams:
    widths_count: int = DEFAULT_WIDTHS_COUNT
    radial_count: int = DEFAULT_RADIAL_COUNT
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_SOLVER_TOL
    rule_level: Optional[int] = None  # None : niveau choisi selon l'invariance axiale


def _build(cls, data, section):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise InvalidConfigurationError(f"la section {section} doit être un objet JSON", section=section)
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InvalidConfigurationError(f"champs inconnus dans {section} : {sorted(unknown)}",
                                        section=section, fields=sorted(unknown))
    try:
        return cls(**data)
    except TypeError as exc:
        raise InvalidConfigurationError(f"section {section} invalide : {exc}", section=section)


@dataclass(frozen=True)
class RunConfig:
    """
    Paramètres d'une exécution : famille, quadrature, solveur, table de β.

    Toutes les règles des modules sont vérifiées à la construction ; β ≥ 0 est
    refusé sauf pour le cas de contrôle à une bulle (`options.sanity`).
    """

    family: FamilyParams = field(default_factory=FamilyParams)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    solver: SolverParams = field(default_factory=SolverParams)
    betas: List[float] = field(default_factory=lambda: list(DEFAULT_TUNE_BETAS))
    workers: int = 1
    seed: int = DEFAULT_SEED
    output_dir: str = DEFAULT_OUTPUT_DIR
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    @property
    def sanity(self):
        return bool(self.options.get("sanity", False))

    def validate(self):
        params = self.family
        if params.delta is None and not params.delta_grid:
            raise InvalidConfigurationError("delta ou delta_grid est requis")
        if not math.isfinite(float(params.beta)):
            raise InvalidConfigurationError("beta doit être fini", beta=params.beta)
        if params.beta >= 0.0 and not self.sanity:
            raise InvalidConfigurationError(f"le couplage beta doit être strictement négatif, reçu : {params.beta}",
                                            beta=params.beta)
        for delta in self.deltas():
            Configuration(params.kind, params.k, params.q, delta)
        for beta in self.betas:
            if not beta < 0.0:
                raise InvalidConfigurationError(f"table de tune : beta doit être négatif, reçu : {beta}", beta=beta)
        solver = self.solver
        if solver.widths_count < 0 or solver.radial_count < 0 or solver.widths_count + solver.radial_count < 1:
            raise InvalidConfigurationError("la base du solveur doit contenir au moins un élément")
        if solver.max_iter < 1 or not solver.tol > 0.0 or (solver.rule_level is not None and solver.rule_level < 0):
            raise InvalidConfigurationError("paramètres du solveur invalides", max_iter=solver.max_iter,
                                            tol=solver.tol, rule_level=solver.rule_level)
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidConfigurationError(f"workers doit être un entier >= 1, reçu : {self.workers}")

    def deltas(self):
        """Grille en δ (triée) ; le δ seul si aucune grille n'est donnée."""
        if self.family.delta_grid:
            return sorted(float(d) for d in self.family.delta_grid)
        return [float(self.family.delta)]

    def delta_grid(self, default=DEFAULT_DELTA_GRID):
        if self.family.delta_grid:
            return self.deltas()
        return list(default)

    @property
    def delta(self):
        return float(self.family.delta) if self.family.delta is not None else self.deltas()[0]

    def build_family(self, delta=None, beta=None):
        params = self.family
        config = Configuration(params.kind, params.k, params.q, self.delta if delta is None else delta)
        return AnsatzFamily(config, params.beta if beta is None else beta, params.alpha,
                            allow_uncoupled=self.sanity)

    def to_dict(self):
        return {
            "family": asdict(self.family),
            "quadrature": self.quadrature.to_dict(),
            "solver": asdict(self.solver),
            "betas": list(self.betas),
            "workers": self.workers,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "options": dict(self.options),
        }

    @classmethod
    def from_dict(cls, data):
        """Construit la configuration depuis un dictionnaire JSON, valeurs par défaut comprises."""
        if not isinstance(data, dict):
            raise InvalidConfigurationError("la configuration doit être un objet JSON")
        allowed = {"family", "quadrature", "solver", "betas", "workers", "seed", "output_dir", "options"}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidConfigurationError(f"champs de configuration inconnus : {sorted(unknown)}")
        quadrature = data.get("quadrature")
        try:
            spec = QuadratureSpec.from_dict(quadrature) if quadrature else QuadratureSpec()
        except TypeError as exc:
            raise InvalidConfigurationError(f"section quadrature invalide : {exc}")
        return cls(
            family=_build(FamilyParams, data.get("family"), "family"),
            quadrature=spec,
            solver=_build(SolverParams, data.get("solver"), "solver"),
            betas=[float(b) for b in data.get("betas", DEFAULT_TUNE_BETAS)],
            workers=data.get("workers", 1),
            seed=data.get("seed", DEFAULT_SEED),
            output_dir=data.get("output_dir", DEFAULT_OUTPUT_DIR),
            options=dict(data.get("options", {})),
        )

    @classmethod
    def from_file(cls, path):
        """
        Charge un fichier JSON de configuration.

        Args:
            path: chemin du fichier

        Returns:
            RunConfig validée
        """
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError:
            raise InvalidConfigurationError(f"fichier de configuration introuvable : {path}", path=str(path))
        except json.JSONDecodeError as exc:
            raise InvalidConfigurationError(f"JSON invalide dans {path} : {exc.msg}", path=str(path),
                                            line=exc.lineno)
        logger.debug("Configuration chargée depuis %s", path)
        return cls.from_dict(data)
