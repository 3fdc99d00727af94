"""
Configuration globale de la boîte à outils de vérification des solutions multi-bulles.
"""
import os
import logging

# Configuration de la journalisation
_LOGGING_CONFIGURED = False

def configure_logging(level=None):
    """Configure la journalisation de l'application (sortie d'erreur standard)."""
    global _LOGGING_CONFIGURED
    if level is None:
        level = get_log_level()
    if not _LOGGING_CONFIGURED:
        logging.basicConfig(
            level=level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        _LOGGING_CONFIGURED = True
    logging.getLogger().setLevel(level)

# Niveau de journalisation
def get_log_level():
    """Récupère le niveau de journalisation depuis les variables d'environnement."""
    name = os.getenv("BUBBLES_LOG_LEVEL", "INFO").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ValueError(f"BUBBLES_LOG_LEVEL invalide : {name}")
    return level

# Nombre de threads de calcul
def get_worker_count():
    """Récupère le nombre de threads de calcul depuis les variables d'environnement."""
    raw = os.getenv("BUBBLES_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"BUBBLES_WORKERS doit être un entier, reçu : {raw}")
    if workers < 1:
        raise ValueError("BUBBLES_WORKERS doit être au moins égal à 1")
    return workers

# Constante de normalisation des bulles (c_4 = 2*sqrt(2))
C4 = 2.0 * 2.0 ** 0.5

# Tolérances de quadrature
DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-12
DEFAULT_MAX_SUBDIVISIONS = 1_000_000
DEFAULT_PEAK_RADIUS = 0.45  # fraction de la distance minimale entre centres
DEFAULT_EXTERIOR_MAP = "inversion"

# Règle angulaire sur S^3 (niveau 0 : 6 x 12 x 12 nœuds)
ANGULAR_ETA_NODES = 6
ANGULAR_THETA_NODES = 12
ANGULAR_BASE_LEVEL = 0
ANGULAR_MAX_LEVEL = 4
ANGULAR_MAX_DIRECTIONS = 500_000  # plafond de directions par niveau
ANGULAR_TRUSTED_RATIO = 0.5  # rapport de convergence jugé géométrique

# Partition de l'unité : poids exp(-ln2 * u^6) des boules autour des pics
BALL_WEIGHT_POWER = 6
BALL_NEGLIGIBLE_EXPONENT = 39.0  # au-delà, le poids est inférieur à 2^-39

# Règle fixe utilisée par le solveur
RULE_RADIAL_ORDER = 12  # nœuds de Gauss-Legendre par panneau radial
RULE_ANGULAR_LEVEL = 3  # champs invariants en (x3, x4)
RULE_FULL_ANGULAR_LEVEL = 1  # champs sans invariance axiale (tores)
RULE_ORACLE_TOL = 1e-6  # écart relatif admis sur les intégrales fermées

# Tolérance des tests d'orthogonalité et de symétrie
SYMMETRY_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-12

# Grilles en delta par défaut
DEFAULT_DELTA_GRID = [1e-3, 2.5e-3, 6.3e-3, 1.6e-2, 4e-2, 1e-1]
DEFAULT_RESIDUAL_GRID = [1e-4, 4.6e-4, 2.2e-3, 1e-2, 4.6e-2, 1e-1]
DEFAULT_TUNE_BETAS = [-1.0, -0.5, -0.1]

# Paramètres du solveur
DEFAULT_WIDTHS_COUNT = 3  # largeurs auxiliaires delta/2, delta, 2*delta
DEFAULT_RADIAL_COUNT = 3  # enveloppes (1+|x|^2)^-s, s = 1, 3/2, 5/2
DEFAULT_MAX_ITER = 50
DEFAULT_SOLVER_TOL = 1e-10
MAX_GRAM_CONDITION = 1e12
CONTRACTION_LIMIT = 0.95
CONTRACTION_PATIENCE = 5
ARMIJO_CONSTANT = 1e-4
MAX_LINE_SEARCH_HALVINGS = 30
GAUSS_NEWTON_MAX_ITER = 20
MAX_FIXED_POINT_BETA = 1.0  # au-delà, le point fixe n'est pas tenté
MIN_SOLVER_DELTA = 1e-3

# Sorties
JSON_SIGNIFICANT_DIGITS = 17
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_SEED = 20240611
