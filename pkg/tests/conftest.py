import os
import sys

import pytest

# Ajouter la racine du dépôt au chemin Python
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.configurations import Configuration
from bubbles.ansatz import AnsatzFamily
from quadrature.spec import QuadratureSpec


@pytest.fixture
def light_spec():
    """Tolérances allégées pour les intégrales des tests."""
    return QuadratureSpec(rel_tol=1e-7, abs_tol=1e-10)


@pytest.fixture
def ring_family():
    return AnsatzFamily(Configuration("ring", 2, 1, 0.1), -0.1)


@pytest.fixture
def torus_family():
    return AnsatzFamily(Configuration("torus", 2, 2, 0.1), -0.1, 0.5)


@pytest.fixture
def uncoupled_family():
    return AnsatzFamily(Configuration("ring", 2, 1, 0.1), 0.0, allow_uncoupled=True)
