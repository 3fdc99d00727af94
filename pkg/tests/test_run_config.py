import json

import pytest

from config import DEFAULT_DELTA_GRID, DEFAULT_TUNE_BETAS
from errors import InvalidConfigurationError
from utils.run_config import FamilyParams, RunConfig, SolverParams


def test_defaults_are_valid():
    config = RunConfig()
    assert config.family.kind == "ring"
    assert config.betas == list(DEFAULT_TUNE_BETAS)
    assert config.deltas() == [0.05]
    assert config.delta_grid() == list(DEFAULT_DELTA_GRID)
    assert not config.sanity
    assert config.solver.rule_level is None


def test_non_negative_beta_requires_sanity_option():
    with pytest.raises(InvalidConfigurationError):
        RunConfig(family=FamilyParams(beta=0.1))
    with pytest.raises(InvalidConfigurationError):
        RunConfig(family=FamilyParams(beta=0.0))
    config = RunConfig(family=FamilyParams(beta=0.0), options={"sanity": True})
    assert config.build_family().beta == 0.0


def test_tune_betas_must_be_negative():
    with pytest.raises(InvalidConfigurationError):
        RunConfig(betas=[-0.1, 0.2])


@pytest.mark.parametrize("params", [
    FamilyParams(kind="torus", k=3, q=2),
    FamilyParams(kind="ring", q=2),
    FamilyParams(delta=1.2),
    FamilyParams(delta=None),
    FamilyParams(beta=float("nan")),
])
def test_invalid_family_rejected(params):
    with pytest.raises(InvalidConfigurationError):
        RunConfig(family=params)


@pytest.mark.parametrize("solver", [
    SolverParams(widths_count=0, radial_count=0),
    SolverParams(max_iter=0),
    SolverParams(tol=0.0),
])
def test_invalid_solver_rejected(solver):
    with pytest.raises(InvalidConfigurationError):
        RunConfig(solver=solver)


@pytest.mark.parametrize("workers", [0, -2, 1.5])
def test_workers_must_be_positive_integer(workers):
    with pytest.raises(InvalidConfigurationError):
        RunConfig(workers=workers)


def test_unknown_keys_rejected():
    with pytest.raises(InvalidConfigurationError):
        RunConfig.from_dict({"famiy": {}})
    with pytest.raises(InvalidConfigurationError):
        RunConfig.from_dict({"family": {"kind": "ring", "radius": 1.0}})
    with pytest.raises(InvalidConfigurationError):
        RunConfig.from_dict({"solver": [1, 2]})
    with pytest.raises(InvalidConfigurationError):
        RunConfig.from_dict([])


def test_delta_grid_is_sorted():
    config = RunConfig.from_dict({"family": {"delta": None, "delta_grid": [0.1, 0.01, 0.04]}})
    assert config.deltas() == [0.01, 0.04, 0.1]
    assert config.delta_grid() == [0.01, 0.04, 0.1]
    assert config.delta == 0.01


def test_dict_round_trip():
    config = RunConfig.from_dict({
        "family": {"kind": "torus", "k": 4, "q": 3, "delta": 0.1, "beta": -0.2, "alpha": 0.5},
        "quadrature": {"rel_tol": 1e-6, "use_symmetry": True},
        "solver": {"widths_count": 2},
        "betas": [-0.5],
        "workers": 3,
    })
    assert RunConfig.from_dict(config.to_dict()) == config
    family = config.build_family()
    assert family.config.q == 3
    assert family.alpha == 0.5


def test_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"family": {"k": 3, "beta": -0.3}}), encoding="utf-8")
    config = RunConfig.from_file(path)
    assert config.family.k == 3
    assert config.family.beta == -0.3


def test_from_file_errors(tmp_path):
    with pytest.raises(InvalidConfigurationError):
        RunConfig.from_file(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{\"family\": ", encoding="utf-8")
    with pytest.raises(InvalidConfigurationError) as info:
        RunConfig.from_file(broken)
    assert info.value.code == 2
