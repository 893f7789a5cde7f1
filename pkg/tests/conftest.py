"""
Shared fixtures for the markov-zo test suite
"""

import numpy as np
import pytest
import yaml

from src.chains import ChainParams
from src.problems import DiagQuadratic, QuadraticMarkov


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sphere4():
    """(1/2)||x||^2 in R^4"""
    return QuadraticMarkov(4)


@pytest.fixture
def diag2():
    """Ill-conditioned quadratic, eigenvalues 0.1 and 1"""
    return DiagQuadratic(2, mu=0.1, L=1.0)


@pytest.fixture
def noiseless():
    def _params(dim: int) -> ChainParams:
        return ChainParams(dim=dim, tau_hold=1, noise_std=0.0)
    return _params


@pytest.fixture
def write_config(tmp_path):
    """Write a nested config mapping to a YAML file under tmp_path"""
    def _write(config: dict, name: str = "experiment.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def small_grid_config(tmp_path):
    """Four-cell grid that runs in well under a second"""
    return {
        'problem': {'kind': 'QuadraticMarkov', 'mu': 1.0, 'dim_grid': [1, 2]},
        'chain': {'kind': 'LazyGaussian', 'tau_grid': [1, 4], 'sigma2_grid': [1.0e-3]},
        'estimator': {'t': 1.0e-5, 'B': 1, 'feedback': 'two_point'},
        'optimizer': {'gamma': 1.0e-2, 'N': 40, 'seed_base': 11, 'replications': 3,
                      'full_replications': 5, 'initial_error': 1.0e-2},
        'output': {'results_dir': str(tmp_path / "grids"), 'csv': 'grid.csv', 'heatmap_prefix': 'hm'},
    }
