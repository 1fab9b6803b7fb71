import pytest
from unittest.mock import patch
import os
import sys

import numpy as np

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from src.config import Settings
from src.geometry.polytope import BalancedVector
from src.services.rng import SeededGenerator
from src.services.sampler_service import SampleBatch, SamplerConfig, draw_batch

@pytest.fixture
def settings():
    """Default process settings for handler tests"""
    return Settings(log_level="WARNING", jobs=1, root_refine_bits=16)

@pytest.fixture
def clean_env():
    """Environment without any RBS_* variables"""
    keys = ["RBS_LOG_LEVEL", "RBS_JOBS", "RBS_ROOT_REFINE_BITS"]
    with patch.dict(os.environ, {}, clear=False):
        for key in keys:
            os.environ.pop(key, None)
        yield

@pytest.fixture
def gen():
    """Fixed-seed generator"""
    return SeededGenerator(20240611)

@pytest.fixture
def hexagon_vertex():
    """A vertex of the hexagon M(3)"""
    return BalancedVector((1.0, -1.0, 0.0))

@pytest.fixture
def symmetrized_batch_n4():
    """20k symmetrized samples for n=4"""
    return draw_batch(SamplerConfig(n=4, method="symmetrized", seed=11), 20_000)

@pytest.fixture
def unbalanced_batch():
    """A batch with one hand-built unbalanced row"""
    values = np.array([[0.5, -0.5, 0.0], [0.3, 0.3, 0.3], [0.0, 0.0, 0.0]])
    return SampleBatch(values=values, validate=False)

@pytest.fixture
def small_balanced_vector():
    """Factory: random balanced vector of size n with |y_k| < bound"""
    def make(n, bound, seed):
        rng = np.random.default_rng(seed)
        y = rng.uniform(-1.0, 1.0, size=n)
        y -= y.mean()
        y *= 0.99 * bound / np.abs(y).max()
        y[-1] = -y[:-1].sum()
        return BalancedVector(tuple(y))
    return make

@pytest.fixture
def run_cli(tmp_path, clean_env):
    """Run the command-line entry point inside a temporary directory"""
    from src.cli import main

    def run(*argv):
        return main([str(a) for a in argv])
    return run
