from pathlib import Path

import numpy as np
import pytest

from hawkes import config
from hawkes.artifacts import load_model
from hawkes.config import TestingSettings
from hawkes.model import branching_matrix, is_stable
from hawkes.schemas import HawkesModel

MODELS_DIR = Path(__file__).resolve().parents[2] / "models"

ZERO = {"type": "zero"}


def build_model(base_rates, kernels, jumps, sojourns, name="test") -> HawkesModel:
    """HawkesModel from plain dictionaries, in the layout of the model files"""
    return HawkesModel.model_validate({
        "name": name,
        "dimension": len(base_rates),
        "base_rates": list(base_rates),
        "kernels": kernels,
        "jumps": jumps,
        "sojourns": sojourns,
    })


def exponential_kernels(d: int, alpha: float = 1.0):
    return [[{"type": "exponential", "alpha": alpha}] * d for _ in range(d)]


def pareto(gamma: float, C: float = 1.0):
    return {"type": "pareto", "C": C, "gamma": gamma}


@pytest.fixture(autouse=True)
def testing_settings(monkeypatch):
    """Fresh TestingSettings for every test"""
    settings = TestingSettings()
    monkeypatch.setattr(config, "settings", settings)
    return settings


@pytest.fixture
def models_dir():
    return MODELS_DIR


@pytest.fixture
def poisson_model():
    """d=1, no excitation, infinite sojourns: N and Q are Poisson(0.5 t)"""
    return build_model([0.5], exponential_kernels(1), [[ZERO]], [{"type": "infinite"}], name="poisson")


@pytest.fixture
def poisson_pair():
    """d=2 homogeneous Poisson process with base rates (0.5, 0.5)"""
    return build_model([0.5, 0.5], exponential_kernels(2), [[ZERO, ZERO], [ZERO, ZERO]],
                       [{"type": "infinite"}] * 2, name="poisson-pair")


@pytest.fixture
def mg_infinity_model():
    """d=1, no excitation, exponential sojourns with mu=2: the M/M/infinity queue"""
    return build_model([1.0], exponential_kernels(1), [[ZERO]], [{"type": "exponential", "mu": 2.0}],
                       name="mg-infinity")


@pytest.fixture
def self_exciting_model():
    """d=1, Exponential{2} kernel, Constant{0.5} jumps, infinite sojourns"""
    return build_model([0.5], exponential_kernels(1, 2.0), [[{"type": "constant", "b": 0.5}]],
                       [{"type": "infinite"}], name="self-exciting")


@pytest.fixture
def bivariate_model():
    return load_model(MODELS_DIR / "bivariate_exponential.json")


@pytest.fixture
def bivariate_power_law_model():
    return load_model(MODELS_DIR / "bivariate_power_law.json")


@pytest.fixture
def heavy_tail_model():
    return load_model(MODELS_DIR / "heavy_tail_exponential.json")


@pytest.fixture
def power_law_tail_model():
    return load_model(MODELS_DIR / "heavy_tail_power_law.json")


@pytest.fixture
def six_state_model():
    return load_model(MODELS_DIR / "six_state.json")


@pytest.fixture
def triangular_model():
    """B12 = 0: transient class {1}, recurrent class {2}"""
    jumps = [[pareto(1.7), ZERO], [pareto(1.9), pareto(1.5)]]
    return build_model([0.5, 0.5], exponential_kernels(2, 4.0), jumps, [{"type": "infinite"}] * 2,
                       name="triangular")


@pytest.fixture
def trivariate_model():
    """B12 = B13 = B22 = B31 = 0: transient class {1}, recurrent class {2, 3}"""
    jumps = [
        [pareto(1.9), ZERO, ZERO],
        [pareto(1.6), ZERO, pareto(1.8)],
        [ZERO, pareto(1.7), pareto(1.9)],
    ]
    return build_model([0.5, 0.5, 0.5], exponential_kernels(3, 4.0), jumps, [{"type": "infinite"}] * 3,
                       name="trivariate")


@pytest.fixture
def self_loop_model():
    """Single vertex with a Pareto(1, 1.8) self-loop"""
    return build_model([1.0], exponential_kernels(1, 2.0), [[pareto(1.8)]], [{"type": "infinite"}],
                       name="self-loop")


@pytest.fixture
def random_stable_model():
    """Factory of random stable models with exponential/power-law kernels and constant jumps"""
    def factory(seed: int, d: int = None, density: float = 0.6, target_radius: float = 0.6) -> HawkesModel:
        rng = np.random.default_rng(seed)
        d = d or int(rng.integers(1, 4))
        kernels = []
        for _ in range(d):
            row = []
            for _ in range(d):
                if rng.uniform() < 0.5:
                    row.append({"type": "exponential", "alpha": float(rng.uniform(1.0, 3.0))})
                else:
                    row.append({"type": "power_law", "c": float(rng.uniform(1.0, 2.0)),
                                "p": float(rng.uniform(2.0, 3.5))})
            kernels.append(row)
        active = rng.uniform(size=(d, d)) < density
        active[np.arange(d), np.arange(d)] |= ~active.any(axis=0)
        sizes = rng.uniform(0.2, 1.0, size=(d, d)) * active

        draft = build_model(rng.uniform(0.2, 1.0, size=d), kernels,
                            [[{"type": "constant", "b": float(sizes[i, j])} if active[i, j] else ZERO
                              for j in range(d)] for i in range(d)],
                            [{"type": "exponential", "mu": float(rng.uniform(0.5, 2.0))} for _ in range(d)])
        # rescale the jumps so that the spectral radius lands on target_radius
        radius = branching_matrix(draft).spectral_radius
        scale = target_radius / radius if radius > 0 else 1.0
        jumps = [[{"type": "constant", "b": float(sizes[i, j] * scale)} if active[i, j] else ZERO
                  for j in range(d)] for i in range(d)]
        model = build_model(draft.lambda_inf, kernels, jumps,
                            [s.model_dump() for s in draft.sojourns], name=f"random-{seed}")
        assert is_stable(model)
        return model

    return factory


@pytest.fixture
def random_topology():
    """Factory of random jump patterns: boolean (d, d) matrices indexed [target, source]"""
    def factory(seed: int, d: int = 4, density: float = 0.3) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.uniform(size=(d, d)) < density

    return factory
