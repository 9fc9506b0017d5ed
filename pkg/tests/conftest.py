from __future__ import annotations

import numpy as np
import pytest

from chlab.dynamics import SolverConfig
from chlab.experiments import LadderSpec, compute_cells


def trig_sum(rng: np.random.Generator, n_modes: int, decay: float = 1.0):
    """Random band-limited function, evaluable on any grid (integer modes)."""
    ms = np.arange(1, n_modes + 1)
    a0 = rng.standard_normal()
    ac = rng.standard_normal(n_modes) / ms**decay
    bc = rng.standard_normal(n_modes) / ms**decay

    def f(x: np.ndarray) -> np.ndarray:
        out = np.full_like(x, a0)
        for m, ca, cb in zip(ms, ac, bc):
            out = out + ca * np.cos(m * x) + cb * np.sin(m * x)
        return out

    return f


@pytest.fixture(scope="session")
def mini_spec() -> LadderSpec:
    return LadderSpec(lambdas=(8.0, 16.0))


@pytest.fixture(scope="session")
def mini_cfg() -> SolverConfig:
    return SolverConfig()


@pytest.fixture(scope="session")
def mini_cells(mini_spec, mini_cfg):
    """Small two-rung ladder with actual solves; shared across test modules."""
    packet, ladder = compute_cells(mini_spec, mini_cfg, True, True, True)
    return packet, ladder


@pytest.fixture(scope="session")
def default_spec() -> LadderSpec:
    return LadderSpec()


@pytest.fixture(scope="session")
def default_cfg() -> SolverConfig:
    return SolverConfig()


@pytest.fixture(scope="session")
def full_cells(default_spec, default_cfg):
    """The default acceptance ladder up to lambda = 128 (minutes)."""
    packet, ladder = compute_cells(default_spec, default_cfg, True, True, True)
    return packet, ladder
