import numpy as np
import pytest

from fockvampire.fock_core import ModeSet, PureState, normalize
from fockvampire.linear_optics import BeamSplitter


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_pure_state(rng):
    def make(modes: ModeSet) -> PureState:
        amps = rng.normal(size=modes.dim) + 1j * rng.normal(size=modes.dim)
        state, _ = normalize(PureState(modes, amps))
        return state

    return make


@pytest.fixture
def random_beamsplitter(rng):
    def make() -> BeamSplitter:
        theta = rng.uniform(0, np.pi / 2)
        return BeamSplitter(
            np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.cos(theta),
            np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.sin(theta),
        )

    return make


@pytest.fixture
def random_density_matrix(rng):
    def make(dim: int) -> np.ndarray:
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = g @ g.conj().T
        return rho / np.trace(rho).real

    return make


@pytest.fixture
def random_profile(rng):
    def make(pixels: int) -> np.ndarray:
        c = rng.normal(size=pixels) + 1j * rng.normal(size=pixels)
        return c / np.linalg.norm(c)

    return make
