import numpy as np
import pytest

from optospring import MechanicalOscillator, OpticalCavity


@pytest.fixture
def osc():
    """Unit-mass oscillator with moderate damping (normalized units)."""
    return MechanicalOscillator(mass=1.0, resonance_freq=1.0, damping=0.1)


@pytest.fixture
def high_q_osc():
    return MechanicalOscillator(mass=1.0, resonance_freq=1.0, damping=1e-3)


@pytest.fixture
def cavity():
    """gamma = 0.01, bandwidth = 10 (normalized units)."""
    return OpticalCavity(gamma=0.01, round_trip=1e-3, wavevector=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240612)
