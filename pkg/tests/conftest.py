import math

import numpy as np
import pytest
from scipy import integrate

from weakpointer.classical import TransitionModel
from weakpointer.quantum import AmplitudeModel

FIG5 = (-1 / math.sqrt(5), 2 / math.sqrt(5))


def random_stochastic(rng):
    p = rng.uniform(0.05, 0.95, size=2)
    return [[1 - p[0], p[0]], [1 - p[1], p[1]]]


def random_transition_model(rng) -> TransitionModel:
    w = rng.uniform(0.05, 0.95)
    return TransitionModel(random_stochastic(rng), random_stochastic(rng), (1 - w, w))


def random_unitary(rng) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_amplitude_model(rng, unimodular_leg2=True) -> AmplitudeModel:
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=2))
    mod = np.ones(2) if unimodular_leg2 else rng.uniform(0.2, 1.0, size=2)
    return AmplitudeModel(random_unitary(rng), phases * mod, random_unitary(rng))


def quad(fn, lo=-np.inf, hi=np.inf, points=None):
    """Adaptive quadrature with tight tolerances; returns the value only."""
    val, _ = integrate.quad(fn, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400, points=points)
    return val


def quad_window(fn, center, width, span=12.0):
    """Integral over [center - span*width, center + span*width]; tails are < 1e-30."""
    lo, hi = center - span * width, center + span * width
    val, _ = integrate.quad(fn, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=400, points=[center])
    return val


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.fixture
def fig5_pair():
    return FIG5


# acceptance results, printed as one line per criterion at the end of the run
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
