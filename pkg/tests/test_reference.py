import math

import numpy as np
import pytest

from gvjump.potential import PotentialModel, QuadraticPotential
from gvjump.reference import VerletConfig, energy, harmonic_flow, sup_distance, verlet


def test_config_validation():
    with pytest.raises(ValueError):
        VerletConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        VerletConfig(0.1, 0.05)


def test_one_period_returns():
    pot = QuadraticPotential(1.0)
    x0, v0 = np.array([1.0, 0.0]), np.array([1.0, 1.0])
    path = verlet(pot, x0, v0, VerletConfig(2 * math.pi / 6283, 2 * math.pi))
    assert np.allclose(path.positions[-1], x0, atol=1e-4)
    assert np.allclose(path.velocities[-1], v0, atol=1e-4)
    assert path.times[-1] == pytest.approx(2 * math.pi)


def test_free_flight_is_exact():
    zero = PotentialModel(2, lambda x: np.zeros(2), hessian_bound=0.0)
    path = verlet(zero, [1.0, 2.0], [0.5, -0.25], VerletConfig(0.01, 3.0))
    assert np.allclose(path.positions, np.array([1.0, 2.0]) + path.times[:, None] * [0.5, -0.25], rtol=0, atol=1e-13)


def test_energy_drift():
    pot = QuadraticPotential(1.0)
    path = verlet(pot, [1.0, 0.0], [1.0, 1.0], VerletConfig(1e-3, 100.0), grad=pot._grad)
    e = np.array([energy(x, v) for x, v in zip(path.positions[::100], path.velocities[::100])])
    assert np.max(np.abs(e - e[0])) < 1e-5


def test_second_order_convergence():
    pot = QuadraticPotential(1.0)
    x0, v0 = [1.0, 0.0], [1.0, 1.0]
    errs = []
    hs = (1e-1, 1e-2, 1e-3)
    for h in hs:
        path = verlet(pot, x0, v0, VerletConfig(h, 5.0), grad=pot._grad)
        exact, _ = harmonic_flow(x0, v0, path.times)
        errs.append(sup_distance(path.times, path.positions, exact))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_verlet_counts_gradients_unless_overridden():
    pot = QuadraticPotential(1.0)
    verlet(pot, [1.0, 0.0], [0.0, 1.0], VerletConfig(0.1, 1.0))
    assert pot.evaluations == 11
    verlet(pot, [1.0, 0.0], [0.0, 1.0], VerletConfig(0.1, 1.0), grad=pot._grad)
    assert pot.evaluations == 11


def test_dense_path_interpolation():
    zero = PotentialModel(1, lambda x: np.zeros(1), hessian_bound=0.0)
    path = verlet(zero, [0.0], [2.0], VerletConfig(0.5, 2.0))
    assert path.positions_at([0.25, 1.75])[:, 0] == pytest.approx([0.5, 3.5])
