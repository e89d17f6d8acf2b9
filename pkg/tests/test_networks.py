import math

import numpy as np
import pytest

from qswap.models import Quadrature
from qswap.schemas import SqueezerParams
from qswap.services.detection import (
    direct_tap,
    feedforward,
    measure_quadrature,
    mix,
    quadrature_tap,
    signal_variance,
)
from qswap.services.gaussian import (
    BrightState,
    balance_phase,
    beamsplitter,
    beamsplitter_symplectic,
    loss,
    phase_shift,
    prepare_squeezed_beam,
    relabel,
    tensor,
    tensor_all,
)
from qswap.services.scenarios import build_epr_source

N_MODES = 4


def random_beams(rng: np.random.Generator, n: int = N_MODES) -> BrightState:
    beams = []
    for k in range(n):
        s = rng.uniform(0.1, 1.0)
        p = SqueezerParams(power=rng.uniform(0.5, 2.0), squeezing=s, excess=rng.uniform(1.0, 5.0) / s,
                           ellipse_angle=rng.uniform(-math.pi, math.pi),
                           carrier_phase=rng.uniform(-math.pi, math.pi))
        beams.append(prepare_squeezed_beam(p, f"M{k}"))
    return tensor_all(beams)


def random_network(rng: np.random.Generator, depth: int = 6, lossy: bool = True) -> tuple[BrightState, float]:
    """Random splitters, phase shifts and losses; returns the state and its expected total power."""
    state = random_beams(rng)
    power = state.total_power
    for _ in range(depth):
        op = rng.integers(3 if lossy else 2)
        if op == 0:
            j, k = rng.choice(N_MODES, size=2, replace=False)
            state = beamsplitter(state, int(j), int(k), rng.uniform(0.0, 1.0), rng.uniform(-math.pi, math.pi))
        elif op == 1:
            state = phase_shift(state, int(rng.integers(N_MODES)), rng.uniform(-math.pi, math.pi))
        else:
            k, eta = int(rng.integers(N_MODES)), rng.uniform(0.3, 1.0)
            power -= (1 - eta) * state.powers[k]
            state = loss(state, k, eta)
    return state, power


@pytest.mark.parametrize("seed", range(10))
def test_random_networks_stay_physical_and_conserve_power(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        state, power = random_network(rng)
        assert state.is_physical()
        assert state.symplectic_eigenvalues().min() >= 1 - 1e-9
        assert state.total_power == pytest.approx(power, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_feedforward_equals_adding_the_currents(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(20):
        state, _ = random_network(rng, lossy=bool(rng.integers(2)))
        target = int(np.argmax(state.powers))
        a, b = [k for k in range(N_MODES) if k != target][:2]
        gain_x, gain_y = rng.uniform(-2.0, 2.0, size=2)
        quads = [Quadrature.X, Quadrature.Y]
        measured, sig_x = measure_quadrature(state, a, quads[rng.integers(2)], rng.uniform(0.5, 2.0))
        measured, sig_y = measure_quadrature(measured, b, quads[rng.integers(2)], rng.uniform(0.5, 2.0))
        optical = feedforward(measured, sig_x, sig_y, target, gain_x, gain_y)
        amp = abs(state.carriers[target])
        for quad, signal, gain in ((Quadrature.X, sig_x, gain_x), (Quadrature.Y, sig_y, gain_y)):
            displaced = signal_variance(optical.cov, quadrature_tap(optical, target, quad, amp))
            added = signal_variance(state.cov, mix([quadrature_tap(state, target, quad, amp), signal], [1.0, gain]))
            assert displaced == pytest.approx(added, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_losses_compose_multiplicatively(seed):
    rng = np.random.default_rng(200 + seed)
    state, _ = random_network(rng, lossy=False)
    k = int(rng.integers(N_MODES))
    e1, e2 = rng.uniform(0.0, 1.0, size=2)
    twice = loss(loss(state, k, e1), k, e2)
    once = loss(state, k, e1 * e2)
    np.testing.assert_allclose(twice.cov, once.cov, atol=1e-12)
    np.testing.assert_allclose(twice.carriers, once.carriers, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_beamsplitter_undone_by_itself_and_a_phase(seed):
    rng = np.random.default_rng(300 + seed)
    state, _ = random_network(rng)
    j, k = (int(m) for m in rng.choice(N_MODES, size=2, replace=False))
    transmission, phi = rng.uniform(0.0, 1.0), rng.uniform(-math.pi, math.pi)
    out = beamsplitter(state, j, k, transmission, phi)
    back = phase_shift(beamsplitter(out, j, k, transmission, 0.0), k, -phi)
    np.testing.assert_allclose(back.cov, state.cov, atol=1e-10)
    np.testing.assert_allclose(back.carriers, state.carriers, atol=1e-12)


@pytest.mark.parametrize("s, h", [(0.5, 2.0), (0.5, 100.0), (0.2, 8.0)])
def test_bell_currents_read_sum_and_difference_quadratures(s, h):
    p = SqueezerParams(power=1.0, squeezing=s, excess=h)
    epr_i, _ = build_epr_source(p, p, labels=("EPR1", "EPR2"))
    epr_ii, _ = build_epr_source(p, p, labels=("EPR3", "EPR4"))
    before = tensor(epr_i, epr_ii)
    phi = balance_phase(before, "EPR2", "EPR3")
    after = relabel(relabel(beamsplitter(before, "EPR2", "EPR3", 0.5, phi), "EPR2", "Mode5"), "EPR3", "Mode6")
    assert np.angle(after.carriers[1]) == pytest.approx(0.0, abs=1e-12)
    assert np.angle(after.carriers[2]) == pytest.approx(-math.pi / 2)
    i5, i6 = direct_tap(after, "Mode5"), direct_tap(after, "Mode6")
    plus, minus = mix([i5, i6], [1.0, 1.0]), mix([i5, i6], [1.0, -1.0])
    np.testing.assert_allclose(plus.coeffs, [0, 0, 1, 0, 0, -1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(minus.coeffs, [0, 0, 1, 0, 0, 1, 0, 0], atol=1e-12)

    splitter = beamsplitter_symplectic(4, 1, 2, 0.5, phi)
    x2, x3 = (quadrature_tap(before, m, Quadrature.X).coeffs for m in ("EPR2", "EPR3"))
    y2, y3 = (quadrature_tap(before, m, Quadrature.Y).coeffs for m in ("EPR2", "EPR3"))
    np.testing.assert_allclose(splitter.T @ plus.coeffs, x2 + x3, atol=1e-12)
    np.testing.assert_allclose(splitter.T @ minus.coeffs, y2 - y3, atol=1e-12)
