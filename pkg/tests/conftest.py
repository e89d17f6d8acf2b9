import numpy as np
import pytest

from qswap.schemas import SqueezerParams, SwapParams
from qswap.services.gaussian import BrightState, prepare_coherent_beam, prepare_squeezed_beam, tensor
from qswap.services.scenarios import build_epr_source, swap_setup


@pytest.fixture
def squeezed_params():
    return SqueezerParams(power=1.0, squeezing=0.5, excess=100.0)


@pytest.fixture
def squeezed_beam(squeezed_params):
    return prepare_squeezed_beam(squeezed_params, "SQ")


@pytest.fixture
def epr_pair(squeezed_params):
    state, _ = build_epr_source(squeezed_params, squeezed_params, labels=("EPR1", "EPR2"))
    return state


@pytest.fixture
def pure_epr_pair():
    p = SqueezerParams(power=1.0, squeezing=0.5, excess=2.0)
    state, _ = build_epr_source(p, p, labels=("EPR1", "EPR2"))
    return state


@pytest.fixture
def coherent_pair():
    return tensor(prepare_coherent_beam(1.0, 0.0, "A"), prepare_coherent_beam(1.0, 0.0, "B"))


@pytest.fixture
def pure_swap_setup():
    return swap_setup(SwapParams(squeezing_i=0.5, excess_i=2.0, squeezing_ii=0.5, excess_ii=2.0))


@pytest.fixture
def mixed_swap_setup():
    return swap_setup(SwapParams())


@pytest.fixture
def make_state():
    def state_from(cov, carriers=None, labels=None):
        cov = np.asarray(cov, dtype=float)
        n = cov.shape[0] // 2
        carriers = np.ones(n) if carriers is None else carriers
        labels = tuple(f"M{k}" for k in range(n)) if labels is None else labels
        return BrightState(carriers, cov, labels)
    return state_from
