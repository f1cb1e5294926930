import pytest

from predmmo.model import ModelParams

GAMMA_H_START = (0.4641, 0.0978, 0.3272)
MMO_START = (0.01, 0.01, 0.12)


@pytest.fixture
def base():
    """Reference parameter set with the bistable h."""
    return ModelParams(h=0.785)


@pytest.fixture
def fig1():
    return ModelParams(beta1=0.5, beta2=0.25, c=0.4, d=0.25, a12=0.0, a21=0.0, h=1.25)
