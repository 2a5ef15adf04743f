import pytest

from tdmac.cell import MacCellConfig


@pytest.fixture
def default_cfg():
    """Frozen calibrated default."""
    return MacCellConfig()


@pytest.fixture
def linear_cfg():
    """Nonlinearity and noise disabled: quantization is the only error."""
    return MacCellConfig(alpha2=0.0, alpha3=0.0, noise_sigma=0.0)
