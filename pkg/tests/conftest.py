# tests/conftest.py
"""Shared fixtures: the model operators used across the suite."""
import pytest

from src.entities.models import (
    CoefficientFunction,
    ModelOperatorSpec,
    OperatorCase,
    SubprincipalSymbol,
)

MINUS_I_T = CoefficientFunction((0j, -1j))


@pytest.fixture
def beta_spec():
    """Tangential j=2, k=0 with b0 = -i t."""
    return ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=0, b=SubprincipalSymbol(b0=MINUS_I_T))


@pytest.fixture
def dxi_beta_spec():
    """hD1(hD1 + h^2 D2^2) + h^2 b1 D2 with b1 = -i t."""
    return ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=1, b=SubprincipalSymbol(b1=MINUS_I_T))


@pytest.fixture
def factorable_spec():
    return ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=2,
        b=SubprincipalSymbol(b0=CoefficientFunction((0.5j, -1j))),
    )


@pytest.fixture
def transversal_spec():
    return ModelOperatorSpec(OperatorCase.TRANSVERSAL, j=1, k=1, b=SubprincipalSymbol(b0=MINUS_I_T))
