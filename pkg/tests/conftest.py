"""Shared fixtures: validated corpus models, built once per session.

Validation runs a high-precision sweep, so every test that only reads a
model shares these instances instead of rebuilding them.
"""

from __future__ import annotations

import os

import pytest

from bubbleline.density import DensityModel
from bubbleline.extended import POS_INF

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DENSITY_DIR = os.path.join(REPO_ROOT, "densities")


def density_path(name: str) -> str:
    return os.path.join(DENSITY_DIR, name)


@pytest.fixture(scope="session")
def abs_model() -> DensityModel:
    model = DensityModel.from_formula(
        "abs(V) + exp(-abs(V))", "volume", name="abs_exp"
    )
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def sqrt_model() -> DensityModel:
    model = DensityModel.from_formula(
        "sqrt(V^2 + 1) - 1/2", "volume", name="sqrt_shift"
    )
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def borell_model() -> DensityModel:
    model = DensityModel.from_formula("exp(x^2)", "position", name="gauss_position")
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def atan_model() -> DensityModel:
    model = DensityModel.from_formula(
        "V*atan(V) - log(V^2 + 1)/2 + 1",
        "volume",
        analytic_M=POS_INF,
        name="atan_growth",
    )
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def atan_bare_model() -> DensityModel:
    model = DensityModel.from_formula(
        "V*atan(V) - log(V^2 + 1)/2 + 1", "volume", name="atan_bare"
    )
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def quadratic_model() -> DensityModel:
    model = DensityModel.from_formula("V^2 + 1", "volume", name="quadratic")
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def gauss_volume_model() -> DensityModel:
    model = DensityModel.from_formula("exp(V^2/2)", "volume", name="gauss_volume")
    model.require_valid()
    return model


@pytest.fixture(scope="session")
def exp_cosh_model() -> DensityModel:
    model = DensityModel.from_formula(
        "exp((exp(x) + exp(-x))/2)", "position", name="exp_cosh"
    )
    model.require_valid()
    return model
