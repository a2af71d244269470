"""Shared fixtures: the builtin instances used across the suite."""
import pytest

from app.services.instances import instance_line3, instance_line4, instance_multi4, instance_simplex


@pytest.fixture
def line3():
    return instance_line3()


@pytest.fixture
def line4():
    return instance_line4(9.0)


@pytest.fixture
def multi4():
    return instance_multi4(3.0)


@pytest.fixture
def simplex5():
    return instance_simplex(5, 3.0)
