"""Shared fixtures: small verified codes built once per session."""

import random

import pytest

from regenext.extend import extend_code, synthesize_base_code
from regenext.gf import FieldSpec


@pytest.fixture(scope="session")
def base_k2_p3():
    return synthesize_base_code(2, FieldSpec(3), random.Random("fixture-base-2-3"))


@pytest.fixture(scope="session")
def base_k3_p5():
    return synthesize_base_code(3, FieldSpec(5), random.Random("fixture-base-3-5"))


@pytest.fixture(scope="session")
def extended_k3_big():
    """A (5, 3, 3) code over GF(65521), one extension past the base."""
    base = synthesize_base_code(
        3, FieldSpec(65521), random.Random("fixture-base-3-big")
    )
    outcome = extend_code(base, random.Random("fixture-grow-3-big"))
    return outcome.code
