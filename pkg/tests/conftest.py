"""Shared fixtures and independent oracles.

The nodal oracle here derives the line pair from node-voltage analysis
(conductance-weighted source average), a different derivation path from
the loop-current formula in the package; tests compare the two.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from kexlab import LoopParams, Palette, SharedSecret, loop_params
from kexlab.circuit import Resistance, Voltage


def nodal_oracle(r_s, r_a, r_b, u_a, u_b) -> tuple[Fraction, Fraction]:
    """(u_c, i_c) via node analysis: independent of the loop-current formula."""
    r_s, r_a, r_b = Fraction(r_s), Fraction(r_a), Fraction(r_b)
    u_a, u_b = Fraction(u_a), Fraction(u_b)
    g_a = 1 / (r_a + r_s)
    g_b = 1 / (r_s + r_b)
    u_c = (g_a * u_a + g_b * u_b) / (g_a + g_b)
    i_c = (u_a - u_c) * g_a
    return u_c, i_c


def nodal_oracle_injected(r_s, r_a, r_b, u_a, u_b, i_inj):
    """(u_c, i_alice, i_bob) with a current source at the wire node."""
    r_s, r_a, r_b = Fraction(r_s), Fraction(r_a), Fraction(r_b)
    u_a, u_b, i_inj = Fraction(u_a), Fraction(u_b), Fraction(i_inj)
    g_a = 1 / (r_a + r_s)
    g_b = 1 / (r_s + r_b)
    u_c = (g_a * u_a + g_b * u_b + i_inj) / (g_a + g_b)
    return u_c, (u_a - u_c) * g_a, (u_c - u_b) * g_b


@pytest.fixture
def e1_params() -> LoopParams:
    """The worked example: r_s=1000, r_a=2000, r_b=3000, u_a=5, u_b=1."""
    return loop_params(1000, 2000, 3000, 5, 1)


@pytest.fixture
def e1_shared() -> SharedSecret:
    return SharedSecret(r_s=Resistance(1000), auth_key=b"k" * 32)


# -- hypothesis strategies ---------------------------------------------------

positive_rationals = st.fractions(
    min_value=Fraction(1, 100), max_value=Fraction(10**6)
)
any_rationals = st.fractions(min_value=Fraction(-1000), max_value=Fraction(1000))
nonzero_rationals = any_rationals.filter(lambda x: x != 0)


@st.composite
def loop_params_st(draw) -> LoopParams:
    return LoopParams(
        r_s=Resistance(draw(positive_rationals)),
        r_a=Resistance(draw(positive_rationals)),
        r_b=Resistance(draw(positive_rationals)),
        u_a=Voltage(draw(any_rationals)),
        u_b=Voltage(draw(any_rationals)),
    )


def random_palette(rng: random.Random, size: int, max_value: int, positive=True) -> Palette:
    """Distinct random integer palette for randomized experiments."""
    low = 1 if positive else -max_value
    values: set[int] = set()
    while len(values) < size:
        values.add(rng.randint(low, max_value))
    return Palette(values)
