"""Exact DC solution of the two-party resistive loop.

The loop is: Alice's source u_a in series with her private r_a and her copy
of the shared r_s, an ideal lossless wire, then the peer copy of r_s and
Bob's private r_b back to his source u_b. The public wire exposes exactly
one voltage u_c and one current i_c. Positive current flows from Alice's
side toward Bob's side.

All solutions are closed over the rationals; nothing in this module rounds.
A separate floating-point layer (:func:`observe_with_noise`) exists only to
characterize measurement-noise margins and is off by default.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import BothDeltasNonzero, BothDeltasZero, ZeroCurrentDelta
from .rational import as_fraction


@dataclass(frozen=True)
class Resistance:
    """A strictly positive resistance in ohms."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))
        if self.value <= 0:
            raise ValueError(f"resistance must be positive, got {self.value}")


@dataclass(frozen=True)
class Voltage:
    """A source or line voltage in volts."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))


@dataclass(frozen=True)
class Current:
    """A current in amperes, positive from Alice's side toward Bob's."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))


@dataclass(frozen=True)
class LoopParams:
    """The five circuit quantities defining one protocol instant."""

    r_s: Resistance
    r_a: Resistance
    r_b: Resistance
    u_a: Voltage
    u_b: Voltage


@dataclass(frozen=True)
class LineObservation:
    """The public wire pair (u_c, i_c): all a passive observer ever sees."""

    u_c: Voltage
    i_c: Current


@dataclass(frozen=True)
class NoisyObservation:
    """Floating-point line measurement; the only inexact type in the package."""

    u_c: float
    i_c: float


def loop_params(r_s, r_a, r_b, u_a, u_b) -> LoopParams:
    """Convenience constructor accepting ints/strings/Fractions."""
    return LoopParams(
        r_s=Resistance(r_s),
        r_a=Resistance(r_a),
        r_b=Resistance(r_b),
        u_a=Voltage(u_a),
        u_b=Voltage(u_b),
    )


def solve_loop(params: LoopParams) -> LineObservation:
    """Solve the loop exactly for the public (u_c, i_c).

    The shared resistance sits on both sides of the wire, so the total loop
    resistance is r_a + 2*r_s + r_b. Positivity of every resistance makes
    the total nonzero, so no division can fail.
    """
    r_s = params.r_s.value
    total = params.r_a.value + 2 * r_s + params.r_b.value
    i_c = (params.u_a.value - params.u_b.value) / total
    u_c = params.u_a.value - (params.r_a.value + r_s) * i_c
    return LineObservation(u_c=Voltage(u_c), i_c=Current(i_c))


def perturbed_pair(
    params: LoopParams, delta_u_a: Voltage, delta_u_b: Voltage
) -> tuple[LineObservation, LineObservation]:
    """Baseline and one-sided-perturbation observations, as a pure pair.

    Exactly one of the deltas must be nonzero; the protocol perturbs one
    side at a time.
    """
    da, db = delta_u_a.value, delta_u_b.value
    if da == 0 and db == 0:
        raise BothDeltasZero("one source must be shifted")
    if da != 0 and db != 0:
        raise BothDeltasNonzero("only one source may be shifted at a time")
    baseline = solve_loop(params)
    shifted = LoopParams(
        r_s=params.r_s,
        r_a=params.r_a,
        r_b=params.r_b,
        u_a=Voltage(params.u_a.value + da),
        u_b=Voltage(params.u_b.value + db),
    )
    return baseline, solve_loop(shifted)


def differential_slope(
    baseline: LineObservation, perturbed: LineObservation
) -> Fraction:
    """|dU_c / dI_c| between two observations, in ohms.

    The magnitude is taken deliberately: with a single global current
    reference, an Alice-driven perturbation yields slope +(r_s + r_b) and a
    Bob-driven one -(r_s + r_a). Using magnitudes keeps one sign convention
    for all measurements while both identities hold as written.
    """
    di = perturbed.i_c.value - baseline.i_c.value
    if di == 0:
        raise ZeroCurrentDelta("perturbation produced no current change")
    du = perturbed.u_c.value - baseline.u_c.value
    return abs(du / di)


def observe_with_noise(
    obs: LineObservation, sigma_u: float, sigma_i: float, rng_seed
) -> NoisyObservation:
    """Add independent zero-mean Gaussian meter noise to an exact observation.

    With both sigmas zero this is the exact value converted to float.
    Deterministic for a fixed seed.
    """
    if sigma_u < 0 or sigma_i < 0:
        raise ValueError("noise sigmas must be non-negative")
    u = float(obs.u_c.value)
    i = float(obs.i_c.value)
    if sigma_u == 0 and sigma_i == 0:
        return NoisyObservation(u_c=u, i_c=i)
    rng = random.Random(rng_seed)
    return NoisyObservation(
        u_c=u + rng.gauss(0.0, sigma_u),
        i_c=i + rng.gauss(0.0, sigma_i),
    )
