"""Time-dependent external potential of two accelerated Gaussian wells.

In program units the potential reads

    V(x, t) = -V0 exp(-(x - mu(t))^2) - V0' exp(-((x - mu'(t))/alpha)^2)

with parabolic, mirror-symmetric trajectories mu(t) = mu0 + a t^2/2 and
mu'(t) = -mu(t).  Trajectories are evaluated analytically at arbitrary t
so that integrator substeps can sample mid-step potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, Kinematics

FWHM_HALF_WIDTH = math.sqrt(math.log(2.0))


@dataclass(frozen=True)
class WellParameters:
    """Depths, width ratio, initial centers and acceleration of the wells.

    Carries the contact-interaction strength g as well so that one object
    fully determines the two-body Hamiltonian; the potential itself never
    reads it.
    """

    V0: float
    V0_prime: float
    alpha: float
    mu0: float
    mu0_prime: float
    a: float
    g: float = 0.0


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    mu: float
    mu_prime: float
    d: float


def from_config(config: ExperimentConfig, kinematics: Kinematics) -> WellParameters:
    return WellParameters(
        V0=config.V0,
        V0_prime=config.V0_prime,
        alpha=config.alpha,
        mu0=config.mu0,
        mu0_prime=config.mu0_prime,
        a=kinematics.a,
        g=config.g,
    )


def well_centers(params: WellParameters, t: float) -> TrajectorySample:
    """Well centers and separation at time t >= 0."""
    shift = 0.5 * params.a * t * t
    mu = params.mu0 + shift
    mu_prime = params.mu0_prime - shift
    return TrajectorySample(t=t, mu=mu, mu_prime=mu_prime, d=mu_prime - mu)


def potential_at(params: WellParameters, x, t: float):
    """Potential energy at position(s) x and time t."""
    sample = well_centers(params, t)
    x = np.asarray(x, dtype=float)
    v = -params.V0 * np.exp(-((x - sample.mu) ** 2))
    if params.V0_prime != 0.0:
        v = v - params.V0_prime * np.exp(-(((x - sample.mu_prime) / params.alpha) ** 2))
    if v.ndim == 0:
        return float(v)
    return v


def barrier_height(params: WellParameters, t: float) -> float:
    """Potential at x = 0, the height of the inter-well barrier."""
    return potential_at(params, 0.0, t)


def fwhm_bounds(params: WellParameters, t: float):
    """FWHM intervals (lo, hi) of both wells; None marks an absent well.

    A well of zero depth has no half-maximum, so its interval is reported
    as None rather than a degenerate pair.
    """
    sample = well_centers(params, t)
    left = None
    right = None
    if params.V0 > 0.0:
        left = (sample.mu - FWHM_HALF_WIDTH, sample.mu + FWHM_HALF_WIDTH)
    if params.V0_prime > 0.0:
        half = params.alpha * FWHM_HALF_WIDTH
        right = (sample.mu_prime - half, sample.mu_prime + half)
    return left, right


def coincidence_time(params: WellParameters) -> float:
    """Time at which the well centers coincide (d = 0)."""
    if params.a <= 0.0:
        raise ValueError("coincidence time requires a > 0")
    d0 = params.mu0_prime - params.mu0
    return math.sqrt(d0 / params.a)
