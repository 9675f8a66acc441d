"""Core algebra of the stem-cell delay model.

Quiescent cells at concentration Q leave either by differentiation (constant
rate ``kappa``) or by entering the cell cycle at rate ``beta(Q)``, a
decreasing Hill function.  A cell that entered the cycle ``tau`` days earlier
returns as ``A = 2*exp(-gamma*tau)`` cells on average (mitosis minus
apoptosis), giving the delay equation

    Q'(t) = -(kappa + beta(Q(t))) * Q(t) + A * beta(Q(t-tau)) * Q(t-tau).

Everything in this module is a pure function of the parameter set.  Derived
quantities (A, the nontrivial steady state) are recomputed on demand rather
than cached on the parameter object, so parameter sweeps cannot desynchronise
them.

Units follow the calibration table: concentrations in 1e6 cells/kg, rates in
1/day, times in days.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "ModelParams",
    "HomeostasisSpec",
    "SteadyStates",
    "CalibrationError",
    "beta",
    "amplification",
    "derive_homeostasis",
    "steady_state",
    "existence_bounds",
    "h_and_G",
    "nondimensionalize",
    "NondimensionalForm",
    "rhs",
    "params_to_dict",
    "params_from_dict",
    "params_to_json",
    "params_from_json",
    "spec_from_dict",
    "TABLE1_SPEC",
    "table1_params",
]


class CalibrationError(ValueError):
    """Raised when a homeostasis specification cannot be calibrated."""


@dataclass(frozen=True)
class ModelParams:
    """The six model constants.

    kappa : differentiation rate (1/day)
    gamma : apoptosis rate during the cycle (1/day)
    tau   : cell-cycle duration (days)
    theta : half-effect concentration of the Hill function (1e6 cells/kg)
    f     : maximal cycle re-entry rate (1/day)
    s     : Hill coefficient (dimensionless)
    """

    kappa: float
    gamma: float
    tau: float
    theta: float
    f: float
    s: float

    def __post_init__(self):
        for name in ("kappa", "gamma", "tau", "theta", "f", "s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"parameter {name!r} must be strictly positive, got {v!r}")

    @property
    def amplification(self) -> float:
        """A = 2*exp(-gamma*tau), always in (0, 2)."""
        return amplification(self.gamma, self.tau)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class HomeostasisSpec:
    """Observable homeostasis quantities from which theta and kappa follow.

    Q_h is the resting-state concentration and beta_h = beta(Q_h) the
    resting-state cycle entry rate; f, s, gamma, tau as in ModelParams.
    """

    Q_h: float
    beta_h: float
    f: float
    s: float
    gamma: float
    tau: float

    def __post_init__(self):
        for name in ("Q_h", "beta_h", "f", "s", "gamma", "tau"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"spec field {name!r} must be strictly positive, got {v!r}")


@dataclass(frozen=True)
class SteadyStates:
    """The trivial state Q=0 (always present) and the nontrivial one if any."""

    trivial: float
    nontrivial: float | None


#: Calibration-table homeostasis specification.
TABLE1_SPEC = HomeostasisSpec(Q_h=1.1, beta_h=0.043, f=8.0, s=2.0, gamma=0.1, tau=2.8)


def table1_params() -> ModelParams:
    """Model parameters calibrated to the homeostasis table, full precision."""
    return derive_homeostasis(TABLE1_SPEC)


def beta(Q, p: ModelParams):
    """Cycle re-entry rate: the Hill function f*theta^s / (theta^s + Q^s).

    Monotonically decreasing in Q with beta(0) = f and beta(theta) = f/2.
    Accepts scalars or arrays; negative concentrations are rejected.
    """
    if np.any(np.asarray(Q) < 0):
        raise ValueError("concentration must be nonnegative")
    ths = p.theta**p.s
    return p.f * ths / (ths + Q**p.s)


def amplification(gamma: float, tau: float) -> float:
    """Division amplification factor 2*exp(-gamma*tau)."""
    if gamma < 0 or tau < 0:
        raise ValueError("gamma and tau must be nonnegative")
    return 2.0 * math.exp(-gamma * tau)


def derive_homeostasis(spec: HomeostasisSpec) -> ModelParams:
    """Calibrate theta and kappa so the given state is the exact steady state.

    Inverting beta(Q_h) = beta_h gives theta = Q_h*(f/beta_h - 1)^(-1/s);
    balancing the steady-state flux gives kappa = (A-1)*beta_h.  Requires
    0 < beta_h < f, otherwise the Hill inversion is undefined.
    """
    if spec.beta_h >= spec.f:
        raise CalibrationError(
            f"beta_h={spec.beta_h} must be below the maximal rate f={spec.f}"
        )
    A = amplification(spec.gamma, spec.tau)
    if A <= 1.0:
        raise CalibrationError(
            f"amplification A={A} <= 1: no positive steady state can be calibrated"
        )
    theta = spec.Q_h * math.exp(-math.log(spec.f / spec.beta_h - 1.0) / spec.s)
    kappa = (A - 1.0) * spec.beta_h
    return ModelParams(kappa=kappa, gamma=spec.gamma, tau=spec.tau,
                       theta=theta, f=spec.f, s=spec.s)


def steady_state(p: ModelParams) -> SteadyStates:
    """Both steady states of the model.

    The nontrivial state Q* = theta*(f*(A-1)/kappa - 1)^(1/s) exists iff
    kappa < f*(A-1).  At the boundary the would-be Q* coincides with the
    trivial state and is reported as absent.
    """
    A = p.amplification
    radicand = p.f * (A - 1.0) / p.kappa - 1.0
    if radicand <= 0.0:
        return SteadyStates(trivial=0.0, nontrivial=None)
    qstar = p.theta * math.exp(math.log(radicand) / p.s)
    return SteadyStates(trivial=0.0, nontrivial=qstar)


def existence_bounds(p: ModelParams) -> tuple[float, float]:
    """Upper bounds (kappa_max, tau_max) for the nontrivial state to exist.

    kappa_max = f*(A-1) at the given gamma, tau; tau_max solves
    gamma*tau = ln(2f/(kappa+f)) at the given kappa (infinite when gamma=0,
    where the bound never binds).
    """
    A = p.amplification
    kappa_max = p.f * (A - 1.0)
    if p.gamma == 0.0:
        tau_max = math.inf
    else:
        tau_max = math.log(2.0 * p.f / (p.kappa + p.f)) / p.gamma
    return kappa_max, tau_max


class HGValues(NamedTuple):
    h: float
    h_prime: float
    G: float
    G_prime: float


def h_and_G(Q, p: ModelParams) -> HGValues:
    """Cycle-entry flux h(Q) = Q*beta(Q), net drift G(Q) = (A-1)h(Q) - kappa*Q,
    and their derivatives in closed form.

    G vanishes exactly at the steady states; its sign is the sign of Q'.
    Accepts scalars or arrays.
    """
    if np.any(np.asarray(Q) < 0):
        raise ValueError("concentration must be nonnegative")
    ths = p.theta**p.s
    qs = Q**p.s
    den = ths + qs
    h = p.f * ths * Q / den
    h_prime = p.f * ths * (ths + (1.0 - p.s) * qs) / den**2
    A = p.amplification
    G = (A - 1.0) * h - p.kappa * Q
    G_prime = (A - 1.0) * h_prime - p.kappa
    return HGValues(h, h_prime, G, G_prime)


@dataclass(frozen=True)
class NondimensionalForm:
    """Scaled form of the model: time in units of tau, concentration of theta.

    The dynamics then depend only on (f_hat, kappa_hat, s, A_hat).
    """

    f_hat: float
    kappa_hat: float
    s: float
    A_hat: float
    time_scale: float
    conc_scale: float

    def mapped_params(self) -> ModelParams:
        """A parameter set whose raw dynamics equal the scaled equation.

        Simulating these parameters with delay 1 and half-effect 1 and then
        rescaling t -> t/time_scale, Q -> Q/conc_scale reproduces the
        original trajectory (used as a cross-simulation check).
        """
        return ModelParams(
            kappa=self.kappa_hat * self.f_hat,
            gamma=-math.log(self.A_hat / 2.0),
            tau=1.0,
            theta=1.0,
            f=self.f_hat,
            s=self.s,
        )


def nondimensionalize(p: ModelParams) -> NondimensionalForm:
    """Reduce the six parameters to the four that control the dynamics."""
    return NondimensionalForm(
        f_hat=p.tau * p.f,
        kappa_hat=p.kappa / p.f,
        s=p.s,
        A_hat=p.amplification,
        time_scale=p.tau,
        conc_scale=p.theta,
    )


def rhs(q_now: float, q_delayed: float, p: ModelParams) -> float:
    """Right-hand side of the delay equation at given current/delayed values."""
    if q_now < 0 or q_delayed < 0:
        raise ValueError("concentration must be nonnegative")
    A = p.amplification
    return -(p.kappa + beta(q_now, p)) * q_now + A * beta(q_delayed, p) * q_delayed


# ---------------------------------------------------------------------------
# serialization

_PARAM_KEYS = ("kappa", "gamma", "tau", "theta", "f", "s")
_SPEC_KEYS = ("Q_h", "beta_h", "f", "s", "gamma", "tau")


def params_to_dict(p: ModelParams) -> dict:
    return {k: getattr(p, k) for k in _PARAM_KEYS}


def params_from_dict(d: dict) -> ModelParams:
    missing = [k for k in _PARAM_KEYS if k not in d]
    if missing:
        raise ValueError(f"missing parameter keys: {missing}")
    extra = [k for k in d if k not in _PARAM_KEYS]
    if extra:
        raise ValueError(f"unknown parameter keys: {extra}")
    return ModelParams(**{k: float(d[k]) for k in _PARAM_KEYS})


def spec_from_dict(d: dict) -> HomeostasisSpec:
    missing = [k for k in _SPEC_KEYS if k not in d]
    if missing:
        raise ValueError(f"missing homeostasis keys: {missing}")
    extra = [k for k in d if k not in _SPEC_KEYS]
    if extra:
        raise ValueError(f"unknown homeostasis keys: {extra}")
    return HomeostasisSpec(**{k: float(d[k]) for k in _SPEC_KEYS})


def params_to_json(p: ModelParams) -> str:
    return json.dumps(params_to_dict(p), indent=2, sort_keys=True)


def params_from_json(text: str) -> ModelParams:
    return params_from_dict(json.loads(text))
