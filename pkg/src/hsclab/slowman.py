"""Slow-manifold toolkit for the relaxation-oscillation regime.

When the amplification barely exceeds one, the model is a singular
perturbation of an equation with a whole line of equilibria, and long-period
orbits drift along a slow manifold in the (Q(t), Q(t-tau)) embedding.  This
module computes the singular parameters, the Q'=0 nullcline, two
approximations of the slow manifold (a delay-expansion one and one built
from the real characteristic value of the locally linearised equation), the
linearised solutions near the manifold, and the concentration landmarks at
which the local behaviour changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import ModelParams, h_and_G, steady_state
from . import chareq

__all__ = [
    "SingularForm",
    "SlowManifoldPoint",
    "CanardLandmarks",
    "RegimeError",
    "NoRealRootGap",
    "ManifoldSingularity",
    "singular_params",
    "critical_manifold_stability_switch",
    "nullcline",
    "slow_manifold_naive",
    "slow_manifold_linearized",
    "slow_manifold_profile",
    "linearized_solution",
    "landmarks",
]


class RegimeError(ValueError):
    """The parameters are outside the slow-fast regime."""


class NoRealRootGap(ValueError):
    """The reference concentration lies in the interval around the steady
    state where the characteristic equation has no real roots."""

    def __init__(self, q_r: float, gap: tuple[float, float]):
        super().__init__(
            f"Q_r={q_r} lies inside the no-real-root interval {gap}")
        self.q_r = q_r
        self.gap = gap


class ManifoldSingularity(ValueError):
    """The delay-expansion manifold formula is singular at this point."""


@dataclass(frozen=True)
class SingularForm:
    """Perturbation decomposition: epsilon = A - 1 and C = epsilon*f/kappa.

    The nontrivial steady state theta*(C-1)^(1/s) depends on C only, not on
    epsilon, and exists exactly when C > 1.
    """

    epsilon: float
    C: float
    theta: float
    s: float

    def steady_state(self) -> float | None:
        if self.C <= 1.0:
            return None
        return self.theta * math.exp(math.log(self.C - 1.0) / self.s)


def singular_params(p: ModelParams) -> SingularForm:
    """Decompose the parameters into the singular form."""
    eps = p.amplification - 1.0
    if eps <= 0.0:
        raise RegimeError(f"amplification {1.0 + eps} is not above 1")
    return SingularForm(epsilon=eps, C=eps * p.f / p.kappa, theta=p.theta, s=p.s)


def critical_manifold_stability_switch(p: ModelParams) -> float | None:
    """Concentration at which the line of singular-limit equilibria changes
    stability, i.e. where h'(Q) = -1/tau.

    In scaled variables u = (Q/theta)^s this is the quadratic
    u^2 + (2 - (s-1)*f*tau)*u + 1 + f*tau = 0; the root nearest the steady
    state is returned, or None when there is no real root.
    """
    fhat = p.tau * p.f
    bcoef = 2.0 - (p.s - 1.0) * fhat
    disc = bcoef * bcoef - 4.0 * (1.0 + fhat)
    if disc < 0.0:
        return None
    us = [(-bcoef - math.sqrt(disc)) / 2.0, (-bcoef + math.sqrt(disc)) / 2.0]
    qs = [p.theta * math.exp(math.log(u) / p.s) for u in us if u > 0.0]
    if not qs:
        return None
    ref = steady_state(p).nontrivial
    if ref is None:
        ref = p.theta
    return min(qs, key=lambda q: abs(q - ref))


# ---------------------------------------------------------------------------
# nullcline

def nullcline(p: ModelParams, given: str, value: float) -> list[float]:
    """Companion values on the Q' = 0 nullcline.

    With ``given="q_now"`` the delayed coordinate is solved for (a quadratic
    in the delayed value when s = 2); with ``given="q_delayed"`` the current
    coordinate solves a cubic (s = 2).  Other Hill exponents fall back to a
    scan-and-bisect solve.  Returns every nonnegative solution, possibly
    empty, polished to ~1e-13.
    """
    if value < 0.0:
        raise ValueError("concentrations are nonnegative")
    A = p.amplification
    ths = p.theta**p.s
    if given == "q_now":
        rhs_now = (p.kappa + p.f * ths / (ths + value**p.s)) * value
        fn = lambda y: A * p.f * ths * y / (ths + y**p.s) - rhs_now
        if p.s == 2.0:
            if rhs_now == 0.0:
                return [0.0]
            coefs = [rhs_now * ths, -A * p.f * ths, rhs_now]  # low -> high in y
            roots = _poly_roots_nonneg(coefs)
        else:
            roots = _scan_roots(fn, p)
    elif given == "q_delayed":
        rhs_del = A * p.f * ths * value / (ths + value**p.s)
        fn = lambda q: (p.kappa + p.f * ths / (ths + q**p.s)) * q - rhs_del
        if p.s == 2.0:
            coefs = [-rhs_del * ths, (p.kappa + p.f) * ths, -rhs_del, p.kappa]
            roots = _poly_roots_nonneg(coefs)
        else:
            roots = _scan_roots(fn, p)
    else:
        raise ValueError("given must be 'q_now' or 'q_delayed'")
    return sorted(_polish(fn, r) for r in roots)


def _poly_roots_nonneg(coefs_lowhigh) -> list[float]:
    c = np.trim_zeros(np.asarray(coefs_lowhigh, float), "b")
    if c.size <= 1:
        return []
    roots = np.polynomial.polynomial.polyroots(c)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and r.real >= -1e-14:
            out.append(max(float(r.real), 0.0))
    out.sort()
    dedup = []
    for r in out:
        if not dedup or abs(r - dedup[-1]) > 1e-11 * max(1.0, r):
            dedup.append(r)
    return dedup


def _scan_roots(fn, p: ModelParams, hi_factor: float = 200.0) -> list[float]:
    hi = hi_factor * p.theta
    grid = np.linspace(0.0, hi, 4001)
    vals = np.array([fn(g) for g in grid])
    out = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            out.append(grid[i])
        elif (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            out.append(brentq(fn, grid[i], grid[i + 1], xtol=1e-14))
    return out


def _polish(fn, r: float, delta: float = 1e-9) -> float:
    # one secant-style correction keeps closed-form roots at ~1e-13 residual
    f0 = fn(r)
    if f0 == 0.0:
        return r
    d = delta * max(1.0, abs(r))
    f1 = fn(r + d)
    if f1 == f0:
        return r
    step = f0 * d / (f1 - f0)
    r2 = r - step
    return r2 if r2 >= 0.0 and abs(fn(r2)) < abs(f0) else r


# ---------------------------------------------------------------------------
# slow-manifold approximations

def slow_manifold_naive(Q: float, p: ModelParams) -> float:
    """Delay-expansion approximation: replace the delayed flux by its
    first-order expansion along the solution, giving the delayed coordinate

        Q_tau = ((1 + kappa*tau + A*tau*h'(Q))*Q - tau*(A-1)*h(Q))
                / (1 + A*tau*h'(Q)).
    """
    A = p.amplification
    hv = h_and_G(Q, p)
    den = 1.0 + A * p.tau * hv.h_prime
    if abs(den) < 1e-12:
        raise ManifoldSingularity(f"expansion denominator vanishes at Q={Q}")
    num = (1.0 + p.kappa * p.tau + A * p.tau * hv.h_prime) * Q \
        - p.tau * (A - 1.0) * hv.h
    return num / den


@dataclass(frozen=True)
class SlowManifoldPoint:
    """One point of the linearisation-based manifold approximation."""

    Q_r: float
    lam: float       # real characteristic value of the local linearisation
    Q_prime: float   # drift lam * G / G'
    Q_tau: float     # delayed coordinate Q_r - tau * Q_prime
    regime: str      # below_Qf | Qf_to_Qh | above_Qhp


@dataclass(frozen=True)
class CanardLandmarks:
    """Concentration landmarks of the slow-fast structure."""

    Q_f: float             # drift maximum (G' = 0)
    Q_h: float | None      # flux maximum (h' = 0)
    Q_star: float          # nontrivial steady state
    switch: float | None   # singular-limit stability switch
    gap: tuple[float | None, float | None]  # no-real-root interval ends
    rebound: float | None  # upper end of the two-positive-real-root window


def landmarks(p: ModelParams) -> CanardLandmarks:
    qs = steady_state(p).nontrivial
    if qs is None:
        raise RegimeError("no nontrivial steady state at these parameters")
    gprime = lambda q: h_and_G(q, p).G_prime
    if gprime(qs * 1e-9) <= 0.0:
        raise RegimeError("drift is not increasing at small Q")
    q_f = brentq(gprime, qs * 1e-9, qs, xtol=1e-15)
    q_h = None
    if p.s > 1.0:
        q_h = p.theta * math.exp(-math.log(p.s - 1.0) / p.s)
    gap = chareq.lambertw_coalescence(p)
    return CanardLandmarks(
        Q_f=q_f, Q_h=q_h, Q_star=qs,
        switch=critical_manifold_stability_switch(p),
        gap=gap, rebound=chareq.real_root_rebound(p),
    )


def slow_manifold_linearized(Q_r: float, p: ModelParams,
                             marks: CanardLandmarks | None = None) -> SlowManifoldPoint:
    """Manifold point from the real characteristic value of the equation
    linearised about Q_r.

    Below the no-real-root gap the principal branch root is used (it is the
    positive root below the drift maximum and the negative one above);
    beyond the gap the smaller of the two positive roots is taken.  Inside
    the gap a NoRealRootGap is raised; plotting code is expected to leave
    the interval empty rather than interpolate across it.
    """
    if Q_r <= 0.0:
        raise ValueError("Q_r must be positive")
    if marks is None:
        marks = landmarks(p)
    q_lo, q_hi = marks.gap
    if q_lo is not None and q_hi is not None and q_lo < Q_r < q_hi:
        raise NoRealRootGap(Q_r, (q_lo, q_hi))
    c = chareq.coeffs_at(Q_r, p)
    roots = chareq.real_roots(c)
    if not roots:
        raise NoRealRootGap(Q_r, (q_lo, q_hi))
    if q_hi is not None and Q_r >= q_hi:
        lam = min(r.re for r in roots)  # smaller of the two positive roots
        regime = "above_Qhp"
    else:
        lam = max(r.re for r in roots)  # principal-branch root
        regime = "below_Qf" if Q_r < marks.Q_f else "Qf_to_Qh"
    hv = h_and_G(Q_r, p)
    if abs(hv.G_prime) > 1e-12:
        q_prime = lam * hv.G / hv.G_prime
    else:
        # at the drift maximum both lam and G' vanish; use the limit ratio
        q_prime = hv.G / (1.0 + c.b * c.tau)
    q_tau = Q_r - p.tau * q_prime
    return SlowManifoldPoint(Q_r=Q_r, lam=lam, Q_prime=q_prime,
                             Q_tau=q_tau, regime=regime)


def slow_manifold_profile(p: ModelParams, q_values) -> list[dict]:
    """Rows (Q_r, lambda, Q_prime, Q_tau, regime) over a concentration grid;
    points inside the no-real-root gap become typed gap markers."""
    marks = landmarks(p)
    rows = []
    for q in np.atleast_1d(q_values):
        try:
            pt = slow_manifold_linearized(float(q), p, marks)
            rows.append({"Q_r": pt.Q_r, "lambda": pt.lam,
                         "Q_prime": pt.Q_prime, "Q_tau": pt.Q_tau,
                         "regime": pt.regime})
        except NoRealRootGap:
            rows.append({"Q_r": float(q), "lambda": math.nan,
                         "Q_prime": math.nan, "Q_tau": math.nan,
                         "regime": "gap"})
    return rows


def linearized_solution(Q_r: float, p: ModelParams, modes=()) :
    """Solution of the equation linearised about Q_r, as a callable of time.

    The monotone backbone Q_r + (exp(lam*t) - 1)*G/G' rides the real
    characteristic value; each extra mode (root, beta, gamma) adds
    exp(Re(root)*t) * (beta*cos(Im(root)*t) + gamma*sin(Im(root)*t)).
    Mode roots must actually solve the characteristic equation for the
    linearisation at Q_r.
    """
    pt = slow_manifold_linearized(Q_r, p)
    hv = h_and_G(Q_r, p)
    backbone = hv.G / hv.G_prime if abs(hv.G_prime) > 1e-12 else 0.0
    c = chareq.coeffs_at(Q_r, p)
    checked = []
    for root, b_coef, g_coef in modes:
        lam = root.lam if isinstance(root, chareq.CharRoot) else complex(root)
        res = abs(chareq.char_value(c, lam)) / max(1.0, abs(lam))
        if res > 1e-8:
            raise ValueError(
                f"mode root {lam} does not solve the characteristic equation "
                f"at Q_r={Q_r} (residual {res:.2e})")
        checked.append((lam, float(b_coef), float(g_coef)))

    def solution(t):
        t = np.asarray(t, dtype=float)
        out = Q_r + (np.exp(pt.lam * t) - 1.0) * backbone
        for lam, b_coef, g_coef in checked:
            out = out + np.exp(lam.real * t) * (
                b_coef * np.cos(lam.imag * t) + g_coef * np.sin(lam.imag * t))
        return float(out) if out.ndim == 0 else out

    return solution
