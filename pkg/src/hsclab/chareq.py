"""Linear stability machinery for the delay model.

Linearising the model about a reference concentration gives

    z'(t) = a*z(t) + b*z(t - tau)

whose eigenvalues solve the transcendental characteristic equation

    p(lambda) = lambda - a - b*exp(-lambda*tau) = 0.

This module computes the linearisation coefficients, real roots (via an
in-house Lambert-W), complex roots (grid-seeded Newton cross-checked by an
argument-principle winding count), the stability-region classification with
its boundary curve, critical delays, and one-parameter Hopf-point location.

All functions are pure; nothing here mutates shared state.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import ModelParams, h_and_G, steady_state, existence_bounds

__all__ = [
    "LinearizationCoeffs",
    "CharRoot",
    "CriticalDelays",
    "StabilityAssessment",
    "IncompleteRootCoverageWarning",
    "lambert_w",
    "coeffs_at",
    "linearize_at",
    "char_value",
    "real_roots",
    "complex_roots",
    "winding_number",
    "rightmost_complex_pair",
    "rightmost_root",
    "real_part_cap",
    "stability_region",
    "critical_delays",
    "hopf_locus_1p",
    "lambertw_coalescence",
    "c0_curve",
]

_INV_E = math.exp(-1.0)


class IncompleteRootCoverageWarning(UserWarning):
    """A root search could not be reconciled with the winding count."""


# ---------------------------------------------------------------------------
# Lambert W (real branches 0 and -1)

def lambert_w(branch: int, x: float) -> float:
    """Real Lambert-W: the solution w of w*exp(w) = x on the given branch.

    Branch 0 is defined for x >= -1/e and returns w >= -1; branch -1 for
    -1/e <= x < 0 and returns w <= -1.  Halley iteration from a
    branch-appropriate seed; near the branch point -1/e a square-root
    expansion seed is used.  Converges to w*e^w = x within ~1e-15 relative.
    """
    if branch not in (0, -1):
        raise ValueError("branch must be 0 or -1")
    if math.isnan(x):
        raise ValueError("x must be a number")

    rad = 2.0 * (math.e * x + 1.0)
    if rad < 0.0:
        if rad > -1e-12:
            rad = 0.0
        else:
            raise ValueError(f"x={x} below the branch point -1/e")
    if branch == -1 and x >= 0.0:
        raise ValueError(f"branch -1 requires x < 0, got x={x}")

    # seed
    if rad == 0.0:
        return -1.0
    p = math.sqrt(rad)
    if branch == 0:
        if x > 1e300:
            # solve w + log(w) = log(x) to avoid overflow of e^w
            return _w0_from_log(math.log(x))
        if x < -0.31:  # close to the branch point
            w = -1.0 + p - p * p / 3.0 + 11.0 * p**3 / 72.0
        elif x < 2.0:
            w = math.log1p(x) if x > -0.25 else x * (1.0 - x)
            if w <= -1.0:
                w = -0.99
        else:
            lx = math.log(x)
            w = lx - math.log(lx)
    else:
        if x > -0.31:  # tail towards 0-
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w = l1 - l2 + l2 / l1
        else:
            w = -1.0 - p - p * p / 3.0 - 11.0 * p**3 / 72.0

    # Halley
    for _ in range(100):
        ew = math.exp(w)
        fw = w * ew - x
        if fw == 0.0:
            break
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * fw / (2.0 * wp1)
        dw = fw / denom
        w -= dw
        if branch == -1 and w > -1.0:
            w = -1.0 - 1e-16
        if branch == 0 and w < -1.0:
            w = -1.0 + 1e-16
        if abs(dw) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def _w0_from_log(lx: float) -> float:
    # Newton on g(w) = w + log(w) - lx, safe for astronomically large x
    w = lx - math.log(lx)
    for _ in range(60):
        dw = (w + math.log(w) - lx) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 1e-16 * w:
            break
    return w


# ---------------------------------------------------------------------------
# coefficients and roots

@dataclass(frozen=True)
class LinearizationCoeffs:
    """Coefficients (a, b) of z' = a z + b z(t-tau) plus the delay itself."""

    a: float
    b: float
    tau: float


@dataclass(frozen=True)
class CharRoot:
    """A characteristic value with its normalized residual.

    Complex roots are stored with nonnegative imaginary part and stand for a
    conjugate pair.  residual = |p(lambda)| / max(1, |lambda|).
    """

    lam: complex
    residual: float
    kind: str  # "real" | "complex-pair"

    @property
    def re(self) -> float:
        return self.lam.real

    @property
    def im(self) -> float:
        return self.lam.imag


def _safe_cexp(w: complex) -> complex:
    # clamp the magnitude so wandering Newton iterates cannot overflow;
    # converged roots satisfy |exp(-lam*tau)| = |lam-a|/|b|, far below this
    if w.real > 690.0:
        w = complex(690.0, w.imag)
    return cmath.exp(w)


def char_value(c: LinearizationCoeffs, lam: complex) -> complex:
    """p(lambda) = lambda - a - b*exp(-lambda*tau)."""
    return lam - c.a - c.b * _safe_cexp(-lam * c.tau)


def _char_deriv(c: LinearizationCoeffs, lam: complex) -> complex:
    return 1.0 + c.b * c.tau * _safe_cexp(-lam * c.tau)


def _make_root(c: LinearizationCoeffs, lam: complex) -> CharRoot:
    if lam.imag < 0:
        lam = lam.conjugate()
    res = abs(char_value(c, lam)) / max(1.0, abs(lam))
    kind = "real" if lam.imag == 0.0 else "complex-pair"
    return CharRoot(lam=lam, residual=res, kind=kind)


def coeffs_at(Q: float, p: ModelParams) -> LinearizationCoeffs:
    """Linearisation coefficients a = -kappa - h'(Q), b = A*h'(Q) at any
    reference concentration (no steady-state requirement)."""
    hp = h_and_G(Q, p).h_prime
    return LinearizationCoeffs(a=-p.kappa - hp, b=p.amplification * hp, tau=p.tau)


def linearize_at(Q_eq: float, p: ModelParams) -> LinearizationCoeffs:
    """Linearisation at a steady state; rejects non-equilibrium points.

    The residual check uses the steady-state balance G(Q_eq) = 0 scaled by
    the natural flux f*max(Q_eq, theta).
    """
    g = h_and_G(Q_eq, p).G
    if abs(g) > 1e-8 * p.f * max(Q_eq, p.theta):
        raise ValueError(
            f"Q_eq={Q_eq} is not a steady state (drift residual {g:.3e})"
        )
    return coeffs_at(Q_eq, p)


def real_roots(c: LinearizationCoeffs) -> list[CharRoot]:
    """All real characteristic values, via the Lambert-W reduction
    lambda = a + W(b*tau*exp(-a*tau))/tau.

    b > 0 gives exactly one real root; b < 0 gives two, one, or zero roots
    depending on whether b*tau*exp(-a*tau) lies above, at, or below -1/e.
    """
    a, b, tau = c.a, c.b, c.tau
    if b == 0.0:
        return [_make_root(c, complex(a))]
    arg = -a * tau + math.log(abs(b) * tau)
    if b > 0.0:
        if arg > 690.0:  # e^arg would overflow; log-space solve
            w = _w0_from_log(arg)
        else:
            w = lambert_w(0, math.exp(arg))
        return [_make_root(c, complex(a + w / tau))]
    x = -math.exp(arg) if arg < 690.0 else -math.inf
    if x < -_INV_E:
        if x > -_INV_E * (1.0 + 1e-13):
            return [_make_root(c, complex(a - 1.0 / tau))]  # coalesced double root
        return []
    if x == -_INV_E:
        return [_make_root(c, complex(a - 1.0 / tau))]
    roots = [
        _make_root(c, complex(a + lambert_w(0, x) / tau)),
        _make_root(c, complex(a + lambert_w(-1, x) / tau)),
    ]
    roots.sort(key=lambda r: -r.re)
    return roots


def real_part_cap(c: LinearizationCoeffs) -> float:
    """An upper bound r* on the real part of every characteristic value:
    the unique solution of r = a + |b|*exp(-r*tau)."""
    a, b, tau = c.a, abs(c.b), c.tau
    if b == 0.0:
        return a
    g = lambda r: a + b * math.exp(-min(r * tau, 700.0)) - r
    hi = a + b + 1.0
    while g(hi) > 0.0:  # g is strictly decreasing in r
        hi += max(1.0, abs(hi))
    lo = hi - 1.0
    while g(lo) < 0.0:
        hi = lo
        lo -= max(1.0, abs(lo))
    return brentq(g, lo, hi, xtol=1e-13)


def _newton_root(c: LinearizationCoeffs, z: complex) -> complex | None:
    for _ in range(80):
        pz = char_value(c, z)
        dpz = _char_deriv(c, z)
        if dpz == 0:
            return None
        dz = pz / dpz
        z -= dz
        if abs(z) > 1e9:
            return None
        if abs(dz) <= 1e-14 * (1.0 + abs(z)):
            # two polishing steps
            for _ in range(2):
                z -= char_value(c, z) / _char_deriv(c, z)
            return z
    return None


def complex_roots(c: LinearizationCoeffs, re_min: float, im_max: float,
                  re_max: float | None = None) -> list[CharRoot]:
    """Conjugate-pair characteristic values in the window
    re_min <= Re < re_max (default: above-all-roots cap), 0 < Im <= im_max.

    Newton iteration from a uniform seed grid (imaginary pitch <= pi/(2 tau)
    to respect the root spacing), deduplicated, then count-verified against
    an argument-principle winding integral over the search rectangle.  A
    count mismatch triggers denser reseeding; if it persists an
    IncompleteRootCoverageWarning is issued rather than silently dropping
    roots.  Real roots are excluded (see real_roots).
    """
    if im_max <= 0:
        raise ValueError("im_max must be positive")
    if c.b == 0.0:
        return []
    if re_max is None:
        re_max = real_part_cap(c) + 1.0
    if re_max <= re_min:
        raise ValueError("empty search window: re_min above the root cap")

    pairs: list[complex] = []
    target = None
    for refine in range(4):
        pitch_im = math.pi / (2.0 * c.tau) / (1 << refine)
        pitch_re = min(pitch_im, (re_max - re_min) / 12.0)
        res = np.arange(re_min + pitch_re / 2.0, re_max, pitch_re)
        ims = np.arange(pitch_im / 2.0, im_max + pitch_im, pitch_im)
        found: list[complex] = []
        for im in ims:
            for re in res:
                z = _newton_root(c, complex(re, im))
                if z is None:
                    continue
                if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
                    continue  # converged onto a real root
                z = complex(z.real, abs(z.imag))
                if not (re_min <= z.real <= re_max and z.imag <= im_max):
                    continue
                if all(abs(z - w) > 1e-8 * max(1.0, abs(z)) for w in found):
                    found.append(z)
        pairs = found
        target = _expected_pair_count(c, re_min, re_max, im_max)
        if target is None or len(pairs) == target:
            break
    if target is not None and len(pairs) != target:
        warnings.warn(
            f"root search found {len(pairs)} conjugate pairs but the winding "
            f"count implies {target} in [{re_min},{re_max}]x[0,{im_max}]",
            IncompleteRootCoverageWarning,
        )
    roots = [_make_root(c, z) for z in pairs]
    roots.sort(key=lambda r: (-r.re, r.im))
    return roots


def _expected_pair_count(c, re_min, re_max, im_max) -> int | None:
    """Winding count of the rectangle minus the real roots inside, halved."""
    delta = 1e-7 * max(1.0, abs(re_max), abs(im_max))
    for attempt in range(6):
        d = delta * (1 << attempt)
        try:
            n = winding_number(c, re_min - d, re_max + d, -(im_max + d), im_max + d)
        except _BoundaryRootError:
            continue
        n_real = sum(1 for r in real_roots(c) if re_min - d < r.re < re_max + d)
        if (n - n_real) % 2:
            continue  # a real root sits near the vertical edges; nudge again
        return (n - n_real) // 2
    return None


class _BoundaryRootError(RuntimeError):
    pass


def winding_number(c: LinearizationCoeffs, re_min: float, re_max: float,
                   im_min: float, im_max: float) -> int:
    """Number of characteristic values inside the rectangle, by integrating
    the argument of p(lambda) along the boundary (adaptive refinement)."""
    corners = [
        complex(re_min, im_min),
        complex(re_max, im_min),
        complex(re_max, im_max),
        complex(re_min, im_max),
    ]
    total = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        n0 = max(16, int(4.0 * abs(z1 - z0) * c.tau / math.pi) + 1)
        zs = [z0 + (z1 - z0) * j / n0 for j in range(n0 + 1)]
        ps = [char_value(c, z) for z in zs]
        for j in range(n0):
            total += _arg_increment(c, zs[j], zs[j + 1], ps[j], ps[j + 1], 0)
    n = total / (2.0 * math.pi)
    if abs(n - round(n)) > 1e-3:
        raise _BoundaryRootError("winding integral did not close to an integer")
    return int(round(n))


def _arg_increment(c, z0, z1, p0, p1, depth) -> float:
    scale = max(1.0, abs(z0), abs(z1))
    if abs(p0) < 1e-13 * scale or abs(p1) < 1e-13 * scale:
        raise _BoundaryRootError("characteristic value on the contour")
    d = cmath.phase(p1 / p0)
    if abs(d) <= math.pi / 2.0:
        return d
    if depth >= 52:
        raise _BoundaryRootError("contour refinement exhausted")
    zm = 0.5 * (z0 + z1)
    pm = char_value(c, zm)
    return (_arg_increment(c, z0, zm, p0, pm, depth + 1)
            + _arg_increment(c, zm, z1, pm, p1, depth + 1))


def rightmost_complex_pair(c: LinearizationCoeffs) -> CharRoot | None:
    """The conjugate pair with the largest real part, or None if the
    equation has no complex roots reachable within a deep search window.

    Pair real parts decrease with the pair frequency beyond the first few
    pairs, so the imaginary window stays capped near the low-frequency band
    while the real-part window deepens.
    """
    if c.b == 0.0:
        return None
    cap = real_part_cap(c)
    depth = 4.0 / c.tau
    for _ in range(8):
        re_min = cap - depth
        exact = abs(c.b) * math.exp(min(-re_min * c.tau, 50.0)) + 1e-9
        im_max = min(exact, 8.0 * math.pi / c.tau)
        roots = complex_roots(c, re_min, im_max, re_max=cap + 1.0)
        if roots:
            return roots[0]
        depth += 4.0 / c.tau
    return None


def rightmost_root(c: LinearizationCoeffs) -> CharRoot:
    """The characteristic value (real or complex pair) of largest real part."""
    cands = real_roots(c)
    pair = rightmost_complex_pair(c)
    if pair is not None:
        cands = cands + [pair]
    if not cands:
        raise RuntimeError("no characteristic values found")
    return max(cands, key=lambda r: r.re)


# ---------------------------------------------------------------------------
# stability region

def c0_curve(tau: float, n: int = 257) -> np.ndarray:
    """Samples of the stability boundary in the (a*tau, b*tau) plane:
    (omega, omega*cot(omega), -omega*csc(omega)) for omega in [0, pi)."""
    om = np.linspace(0.0, math.pi, n, endpoint=False)
    a_tau = np.empty_like(om)
    b_tau = np.empty_like(om)
    a_tau[0], b_tau[0] = 1.0, -1.0  # omega -> 0 limit
    a_tau[1:] = om[1:] * np.cos(om[1:]) / np.sin(om[1:])
    b_tau[1:] = -om[1:] / np.sin(om[1:])
    return np.column_stack([om, a_tau, b_tau])


@dataclass(frozen=True)
class StabilityAssessment:
    state: str  # "stable" | "unstable" | "boundary"
    tau1: float | None  # critical delay for these (a, b); inf if none binds
    c0_samples: np.ndarray  # columns (omega, a_tau, b_tau)


def stability_region(c: LinearizationCoeffs, n_c0: int = 257) -> StabilityAssessment:
    """Classify the steady state of z' = a z + b z(t-tau).

    Unstable when b > -a (a real root is positive); stable for every delay
    when b lies between a and -a (with a < 0); otherwise stable exactly for
    tau < tau1(a, b) = arccos(-a/b) / sqrt(b^2 - a^2).  Sitting on the
    boundary curve is reported as the distinct state "boundary"; downstream
    sweep logic treats it as not stable.
    """
    a, b, tau = c.a, c.b, c.tau
    samples = c0_curve(tau, n_c0)
    if a == 0.0 and b == 0.0:
        return StabilityAssessment("boundary", None, samples)
    if b > -a:
        return StabilityAssessment("unstable", None, samples)
    if b == -a:
        return StabilityAssessment("boundary", None, samples)
    if b >= a:
        return StabilityAssessment("stable", math.inf, samples)
    # wedge b < -|a|: finite critical delay
    tau1 = math.acos(-a / b) / math.sqrt(b * b - a * a)
    if abs(tau - tau1) <= 1e-12 * max(1.0, tau1):
        return StabilityAssessment("boundary", tau1, samples)
    state = "stable" if tau < tau1 else "unstable"
    return StabilityAssessment(state, tau1, samples)


# ---------------------------------------------------------------------------
# critical delays and Hopf loci

@dataclass(frozen=True)
class CriticalDelays:
    """Delay landmarks as the delay is varied with other parameters held.

    tau1_minus/tau1_plus: the pair of delays where the steady state loses
    and regains stability (solutions of the implicit equation
    tau = tau1(a(tau), b(tau)); the amplification depends on tau, which is
    why there can be two).  tau2: the delay beyond which b > 0 and stability
    is delay-independent.  tau_max: the existence bound for the nontrivial
    state.  Absent values are None.
    """

    tau1_minus: float | None
    tau1_plus: float | None
    tau2: float | None
    tau_max: float

    def all_present(self) -> bool:
        return None not in (self.tau1_minus, self.tau1_plus, self.tau2)


def _coeffs_at_delay(p: ModelParams, tau: float) -> LinearizationCoeffs | None:
    pt = p.with_(tau=tau)
    qs = steady_state(pt).nontrivial
    if qs is None:
        return None
    return coeffs_at(qs, pt)


def _tau1_gap(p: ModelParams, tau: float) -> float:
    """tau - tau1(a(tau), b(tau)); nan outside the wedge b < -|a|."""
    c = _coeffs_at_delay(p, tau)
    if c is None:
        return math.nan
    a, b = c.a, c.b
    if not (b < 0.0 and b < a and -b > abs(a)):
        return math.nan
    return tau - math.acos(-a / b) / math.sqrt(b * b - a * a)


def critical_delays(p: ModelParams, n_scan: int = 10_000) -> CriticalDelays:
    """Delay landmarks for the given parameter set (tau itself is scanned).

    The implicit equation tau = tau1(a(tau), b(tau)) is scanned on a uniform
    grid over (0, tau_max) for sign changes, each refined by bisection.
    """
    _, tau_max = existence_bounds(p)
    if not math.isfinite(tau_max) or tau_max > 1e8:
        # the existence bound never binds on any physical horizon and the
        # amplification is effectively independent of tau: tau1 is fixed
        c = _coeffs_at_delay(p, 1.0)
        t1m = None
        if c is not None and c.b < 0.0 and -c.b > abs(c.a):
            t1m = math.acos(-c.a / c.b) / math.sqrt(c.b**2 - c.a**2)
        return CriticalDelays(t1m, None, _tau2(p), tau_max)

    lo = tau_max * 1e-9
    grid = np.linspace(lo, tau_max * (1.0 - 1e-12), n_scan)
    vals = np.array([_tau1_gap(p, t) for t in grid])
    crossings = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if math.isnan(v0) or math.isnan(v1):
            continue
        if v0 == 0.0:
            crossings.append(grid[i])
        elif (v0 < 0.0) != (v1 < 0.0):
            crossings.append(
                brentq(lambda t: _tau1_gap(p, t), grid[i], grid[i + 1],
                       xtol=1e-12)
            )
    if len(crossings) > 2:
        warnings.warn(f"{len(crossings)} stability crossings in tau; "
                      "reporting the outermost pair")
    t1m = crossings[0] if crossings else None
    t1p = crossings[-1] if len(crossings) >= 2 else None
    return CriticalDelays(t1m, t1p, _tau2(p), tau_max)


def _tau2(p: ModelParams) -> float | None:
    if p.s == 1.0 or p.gamma == 0.0:
        return None
    arg = 0.5 * (1.0 + p.kappa * p.s / (p.f * (p.s - 1.0)))
    if arg >= 1.0:
        return None
    return -math.log(arg) / p.gamma


def hopf_locus_1p(p: ModelParams, vary: str, lo: float, hi: float,
                  n_scan: int = 400, re_tol: float = 1e-9) -> list[tuple[float, float]]:
    """Parameter values in [lo, hi] where the steady state's rightmost
    characteristic value crosses the imaginary axis as a conjugate pair,
    each located by bisection on its real part.

    The scan tracks the rightmost root overall (real or complex): its real
    part moves continuously even when a complex pair collides into two real
    roots, which is exactly what happens between the two Hopf points of the
    model, so no crossing can hide behind an identity change.  Every
    bisection step re-runs the windowed root search from scratch.  Returns
    (value, omega) tuples with omega the crossing frequency.
    """
    if vary not in ("kappa", "gamma", "tau", "theta", "f", "s"):
        raise ValueError(f"unknown parameter {vary!r}")

    def dominant(v: float) -> CharRoot | None:
        pv = p.with_(**{vary: v})
        qs = steady_state(pv).nontrivial
        if qs is None:
            return None
        return rightmost_root(coeffs_at(qs, pv))

    grid = np.linspace(lo, hi, n_scan)
    vals = [dominant(v) for v in grid]
    out: list[tuple[float, float]] = []
    for i in range(len(grid) - 1):
        va, vb = vals[i], vals[i + 1]
        if va is None or vb is None or (va.re < 0.0) == (vb.re < 0.0):
            continue
        a_, b_ = grid[i], grid[i + 1]
        sa = va.re < 0.0
        root = None
        for _ in range(200):
            mid = 0.5 * (a_ + b_)
            root = dominant(mid)
            if root is None:
                break
            if abs(root.re) < re_tol or abs(b_ - a_) < 4e-16 * max(1.0, abs(mid)):
                break
            if (root.re < 0.0) == sa:
                a_ = mid
            else:
                b_ = mid
        if root is not None and root.kind == "complex-pair":
            out.append((0.5 * (a_ + b_), root.im))
    return out


# ---------------------------------------------------------------------------
# Lambert-W branch coalescence landmarks

def lambertw_coalescence(p: ModelParams) -> tuple[float | None, float | None]:
    """The interval of reference concentrations around Q* on which the
    characteristic equation has no real roots.

    Its ends are where b*tau*exp(-a*tau) = -1/e, i.e. where
    h'(Q)*tau hits W_0 resp. W_{-1} of -exp(-1 - kappa*tau)/A and the two
    real roots coalesce.  Returns (None, None) when the regime is absent
    (s <= 1, no decreasing part of h, or the deep target is unreachable).
    """
    if p.s <= 1.0:
        return None, None
    A = p.amplification
    x0 = -math.exp(-1.0 - p.kappa * p.tau) / A
    if x0 <= -_INV_E:
        return None, None
    u0 = lambert_w(0, x0)
    um1 = lambert_w(-1, x0)
    q_h = p.theta * math.exp(-math.log(p.s - 1.0) / p.s)

    def hp(q):
        return h_and_G(q, p).h_prime

    # minimum of h' on the decreasing-then-recovering tail beyond q_h
    res = minimize_scalar(hp, bounds=(q_h * (1 + 1e-10), q_h * 100.0),
                          method="bounded", options={"xatol": 1e-13})
    q_m, hp_min = res.x, res.fun
    t0, tm1 = u0 / p.tau, um1 / p.tau
    if hp_min >= t0:
        return None, None  # h' never reaches the shallow target
    q_lo = brentq(lambda q: hp(q) - t0, q_h * (1 + 1e-12), q_m, xtol=1e-15)
    if hp_min < tm1:
        q_hi = brentq(lambda q: hp(q) - tm1, q_lo, q_m, xtol=1e-15)
    else:
        # shallow dip: the gap closes on the recovering side of h'
        q_right = q_m
        while hp(q_right) < t0:
            q_right *= 2.0
            if q_right > 1e12 * p.theta:
                return q_lo, None
        q_hi = brentq(lambda q: hp(q) - t0, q_m, q_right, xtol=1e-15)
    return q_lo, q_hi


def real_root_rebound(p: ModelParams) -> float | None:
    """Upper concentration bound of the two-real-root window beyond the
    coalescence gap: where h'(Q)*tau re-crosses W_{-1} on the recovering
    side and the pair of (positive) real roots vanishes again."""
    if p.s <= 1.0:
        return None
    A = p.amplification
    x0 = -math.exp(-1.0 - p.kappa * p.tau) / A
    if x0 <= -_INV_E:
        return None
    tm1 = lambert_w(-1, x0) / p.tau
    q_h = p.theta * math.exp(-math.log(p.s - 1.0) / p.s)

    def hp(q):
        return h_and_G(q, p).h_prime

    res = minimize_scalar(hp, bounds=(q_h * (1 + 1e-10), q_h * 100.0),
                          method="bounded", options={"xatol": 1e-13})
    q_m, hp_min = res.x, res.fun
    if hp_min >= tm1:
        return None
    q_right = q_m
    while hp(q_right) < tm1:
        q_right *= 2.0
        if q_right > 1e12 * p.theta:
            return None
    return brentq(lambda q: hp(q) - tm1, q_m, q_right, xtol=1e-15)
