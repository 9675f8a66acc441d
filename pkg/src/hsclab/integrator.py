"""Method-of-steps integration of the stem-cell delay equation.

The solver advances an embedded Runge-Kutta 5(4) pair (Dormand-Prince
tableau) with a quartic continuous extension.  Delayed values are always
read from the dense output of already-completed segments (or from the
initial history), never from raw mesh interpolation; the step size is capped
at the delay so the delayed argument can never land in the step being
computed.  Derivative discontinuities propagate from t=0 at multiples of the
delay, so k*tau (k = 1..6) are forced step boundaries, after which the
solution is smooth enough for the pair's order.

Trajectories store one power-basis quartic per accepted step and evaluate
anywhere in [-tau, t_end].  Event detection (extrema, level crossings) works
on the dense polynomials and refines every event time by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .model import ModelParams, steady_state

__all__ = [
    "History",
    "Trajectory",
    "Event",
    "StepSizeUnderflow",
    "integrate",
    "detect_events",
    "find_extrema",
    "find_level_crossings",
    "history_from_trajectory",
]

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# error weights (5th order minus embedded 4th order)
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)
# dense-output weights
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

_ORDER = 5  # advancing order of the pair


class StepSizeUnderflow(RuntimeError):
    """Step control drove the step below representable resolution."""

    def __init__(self, t: float):
        super().__init__(f"step size underflow at t={t!r}")
        self.t = t


class History:
    """Initial data on [-tau, 0]: constant, sampled, or a perturbed steady
    state.  Values must be nonnegative and the domain is exactly one delay.
    """

    def __init__(self, tau: float, fn, kind: str, config: dict):
        self.tau = float(tau)
        self._fn = fn
        self.kind = kind
        self.config = config

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < -self.tau - 1e-9 * max(1.0, self.tau)) or np.any(t > 1e-12):
            raise ValueError("history queried outside [-tau, 0]")
        out = self._fn(np.clip(t, -self.tau, 0.0))
        return float(out) if t.ndim == 0 else np.asarray(out, dtype=float)

    def __repr__(self):
        return f"History(kind={self.kind!r}, tau={self.tau}, {self.config})"

    @classmethod
    def constant(cls, tau: float, value: float) -> "History":
        if value < 0:
            raise ValueError("history values must be nonnegative")
        v = float(value)
        return cls(tau, lambda t: np.full_like(np.asarray(t, float), v),
                   "constant", {"value": v})

    @classmethod
    def sampled(cls, ts, values, order: int = 3) -> "History":
        """History interpolating (ts, values); ts must span [-tau, 0]."""
        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != values.shape or ts.size < 2:
            raise ValueError("need matching 1-d sample arrays")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("sample times must be strictly increasing")
        tau = -ts[0]
        if tau <= 0 or abs(ts[-1]) > 1e-9 * max(1.0, tau):
            raise ValueError("sample mesh must span [-tau, 0]")
        if np.any(values < 0):
            raise ValueError("history values must be nonnegative")
        if order >= 3:
            spline = CubicSpline(ts, values)
            fn = lambda t: np.maximum(spline(t), 0.0)
        else:
            fn = lambda t: np.interp(t, ts, values)
        return cls(tau, fn, "sampled",
                   {"n": int(ts.size), "order": int(order)})

    @classmethod
    def steady_state_perturbation(cls, p: ModelParams, amplitude: float,
                                  mode: str = "constant") -> "History":
        """Nontrivial steady state scaled/modulated by a small perturbation.

        mode "constant": Q*(1 + amplitude) on the whole interval;
        mode "cosine":   Q*(1 + amplitude*cos(2 pi t / tau)).
        """
        qs = steady_state(p).nontrivial
        if qs is None:
            raise ValueError("no nontrivial steady state to perturb")
        if amplitude <= -1.0:
            raise ValueError("amplitude must keep the history nonnegative")
        if mode == "constant":
            v = qs * (1.0 + amplitude)
            fn = lambda t: np.full_like(np.asarray(t, float), v)
        elif mode == "cosine":
            w = 2.0 * math.pi / p.tau
            fn = lambda t: qs * (1.0 + amplitude * np.cos(w * np.asarray(t, float)))
        else:
            raise ValueError(f"unknown perturbation mode {mode!r}")
        return cls(p.tau, fn, "steady_state_perturbation",
                   {"base": qs, "amplitude": float(amplitude), "mode": mode})

    @classmethod
    def from_config(cls, p: ModelParams, cfg: dict) -> "History":
        kind = cfg.get("kind")
        if kind == "constant":
            return cls.constant(p.tau, cfg["value"])
        if kind == "steady_state_perturbation":
            return cls.steady_state_perturbation(
                p, cfg["amplitude"], cfg.get("mode", "constant"))
        if kind == "sampled":
            return cls.sampled(cfg["ts"], cfg["values"], cfg.get("order", 3))
        raise ValueError(f"unknown history kind {kind!r}")


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # "max" | "min" | "level"
    value: float
    level: float = math.nan
    direction: str = ""  # for levels: "up"/"down"/"degenerate"; extrema may be "degenerate"


class Trajectory:
    """Dense piecewise-quartic solution of one integration run.

    Immutable once built; evaluating is thread-safe.  Negative times are
    answered by the initial history.
    """

    def __init__(self, params: ModelParams, history: History,
                 knots: np.ndarray, coeffs: np.ndarray,
                 breakpoints: list[float], options: dict):
        self.params = params
        self.history = history
        self.knots = knots            # (n+1,) segment boundaries, knots[0] = 0
        self.coeffs = coeffs          # (n, 5) power-basis in theta
        self.widths = np.diff(knots)  # (n,)
        self.breakpoints = breakpoints
        self.options = options
        self.events: list[Event] = []

    @property
    def t_end(self) -> float:
        return float(self.knots[-1])

    @property
    def n_segments(self) -> int:
        return len(self.widths)

    def _eval(self, t, deriv: bool):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t).astype(float)
        lo, hi = -self.params.tau, self.t_end
        tol = 1e-9 * max(1.0, hi)
        if np.any(tt < lo - tol) or np.any(tt > hi + tol):
            raise ValueError(f"time outside [{lo}, {hi}]")
        out = np.empty_like(tt)
        neg = tt < 0.0
        if neg.any():
            if deriv:
                raise ValueError("derivative not defined on the history interval")
            out[neg] = self.history(np.clip(tt[neg], lo, 0.0))
        pos = ~neg
        if pos.any():
            tp = np.minimum(tt[pos], hi)
            idx = np.searchsorted(self.knots, tp, side="right") - 1
            idx = np.clip(idx, 0, self.n_segments - 1)
            th = (tp - self.knots[idx]) / self.widths[idx]
            C = self.coeffs[idx]
            if deriv:
                val = (C[:, 1] + th * (2.0 * C[:, 2] + th * (3.0 * C[:, 3]
                       + th * 4.0 * C[:, 4]))) / self.widths[idx]
            else:
                val = C[:, 0] + th * (C[:, 1] + th * (C[:, 2] + th * (C[:, 3]
                       + th * C[:, 4])))
            out[pos] = val
        return float(out[0]) if scalar else out

    def __call__(self, t):
        return self._eval(t, deriv=False)

    evaluate = __call__

    def derivative(self, t):
        return self._eval(t, deriv=True)

    def segment_range(self, t_start: float, t_end: float) -> tuple[int, int]:
        """Indices [i0, i1) of segments overlapping [t_start, t_end]."""
        i0 = int(np.searchsorted(self.knots, t_start, side="right") - 1)
        i1 = int(np.searchsorted(self.knots, t_end, side="left"))
        return max(i0, 0), min(i1, self.n_segments)


def integrate(p: ModelParams, history: History, t_end: float, *,
              rtol: float = 1e-9, atol: float = 1e-12,
              max_step: float | None = None, first_step: float | None = None,
              fixed_step: float | None = None, smoothing_rounds: int = 6,
              max_steps: int = 50_000_000) -> Trajectory:
    """Solve the delay equation forward from the given history.

    Local error per step is kept within rtol/atol (defaults beyond typical,
    chosen for multi-decade horizons).  Multiples of the delay up to
    ``smoothing_rounds`` are mandatory step boundaries.  ``fixed_step``
    bypasses error control entirely (used for order measurements).
    Identical inputs produce bit-identical trajectories.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if abs(history.tau - p.tau) > 1e-12 * max(1.0, p.tau):
        raise ValueError("history delay does not match the model delay")
    kappa, tau, f, s = p.kappa, p.tau, p.f, p.s
    A = p.amplification
    ths = p.theta**s

    # mandatory stops: propagated discontinuities, then the horizon
    stops: list[float] = [k * tau for k in range(1, smoothing_rounds + 1)
                          if k * tau < t_end * (1.0 - 1e-15)]
    stops.append(float(t_end))
    breakpoints = [x for x in stops[:-1]]

    knots = [0.0]
    coefs: list[tuple] = []
    widths: list[float] = []
    state = {"ptr": 0}

    hist_fn = history
    y = float(hist_fn(0.0))

    def ydel(tq: float) -> float:
        if tq <= 0.0:
            v = float(hist_fn._fn(tq))
            return v if v > 0.0 else 0.0
        i = state["ptr"]
        n = len(coefs)
        if i >= n:
            i = n - 1
        while i < n - 1 and knots[i + 1] < tq:
            i += 1
        while i > 0 and knots[i] > tq:
            i -= 1
        state["ptr"] = i
        th = (tq - knots[i]) / widths[i]
        if th > 1.0:
            th = 1.0
        c = coefs[i]
        v = c[0] + th * (c[1] + th * (c[2] + th * (c[3] + th * c[4])))
        return v if v > 0.0 else 0.0

    def deriv(tq: float, yq: float) -> float:
        qn = yq if yq > 0.0 else 0.0
        qd = ydel(tq - tau)
        bn = f * ths / (ths + qn**s)
        bd = f * ths / (ths + qd**s)
        return -(kappa + bn) * qn + A * bd * qd

    hmax = min(tau, t_end)
    if max_step is not None:
        hmax = min(hmax, max_step)
    if fixed_step is not None:
        h = min(fixed_step, hmax)
    elif first_step is not None:
        h = min(first_step, hmax)
    else:
        h = min(1e-3 * tau, hmax)

    t = 0.0
    k1 = deriv(0.0, y)
    stop_idx = 0
    rejected = False
    n_steps = 0

    while t < t_end:
        n_steps += 1
        if n_steps > max_steps:
            raise RuntimeError(f"exceeded {max_steps} steps at t={t}")
        s_next = stops[stop_idx]
        h_try = h if h < hmax else hmax
        landing = False
        if t + h_try >= s_next - 1e-12 * max(1.0, s_next):
            h_try = s_next - t
            landing = True
        if h_try < 1e-13 * max(1.0, t):
            raise StepSizeUnderflow(t)

        k2 = deriv(t + _C2 * h_try, y + h_try * (_A21 * k1))
        k3 = deriv(t + _C3 * h_try, y + h_try * (_A31 * k1 + _A32 * k2))
        k4 = deriv(t + _C4 * h_try, y + h_try * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = deriv(t + _C5 * h_try, y + h_try * (_A51 * k1 + _A52 * k2
                                                 + _A53 * k3 + _A54 * k4))
        k6 = deriv(t + h_try, y + h_try * (_A61 * k1 + _A62 * k2 + _A63 * k3
                                           + _A64 * k4 + _A65 * k5))
        ynew = y + h_try * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = deriv(t + h_try, ynew)

        if fixed_step is not None:
            err = 0.0
        else:
            e = h_try * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5
                         + _E6 * k6 + _E7 * k7)
            sc = atol + rtol * max(abs(y), abs(ynew))
            err = abs(e) / sc

        if err <= 1.0:
            dy = ynew - y
            bspl = h_try * k1 - dy
            c4 = dy - h_try * k7 - bspl
            c5 = h_try * (_D1 * k1 + _D3 * k3 + _D4 * k4 + _D5 * k5
                          + _D6 * k6 + _D7 * k7)
            coefs.append((y, dy + bspl, -bspl + c4 + c5, -c4 - 2.0 * c5, c5))
            widths.append(h_try)
            if landing:
                t = s_next
                stop_idx += 1
                while stop_idx < len(stops) and stops[stop_idx] <= t:
                    stop_idx += 1
                if stop_idx >= len(stops):
                    stop_idx = len(stops) - 1  # only reachable once t == t_end
            else:
                t = t + h_try
            knots.append(t)
            y = ynew
            k1 = k7
            if fixed_step is None:
                fac = 10.0 if err == 0.0 else 0.9 * err**-0.2
                facmax = 1.0 if rejected else 5.0
                h = h_try * min(facmax, max(0.2, fac))
            rejected = False
        else:
            rejected = True
            h = h_try * max(0.1, 0.9 * err**-0.2)

    traj = Trajectory(
        params=p, history=history,
        knots=np.asarray(knots), coeffs=np.asarray(coefs),
        breakpoints=breakpoints,
        options={"rtol": rtol, "atol": atol, "max_step": max_step,
                 "first_step": first_step, "fixed_step": fixed_step,
                 "smoothing_rounds": smoothing_rounds},
    )
    return traj


# ---------------------------------------------------------------------------
# event detection on the dense output

_DEGENERATE_CURVATURE = 1e-12


def _real_unit_roots(c: np.ndarray) -> list[float]:
    """Real roots of a low-degree polynomial (coeffs low->high) in [0, 1)."""
    c = np.trim_zeros(np.asarray(c, float), "b")
    if c.size <= 1:
        return []
    roots = npoly.polyroots(c)
    out = []
    for r in roots:
        if abs(r.imag) > 1e-9:
            continue
        x = r.real
        if -1e-12 <= x < 1.0:
            out.append(min(max(x, 0.0), 1.0 - 1e-16))
    return sorted(out)


def find_extrema(traj: Trajectory, t_start: float = 0.0,
                 t_end: float | None = None) -> list[Event]:
    """Local maxima/minima of the solution, located where Q' = 0 with a
    second-derivative sign test and refined by bisection to ~1e-10 in time.
    Events with |Q''| below 1e-12 are flagged degenerate."""
    if t_end is None:
        t_end = traj.t_end
    i0, i1 = traj.segment_range(t_start, t_end)
    C = traj.coeffs
    events: list[Event] = []
    d1 = C[i0:i1, 1]
    d2 = 2.0 * C[i0:i1, 2]
    d3 = 3.0 * C[i0:i1, 3]
    d4 = 4.0 * C[i0:i1, 4]
    # a flat segment (constant solution to roundoff) has no genuine extrema
    flat = (np.abs(d1) + np.abs(d2) + np.abs(d3) + np.abs(d4)
            < 1e-13 * np.maximum(1.0, np.abs(C[i0:i1, 0])))
    cand = (np.abs(d1) <= np.abs(d2) + np.abs(d3) + np.abs(d4)) & ~flat
    for j in np.nonzero(cand)[0]:
        i = i0 + j
        w = traj.widths[i]
        t0 = traj.knots[i]
        for th in _real_unit_roots([d1[j], d2[j], d3[j], d4[j]]):
            te = t0 + th * w
            if not (t_start - 1e-12 <= te <= t_end + 1e-12):
                continue
            te = _refine_root(lambda x: traj.derivative(x), te,
                              max(t0, t_start), min(t0 + w, t_end))
            ypp = (d2[j] + th * (2.0 * d3[j] + 3.0 * th * d4[j])) / (w * w)
            if abs(ypp) < _DEGENERATE_CURVATURE:
                events.append(Event(te, "max" if traj(te) >= traj(t0) else "min",
                                    traj(te), direction="degenerate"))
            else:
                events.append(Event(te, "max" if ypp < 0 else "min", traj(te)))
    return _dedupe(events)


def find_level_crossings(traj: Trajectory, level: float,
                         direction: str = "both", t_start: float = 0.0,
                         t_end: float | None = None) -> list[Event]:
    """Times where Q(t) crosses the given level, with crossing direction
    from the sign of Q'.  Tangential touches are reported as degenerate."""
    if direction not in ("up", "down", "both"):
        raise ValueError("direction must be 'up', 'down' or 'both'")
    if t_end is None:
        t_end = traj.t_end
    i0, i1 = traj.segment_range(t_start, t_end)
    C = traj.coeffs
    a0 = C[i0:i1, 0] - level
    spread = np.abs(C[i0:i1, 1:]).sum(axis=1)
    # running exactly along the level is not a crossing
    moving = spread >= 1e-13 * np.maximum(1.0, np.abs(C[i0:i1, 0]))
    cand = (np.abs(a0) <= spread) & moving
    events: list[Event] = []
    for j in np.nonzero(cand)[0]:
        i = i0 + j
        w = traj.widths[i]
        t0 = traj.knots[i]
        poly = [a0[j], C[i, 1], C[i, 2], C[i, 3], C[i, 4]]
        for th in _real_unit_roots(poly):
            te = t0 + th * w
            if not (t_start - 1e-12 <= te <= t_end + 1e-12):
                continue
            te = _refine_root(lambda x: traj(x) - level, te,
                              max(t0, t_start), min(t0 + w, t_end))
            slope = traj.derivative(te)
            if abs(slope) < 1e-10 * max(1.0, abs(level)):
                d = "degenerate"
            else:
                d = "up" if slope > 0 else "down"
            if direction != "both" and d != direction:
                continue
            events.append(Event(te, "level", traj(te), level=level, direction=d))
    return _dedupe(events)


def _refine_root(fn, t_guess: float, lo: float, hi: float) -> float:
    eps = 1e-7 * max(1.0, abs(t_guess))
    a = max(lo, t_guess - eps)
    b = min(hi, t_guess + eps)
    if a < b:
        fa, fb = fn(a), fn(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if (fa < 0) != (fb < 0):
            return brentq(fn, a, b, xtol=1e-10)
    return t_guess


def _dedupe(events: list[Event]) -> list[Event]:
    events.sort(key=lambda e: e.t)
    out: list[Event] = []
    for e in events:
        if out and abs(e.t - out[-1].t) <= 1e-9 * max(1.0, abs(e.t)) \
                and e.kind == out[-1].kind:
            continue
        out.append(e)
    return out


def detect_events(traj: Trajectory, *, extrema: bool = True,
                  levels: tuple = (), t_start: float = 0.0,
                  t_end: float | None = None) -> list[Event]:
    """Ordered event log over the requested window.

    ``levels`` is an iterable of (level, direction) pairs or bare levels
    (meaning both directions).  The result is also stored on the trajectory.
    """
    events: list[Event] = []
    if extrema:
        events.extend(find_extrema(traj, t_start, t_end))
    for spec in levels:
        if isinstance(spec, (tuple, list)):
            lvl, d = spec
        else:
            lvl, d = spec, "both"
        events.extend(find_level_crossings(traj, lvl, d, t_start, t_end))
    events.sort(key=lambda e: e.t)
    traj.events = events
    return events


def history_from_trajectory(traj: Trajectory, t_right: float, tau: float,
                            n: int = 257) -> History:
    """Sampled history built from the last ``tau`` time units of a solution
    ending at ``t_right`` (used to carry a state across a parameter sweep)."""
    if t_right - tau < -traj.params.tau - 1e-12:
        raise ValueError("trajectory too short to supply one full delay")
    ts = np.linspace(t_right - tau, t_right, n)
    vals = np.maximum(traj(ts), 0.0)
    return History.sampled(ts - t_right, vals, order=3)
