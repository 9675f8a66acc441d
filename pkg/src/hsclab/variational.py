"""Co-integration of linearised perturbations along a base solution.

Perturbations w about a solution Q obey the nonautonomous linear delay
equation

    w'(t) = -(kappa + h'(Q(t))) * w(t) + A * h'(Q(t-tau)) * w(t-tau)

with coefficients read from the base trajectory's dense output.  A bundle of
m perturbation directions is discretised on a uniform mesh of N+1 points
spanning one delay and advanced with fixed-step classical RK4 at step
tau/N; delayed stage values come from each column's own stored past via
cubic interpolation (midpoint weights are constant on a uniform grid).
Periodic QR re-orthonormalisation of the bundle supplies the growth factors
that Lyapunov estimates average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import h_and_G
from .integrator import Trajectory

__all__ = ["PerturbationBundle", "integrate_variational", "orthonormalize"]

# 4-point interpolation weights at the midpoint of a uniform grid
_W_MID = np.array([-1.0, 9.0, 9.0, -1.0]) / 16.0
# one-sided variant for the very first step (nodes 0..3, evaluated at 0.5)
_W_EDGE = np.array([5.0, 15.0, -5.0, 1.0]) / 16.0


@dataclass
class PerturbationBundle:
    """m discretised perturbation functions on the trailing delay interval.

    ``columns`` has shape (N+1, m); row i holds the perturbation values at
    time t_head - tau + i*tau/N.
    """

    offsets: np.ndarray       # (N+1,) mesh on [-tau, 0]
    columns: np.ndarray       # (N+1, m)
    t_head: float
    tau: float

    @property
    def m(self) -> int:
        return self.columns.shape[1]

    @property
    def n_mesh(self) -> int:
        return self.columns.shape[0] - 1

    @property
    def step(self) -> float:
        return self.tau / self.n_mesh

    @classmethod
    def seeded(cls, tau: float, m: int, n_mesh: int = 128, seed: int = 0,
               t_head: float = 0.0) -> "PerturbationBundle":
        """Random orthonormal bundle (deterministic for a given seed)."""
        if m < 1 or n_mesh < 4:
            raise ValueError("need m >= 1 and n_mesh >= 4")
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((n_mesh + 1, m))
        q, r = np.linalg.qr(raw)
        q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
        offsets = np.linspace(-tau, 0.0, n_mesh + 1)
        return cls(offsets=offsets, columns=q, t_head=t_head, tau=tau)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.columns, axis=0)


def orthonormalize(bundle: PerturbationBundle) -> tuple[PerturbationBundle, np.ndarray]:
    """QR-orthonormalise the bundle columns.

    Returns the new bundle and the (positive) diagonal of R, i.e. the growth
    factor of each successively orthogonalised direction since the last
    orthonormalisation.
    """
    q, r = np.linalg.qr(bundle.columns)
    d = np.diag(r).copy()
    sign = np.where(d < 0, -1.0, 1.0)
    q = q * sign
    return (PerturbationBundle(bundle.offsets, q, bundle.t_head, bundle.tau),
            np.abs(d))


def _coeff_tables(traj: Trajectory, t0: float, h: float, n_steps: int):
    """alpha, beta at the RK4 stage times (half-grid) of n_steps steps."""
    p = traj.params
    times = t0 + 0.5 * h * np.arange(2 * n_steps + 1)
    q_now = np.maximum(traj(times), 0.0)
    q_del = np.maximum(traj(times - p.tau), 0.0)
    alpha = -(p.kappa + h_and_G(q_now, p).h_prime)
    beta = p.amplification * h_and_G(q_del, p).h_prime
    return alpha, beta


def integrate_variational(traj: Trajectory, bundle: PerturbationBundle,
                          t_span: tuple[float, float]) -> tuple[PerturbationBundle, np.ndarray]:
    """Advance every bundle column across t_span along the base trajectory.

    The span start must equal the bundle head; the end is snapped to a whole
    number of internal steps (tau/N each).  Returns the evolved bundle and
    the per-column norms before any re-orthonormalisation.  The base must
    cover [start - tau, end].
    """
    t0, t1 = t_span
    if abs(t0 - bundle.t_head) > 1e-9 * max(1.0, abs(t0)):
        raise ValueError("span start must match the bundle head time")
    if t1 <= t0:
        raise ValueError("empty span")
    h = bundle.step
    n_steps = max(1, int(round((t1 - t0) / h)))
    t_end = t0 + n_steps * h
    if t_end > traj.t_end + 1e-9 or t0 - bundle.tau < -traj.params.tau - 1e-9:
        raise ValueError("base trajectory does not cover the requested span")

    n = bundle.n_mesh
    cols = _advance(traj, bundle.columns, t0, h, n_steps, n)
    out = PerturbationBundle(bundle.offsets, cols, t_end, bundle.tau)
    return out, out.norms()


def _advance(traj, columns, t0, h, n_steps, n):
    alpha, beta = _coeff_tables(traj, t0, h, n_steps)
    w_buf = np.empty((n + 1 + n_steps, columns.shape[1]))
    w_buf[: n + 1] = columns
    hh = 0.5 * h
    h6 = h / 6.0
    for j in range(n_steps):
        head = n + j
        w = w_buf[head]
        wd0 = w_buf[j]
        wd1 = w_buf[j + 1]
        if j == 0:
            wdm = _W_EDGE @ w_buf[0:4]
        else:
            wdm = _W_MID @ w_buf[j - 1:j + 3]
        a0, am, a1 = alpha[2 * j], alpha[2 * j + 1], alpha[2 * j + 2]
        b0, bm, b1 = beta[2 * j], beta[2 * j + 1], beta[2 * j + 2]
        k1 = a0 * w + b0 * wd0
        k2 = am * (w + hh * k1) + bm * wdm
        k3 = am * (w + hh * k2) + bm * wdm
        k4 = a1 * (w + h * k3) + b1 * wd1
        w_buf[head + 1] = w + h6 * (k1 + 2.0 * (k2 + k3) + k4)
    return w_buf[n_steps:].copy()
