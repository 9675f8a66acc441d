"""Numerical laboratory for a scalar delay-differential model of
hematopoietic stem cell dynamics.

The model tracks the concentration Q(t) of quiescent stem cells:

    Q'(t) = -(kappa + beta(Q(t))) * Q(t) + A * beta(Q(t-tau)) * Q(t-tau)

where beta is a decreasing Hill function, tau is the cell-cycle time and
A = 2*exp(-gamma*tau) is the effective amplification of a division.

Subpackage map:

* ``model``       -- parameters, calibration, steady states, bounds
* ``chareq``      -- linearisation and the transcendental eigenvalue problem
* ``integrator``  -- method-of-steps RK5(4) solver with dense output + events
* ``variational`` -- co-integration of linearised perturbation bundles
* ``analysis``    -- Poincare sections, periods, orbit diagrams, Lyapunov
* ``slowman``     -- slow-manifold approximations for the relaxation regime
* ``cli``         -- command line runner with reproduction presets
"""

__version__ = "0.1.0"

from .model import ModelParams, HomeostasisSpec, SteadyStates  # noqa: F401
