"""Descriptor form and energy-consistent time integration.

The assembled system E dx/dt = (J - R) e + B u with E e = Q x is
simulated in the descriptor form

    E dx/dt = A x + B u,   y = C x + D u,

A = (J - R) S, C = B^T S, S = E^-1 Q.  The implicit midpoint rule with
inputs sampled at interval midpoints preserves the discrete energy
balance exactly:

    H_{k+1} - H_k = dt * (y_m^T u_m - e_m^T R e_m),

with all midpoint quantities evaluated at (x_k + x_{k+1})/2.  Static
output feedback u = -K y + r + u_ol(t) is folded into the constant
step matrix, which is factorized once per run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import FactorizationFailure, ShapeMismatch, SingularStepMatrix
from .pfem import AssembledFom

__all__ = [
    "DescriptorSystem",
    "Feedback",
    "Trajectory",
    "to_descriptor",
    "simulate",
    "energy_balance_report",
    "EnergyBalanceReport",
]


@dataclass(frozen=True)
class DescriptorSystem:
    """Linear descriptor system; Q is kept when a quadratic energy
    (1/2) x^T Q x is defined (absent for data-driven reduced models)."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray | None = None
    Q: np.ndarray | None = None
    R: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.E.shape[0]

    @property
    def n_ports(self) -> int:
        return self.B.shape[1]

    def feedthrough(self) -> np.ndarray:
        if self.D is None:
            return np.zeros((self.C.shape[0], self.B.shape[1]))
        return self.D


@dataclass(frozen=True)
class Feedback:
    """Static output feedback u = -K y + r + u_ol(t)."""

    K: np.ndarray
    r: np.ndarray | None = None


@dataclass(frozen=True)
class Trajectory:
    """Sampled simulation results (all per-sample arrays share length).

    `midpoint_inputs` keeps the input actually applied on every step at
    full resolution (one row per step, independent of `store_every`);
    the energy balance report consumes it.
    """

    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    hamiltonian: np.ndarray | None
    dt: float
    store_every: int
    midpoint_inputs: np.ndarray | None = None


def to_descriptor(fom: AssembledFom, tol: float = 1e-10) -> DescriptorSystem:
    """Eliminate the co-state: A = (J - R) S, C = B^T S with S = E^-1 Q."""
    try:
        chol = scipy.linalg.cho_factor(fom.E, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise FactorizationFailure(f"mass matrix not SPD: {exc}") from None
    S = scipy.linalg.cho_solve(chol, fom.Q)
    res = np.linalg.norm(fom.E @ S - fom.Q) / max(1.0, np.linalg.norm(fom.Q))
    if res > tol:
        raise FactorizationFailure(f"E S = Q residual too large ({res:.3e})")
    A = (fom.J - fom.R) @ S
    C = fom.B.T @ S
    return DescriptorSystem(E=fom.E, A=A, B=fom.B, C=C, D=None, Q=fom.Q, R=fom.R)


def _as_input_fn(u, m: int):
    if u is None:
        zero = np.zeros(m)
        return lambda t: zero
    if callable(u):
        def fn(t, _u=u):
            val = np.asarray(_u(t), dtype=float).reshape(-1)
            if val.size != m:
                raise ShapeMismatch(f"input has size {val.size}, expected {m}")
            return val
        return fn
    raise ShapeMismatch("input must be a callable t -> R^m or None")


def simulate(
    sys: DescriptorSystem,
    dt: float,
    n_steps: int,
    u: Callable[[float], np.ndarray] | None = None,
    x0: np.ndarray | None = None,
    feedback: Feedback | None = None,
    t0: float = 0.0,
    store_every: int = 1,
    storage: np.ndarray | None = None,
) -> Trajectory:
    """Implicit midpoint integration with one factorization per run.

    Parameters
    ----------
    u : open-loop input, sampled at interval midpoints.
    feedback : optional static output feedback u_eff = -K y + r + u(t).
    store_every : decimation factor for the stored samples.
    storage : symmetric matrix defining the reported energy
        (1/2) x^T storage x; defaults to sys.Q.  When neither is
        available the trajectory carries no energy trace.
    """
    n = sys.order
    m = sys.n_ports
    if dt <= 0.0 or n_steps < 1:
        raise ShapeMismatch("need dt > 0 and n_steps >= 1")
    if store_every < 1:
        raise ShapeMismatch("store_every must be >= 1")
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.size != n:
        raise ShapeMismatch(f"x0 has size {x.size}, expected {n}")
    u_fn = _as_input_fn(u, m)
    Qs = storage if storage is not None else sys.Q

    D = sys.feedthrough()
    if feedback is not None:
        K = np.asarray(feedback.K, dtype=float)
        if K.shape != (m, m):
            raise ShapeMismatch(f"feedback gain has shape {K.shape}, expected {(m, m)}")
        r_ref = (
            np.zeros(m)
            if feedback.r is None
            else np.asarray(feedback.r, dtype=float).reshape(-1)
        )
        # u_eff = (I + K D)^-1 (-K C x + w), w = r + u_ol(t)
        IKD = np.eye(m) + K @ D
        try:
            IKD_inv = np.linalg.inv(IKD)
        except np.linalg.LinAlgError:
            raise SingularStepMatrix("feedback loop is ill posed (I + K D singular)") from None
        Fx = -IKD_inv @ K @ sys.C
        Fw = IKD_inv
    else:
        r_ref = np.zeros(m)
        Fx = np.zeros((m, n))
        Fw = np.eye(m)

    A_cl = sys.A + sys.B @ Fx
    B_cl = sys.B @ Fw
    step_minus = sys.E - 0.5 * dt * A_cl
    step_plus = sys.E + 0.5 * dt * A_cl
    try:
        lu, piv = scipy.linalg.lu_factor(step_minus)
    except scipy.linalg.LinAlgError as exc:
        raise SingularStepMatrix(f"cannot factorize step matrix: {exc}") from None
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * max(diag.max(), 1.0):
        raise SingularStepMatrix(
            f"step matrix E - dt/2 A is numerically singular (dt={dt})"
        )

    n_stored = n_steps // store_every + 1
    times = np.empty(n_stored)
    states = np.empty((n_stored, n))
    inputs = np.empty((n_stored, m))
    outputs = np.empty((n_stored, m))
    energies = np.empty(n_stored) if Qs is not None else None
    mid_inputs = np.empty((n_steps, m))

    def record(idx, t, state):
        ueff = Fx @ state + Fw @ (r_ref + u_fn(t))
        times[idx] = t
        states[idx] = state
        inputs[idx] = ueff
        outputs[idx] = sys.C @ state + D @ ueff
        if energies is not None:
            energies[idx] = 0.5 * float(state @ (Qs @ state))

    record(0, t0, x)
    stored = 1
    for k in range(n_steps):
        tm = t0 + (k + 0.5) * dt
        w = r_ref + u_fn(tm)
        rhs = step_plus @ x + dt * (B_cl @ w)
        x_new = scipy.linalg.lu_solve((lu, piv), rhs)
        mid_inputs[k] = Fx @ (0.5 * (x + x_new)) + Fw @ w
        x = x_new
        if (k + 1) % store_every == 0:
            record(stored, t0 + (k + 1) * dt, x)
            stored += 1

    return Trajectory(
        times=times[:stored],
        states=states[:stored],
        inputs=inputs[:stored],
        outputs=outputs[:stored],
        hamiltonian=None if energies is None else energies[:stored],
        dt=dt,
        store_every=store_every,
        midpoint_inputs=mid_inputs,
    )


@dataclass(frozen=True)
class EnergyBalanceReport:
    """Per-step defect of the discrete energy balance."""

    residuals: np.ndarray
    supplied: np.ndarray
    dissipated: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0


def energy_balance_report(traj: Trajectory, fom: AssembledFom) -> EnergyBalanceReport:
    """Check H_{k+1} - H_k = dt (y_m^T u_m - e_m^T R e_m) step by step.

    Requires a full-resolution trajectory (store_every == 1) produced
    from the given assembled system by the midpoint integrator.
    """
    if traj.store_every != 1:
        raise ShapeMismatch("energy balance needs store_every == 1")
    if traj.midpoint_inputs is None:
        raise ShapeMismatch("trajectory lacks recorded midpoint inputs")
    if traj.states.shape[1] != fom.size:
        raise ShapeMismatch("trajectory and system sizes differ")
    chol = scipy.linalg.cho_factor(fom.E, lower=True)
    n_steps = traj.states.shape[0] - 1
    residuals = np.empty(n_steps)
    supplied = np.empty(n_steps)
    dissipated = np.empty(n_steps)
    H = traj.hamiltonian
    for k in range(n_steps):
        x_m = 0.5 * (traj.states[k] + traj.states[k + 1])
        u_m = traj.midpoint_inputs[k]
        e_m = scipy.linalg.cho_solve(chol, fom.Q @ x_m)
        y_m = fom.B.T @ e_m
        supplied[k] = float(y_m @ u_m) * traj.dt
        dissipated[k] = float(e_m @ (fom.R @ e_m)) * traj.dt
        residuals[k] = (H[k + 1] - H[k]) - (supplied[k] - dissipated[k])
    return EnergyBalanceReport(residuals=residuals, supplied=supplied, dissipated=dissipated)
