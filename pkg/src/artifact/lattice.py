"""Direct integration of the focusing Ablowitz-Ladik lattice.

    i dq_n/dt = q_{n+1} - 2 q_n + q_{n-1} + |q_n|^2 (q_{n+1} + q_{n-1})

on a finite window with zero exterior.  Classical RK4 stepping; the conserved
product c = prod_n (1 + |q_n|^2) is monitored (never enforced) as the global
correctness guard.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


class IntegrationAbort(RuntimeError):
    """Raised when the conservation monitor trips mid-run."""

    def __init__(self, step_index, drift, tol):
        self.step_index = step_index
        self.drift = drift
        super().__init__(
            "conserved-product drift %.3e exceeded tolerance %.1e at step %d"
            % (drift, tol, step_index)
        )


@dataclass
class LatticeState:
    """Window of lattice amplitudes q_n, n = n0 .. n0+len(q)-1, at time t."""

    n0: int
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=complex)
        if self.q.ndim != 1 or self.q.size < 3:
            raise ValueError("state window must be a 1-D array of length >= 3")
        if not np.all(np.isfinite(self.q)):
            bad = int(np.flatnonzero(~np.isfinite(self.q))[0])
            raise ValueError("non-finite amplitude at site n=%d" % (self.n0 + bad))

    @property
    def sites(self):
        return self.n0 + np.arange(self.q.size)

    def copy(self):
        return LatticeState(self.n0, self.q.copy(), self.t)


@dataclass
class Trajectory:
    states: List[LatticeState]
    dt: float
    observables: dict = field(default_factory=dict)
    boundary_flag: bool = False

    @property
    def final(self):
        return self.states[-1]


# ----------------------------------------------------------------------------
# right-hand side and stepping
# ----------------------------------------------------------------------------

def _rhs(q):
    nb = np.zeros_like(q)
    nb[:-1] += q[1:]
    nb[1:] += q[:-1]
    return -1j * (nb - 2.0 * q + (np.abs(q) ** 2) * nb)


def al_rhs(state):
    """dq/dt for the current window (zero neighbors outside)."""
    return _rhs(state.q)


def _rk4_core(q, dt):
    k1 = _rhs(q)
    k2 = _rhs(q + (0.5 * dt) * k1)
    k3 = _rhs(q + (0.5 * dt) * k2)
    k4 = _rhs(q + dt * k3)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(state, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    qn = _rk4_core(state.q, dt)
    if not np.all(np.isfinite(qn)):
        raise FloatingPointError("overflow in integration stage at t=%g" % state.t)
    return LatticeState(state.n0, qn, state.t + dt)


# ----------------------------------------------------------------------------
# conserved quantity and norms
# ----------------------------------------------------------------------------

def log_c_infty(state):
    """ln prod (1+|q_n|^2), numerically stable form."""
    return float(np.sum(np.log1p(np.abs(state.q) ** 2)))


def c_infty(state):
    return float(np.exp(log_c_infty(state)))


def weighted_norm(state, k):
    """(sum (1+n^2) |q_n|^k)^{1/k} with the window's absolute site indices."""
    if k not in (1, 2):
        raise ValueError("weight exponent k must be 1 or 2")
    w = 1.0 + state.sites.astype(float) ** 2
    s = float(np.sum(w * np.abs(state.q) ** k))
    return s ** (1.0 / k)


def l2_norm(state):
    return float(np.linalg.norm(state.q))


# ----------------------------------------------------------------------------
# driver
# ----------------------------------------------------------------------------

def integrate(state, t_final, dt, tol_cons=1e-8, obs_stride=1,
              record_times=None, keep_all=False, boundary_tol=1e-10):
    """March the state to t_final, monitoring conservation.

    record_times: optional increasing list of times at which to keep snapshots
    (snapped to the step grid).  keep_all=True keeps every step (memory!).
    Raises IntegrationAbort if the relative drift of the conserved product
    exceeds tol_cons; sets boundary_flag if the outermost 8 sites ever rise
    above boundary_tol.
    """
    if t_final <= state.t:
        raise ValueError("t_final must exceed the state's current time")
    if dt <= 0:
        raise ValueError("dt must be positive")

    n_steps = int(round((t_final - state.t) / dt))
    if abs(state.t + n_steps * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        n_steps = int(np.ceil((t_final - state.t) / dt - 1e-12))

    targets = list(record_times) if record_times is not None else []
    next_target = 0

    q = state.q.copy()
    t0 = state.t
    logc0 = log_c_infty(state)

    obs_t, obs_c, obs_l2, obs_l21 = [], [], [], []
    states = [state.copy()]
    boundary_flag = False
    wts = 1.0 + state.sites.astype(float) ** 2

    def observe(tcur):
        logc = float(np.sum(np.log1p(np.abs(q) ** 2)))
        obs_t.append(tcur)
        obs_c.append(np.exp(logc))
        obs_l2.append(float(np.linalg.norm(q)))
        obs_l21.append(float(np.sqrt(np.sum(wts * np.abs(q) ** 2))))
        return logc

    observe(t0)

    for step in range(1, n_steps + 1):
        q = _rk4_core(q, dt)
        if not np.all(np.isfinite(q)):
            raise FloatingPointError("overflow in integration stage at step %d" % step)
        tcur = t0 + step * dt

        if step % obs_stride == 0 or step == n_steps:
            logc = observe(tcur)
            drift = abs(logc - logc0)
            if drift > tol_cons:
                raise IntegrationAbort(step, drift, tol_cons)
            edge = max(np.max(np.abs(q[:8])), np.max(np.abs(q[-8:])))
            if edge > boundary_tol:
                boundary_flag = True

        want_snap = keep_all
        while next_target < len(targets) and tcur >= targets[next_target] - 0.5 * dt:
            next_target += 1
            want_snap = True
        if want_snap:
            states.append(LatticeState(state.n0, q.copy(), tcur))

    if states[-1].t < t0 + n_steps * dt - 0.25 * dt:
        states.append(LatticeState(state.n0, q.copy(), t0 + n_steps * dt))

    obs = {
        "t": np.array(obs_t),
        "c_infty": np.array(obs_c),
        "l2_norm": np.array(obs_l2),
        "l21_norm": np.array(obs_l21),
    }
    return Trajectory(states=states, dt=dt, observables=obs,
                      boundary_flag=boundary_flag)


def gaussian_pulse(amplitude, width, half_window, n0=None):
    """q_n = A exp(-(n/w)^2) on |n| <= half_window (standard test datum)."""
    n = np.arange(-half_window, half_window + 1)
    q = amplitude * np.exp(-((n / float(width)) ** 2))
    return LatticeState(n0=-half_window if n0 is None else n0, q=q.astype(complex), t=0.0)
