"""Six-state multiplicative extended Kalman filter (attitude error + gyro bias).

The error state is ``[dalpha, dbeta]`` with the true attitude
``q = dq(dalpha) (x) q_hat`` and the true bias ``beta = beta_hat + dbeta``.
"""

from dataclasses import dataclass

import numpy as np

from . import quaternion as quat
from .errors import InvalidInputError, SingularUpdateError

DEG = np.pi / 180.0
DEG_PER_HOUR = DEG / 3600.0
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MekfConfig:
    sigma_v: float = 3.16e-7     # gyro angle random walk, rad/s/sqrt(Hz)
    sigma_u: float = 1e-10       # bias random walk, rad/s^1.5
    r_scalar: float = 2.909e-5 ** 2  # per-axis measurement variance, rad^2
    dt: float = 1.0

    def __post_init__(self):
        for name in ("sigma_v", "sigma_u", "r_scalar"):
            if not getattr(self, name) >= 0:
                raise InvalidInputError(f"{name} must be non-negative")
        if not self.dt > 0:
            raise InvalidInputError("dt must be positive")


@dataclass(frozen=True)
class MekfState:
    q: np.ndarray
    bias: np.ndarray
    P: np.ndarray
    t: float = 0.0


def handoff_from_initializer(q_init, att_std, bias_std, t=0.0):
    """Seed the filter from an attitude solution.

    ``att_std`` is in degrees, ``bias_std`` in rad/s.
    """
    q = quat.check_unit(q_init, "q_init")
    a2 = (att_std * DEG) ** 2
    P = np.diag([a2] * 3 + [bias_std ** 2] * 3)
    return MekfState(q.copy(), np.zeros(3), P, t)


def process_noise(cfg):
    dt, v2, u2 = cfg.dt, cfg.sigma_v ** 2, cfg.sigma_u ** 2
    I = np.eye(3)
    Q = np.empty((6, 6))
    Q[:3, :3] = (v2 * dt + u2 * dt ** 3 / 3.0) * I
    Q[:3, 3:] = Q[3:, :3] = -(u2 * dt ** 2 / 2.0) * I
    Q[3:, 3:] = u2 * dt * I
    return Q


def transition_matrix(omega, dt):
    """Second-order truncation of the error-state transition matrix."""
    F = np.zeros((6, 6))
    F[:3, :3] = -quat.skew(omega)
    F[:3, 3:] = -np.eye(3)
    return np.eye(6) + F * dt + (F @ F) * (0.5 * dt * dt)


def mekf_propagate(s, omega_meas, cfg):
    """Propagate attitude with the bias-corrected rate and the covariance by one step."""
    omega = np.asarray(omega_meas, dtype=float) - s.bias
    q = quat.propagate(s.q, omega, cfg.dt)
    Phi = transition_matrix(omega, cfg.dt)
    P = Phi @ s.P @ Phi.T + process_noise(cfg)
    return MekfState(q, s.bias, 0.5 * (P + P.T), s.t + cfg.dt)


def mekf_update(s, obs, cfg):
    """Single unit-vector measurement update with multiplicative reset.

    Raises
    ------
    SingularUpdateError
        If the innovation covariance has condition number above 1e12.
    """
    b = np.asarray(obs.b, dtype=float)
    r = np.asarray(obs.r, dtype=float)
    if b.shape != (3,) or r.shape != (3,) or not (np.all(np.isfinite(b)) and np.all(np.isfinite(r))):
        raise InvalidInputError("observation vectors must be finite 3-vectors")
    predicted = quat.rotation_matrices(s.q) @ r
    H = np.zeros((3, 6))
    H[:, :3] = quat.skew(predicted)
    R = cfg.r_scalar * np.eye(3)
    S = H @ s.P @ H.T + R
    if np.linalg.cond(S) > MAX_CONDITION:
        raise SingularUpdateError("innovation covariance is singular")
    K = np.linalg.solve(S, H @ s.P).T
    dx = K @ (b - predicted)

    dq = np.append(0.5 * dx[:3], 1.0)
    q = quat.normalize(quat.compose(dq, s.q))
    IKH = np.eye(6) - K @ H
    P = IKH @ s.P @ IKH.T + K @ R @ K.T
    return MekfState(q, s.bias + dx[3:], 0.5 * (P + P.T), s.t)


def bias_std(state):
    return np.sqrt(np.diag(state.P)[3:])


def covariance_health(P):
    """``(max asymmetry, min eigenvalue / trace)`` of a covariance matrix."""
    asym = float(np.max(np.abs(P - P.T)))
    w = np.linalg.eigvalsh(0.5 * (P + P.T))
    return asym, float(w[0] / np.trace(P))

