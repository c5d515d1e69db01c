"""Dynamic analytical attitude initialization.

The attitude of the body relative to inertial space is split into the
rotation accumulated since start-up, ``q_b0_b`` (integrated exactly from the
raw gyro, starting at the identity), and the constant attitude of the frozen
start-up frame, ``q_i_b0``. Each single-vector measurement is rotated back
into the start-up frame, so measurements taken at different times all
constrain the same constant attitude. That attitude is the eigenvector for
the smallest eigenvalue of a running 4x4 Davenport matrix.
"""

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from . import quaternion as quat
from .eigen import eigh4
from .errors import (DegenerateGeometryError, InsufficientObservationsError,
                     InvalidInputError, NotReadyError)

UNIT_VECTOR_TOL = 1e-9
DEGENERATE_GAP = 1e-9
_TINY = np.finfo(float).tiny


class VectorObservationPair(NamedTuple):
    b: np.ndarray  # body frame
    r: np.ndarray  # reference frame
    t: float = 0.0


class ConstructedObservation(NamedTuple):
    b_bar: np.ndarray  # body measurement expressed in the start-up frame
    r: np.ndarray


class QuatObservationMatrices(NamedTuple):
    b_plus: np.ndarray
    r_minus: np.ndarray

    @property
    def residual(self):
        return self.b_plus - self.r_minus


@dataclass(frozen=True)
class DavenportAccumulator:
    K: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    n_obs: int = 0
    t_last: float = 0.0


@dataclass(frozen=True)
class InitializerState:
    q_b0_b: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())
    accumulator: DavenportAccumulator = field(default_factory=DavenportAccumulator)
    q_i_b0: Optional[np.ndarray] = None
    k: int = 0
    t: float = 0.0
    # eigenvectors of the last solve, reused as a Jacobi warm start
    eigvecs: Optional[np.ndarray] = field(default=None, repr=False)


def _check_unit_vector(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidInputError(f"{name} must be a 3-vector")
    n2 = float(v @ v)
    if not math.isfinite(n2):
        raise InvalidInputError(f"{name} must be finite")
    if abs(math.sqrt(n2) - 1.0) > UNIT_VECTOR_TOL:
        raise InvalidInputError(f"{name} must be a unit vector")
    return v


def step_propagate(state, omega_raw, dt):
    """Advance ``q_b0_b`` by one gyro sample. The raw rate is used, uncorrected for bias."""
    return replace(state, q_b0_b=quat.propagate(state.q_b0_b, omega_raw, dt),
                   k=state.k + 1, t=state.t + dt)


def construct_observation(q_b0_b, obs):
    """Rotate the body measurement into the start-up frame: ``b_bar = A(q_b0_b)^T b``."""
    b = _check_unit_vector(obs.b, "b")
    r = _check_unit_vector(obs.r, "r")
    A = quat.to_rotation_matrix(q_b0_b)
    return ConstructedObservation(A.T @ b, r)


def build_quat_matrices(c):
    """Left-multiplication matrix of ``b_bar`` and right-multiplication matrix of ``r``.

    Both act on scalar-last quaternions as pure quaternions ``[v; 0]``, so that
    ``(b_plus - r_minus) @ q`` is ``b_bar (x) q - q (x) r`` and its norm equals
    ``|b_bar - A(q) r|`` for every unit ``q``.
    """
    b, r = c.b_bar, c.r
    b_plus = np.zeros((4, 4))
    b_plus[:3, :3] = -quat.skew(b)
    b_plus[:3, 3] = b
    b_plus[3, :3] = -b
    r_minus = np.zeros((4, 4))
    r_minus[:3, :3] = quat.skew(r)
    r_minus[:3, 3] = r
    r_minus[3, :3] = -r
    return QuatObservationMatrices(b_plus, r_minus)


def accumulate(acc, m, dt, t=None):
    """Add ``(b_plus - r_minus)^T (b_plus - r_minus) * dt`` to the Davenport matrix."""
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt!r}")
    d = m.residual
    K = acc.K + (d.T @ d) * dt
    K = 0.5 * (K + K.T)
    return DavenportAccumulator(K, acc.n_obs + 1, acc.t_last if t is None else t)


def _pick_sign(q):
    if abs(q[3]) >= 1e-12:
        return q if q[3] > 0 else -q
    return q if q[np.argmax(np.abs(q))] > 0 else -q


def solve_eigen(acc, v0=None):
    """Smallest-eigenvalue quaternion of ``acc.K`` plus the full eigen-decomposition.

    Returns ``(q, eigenvalues, eigenvectors)``; ``q`` has non-negative scalar part.
    """
    if acc.n_obs < 2:
        raise InsufficientObservationsError(
            f"need at least 2 observations, have {acc.n_obs}")
    w, V = eigh4(acc.K, v0)
    top = max(abs(w[-1]), _TINY)
    if (w[1] - w[0]) < DEGENERATE_GAP * top:
        raise DegenerateGeometryError(
            "smallest eigenvalues coincide; observations are collinear")
    q = V[:, 0] / math.sqrt(V[:, 0] @ V[:, 0])
    return _pick_sign(q), w, V


def solve_constant_attitude(acc):
    """Constant start-up-frame attitude minimizing ``q^T K q`` over unit ``q``."""
    return solve_eigen(acc)[0]


def step_observe(state, obs, dt):
    """Fold one vector observation into the accumulator of ``state``."""
    c = construct_observation(state.q_b0_b, obs)
    acc = accumulate(state.accumulator, build_quat_matrices(c), dt, t=obs.t)
    return replace(state, accumulator=acc)


def step_solve(state):
    """Re-solve the constant attitude from the current accumulator."""
    q, _, V = solve_eigen(state.accumulator, state.eigvecs)
    return replace(state, q_i_b0=q, eigvecs=V)


def current_quaternion(state):
    if state.q_i_b0 is None:
        raise NotReadyError("constant attitude has not been solved yet")
    return quat.normalize(quat.compose(state.q_b0_b, state.q_i_b0))


def current_attitude(state):
    """Attitude matrix at the current epoch, ``A(q_b0_b) A(q_i_b0)``."""
    return quat.to_rotation_matrix(current_quaternion(state))


def wahba_cost(q, constructed, weights):
    """``sum_k w_k |b_bar_k - A(q) r_k|^2`` over constructed observations."""
    A = quat.to_rotation_matrix(q)
    return sum(w * float(np.sum((c.b_bar - A @ c.r) ** 2))
               for c, w in zip(constructed, weights))
