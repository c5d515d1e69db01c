"""Scalar-last attitude quaternion algebra.

Quaternions are plain ``float64`` arrays ``[x, y, z, w]``. The attitude matrix
``A(q)`` maps reference-frame coordinates into body-frame coordinates, and the
product ``compose(p, q)`` is defined so that ``A(compose(p, q)) = A(p) @ A(q)``.
Functions that say so accept stacked quaternions of shape ``(..., 4)``.
"""

import math

import numpy as np

from .errors import InvalidInputError

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])

# Below this rate the propagation uses the analytic limit of sin(x)/|w|.
SMALL_RATE = 1e-12
UNIT_TOL = 1e-6


def skew(v):
    """Cross-product matrix, ``skew(a) @ b == np.cross(a, b)``."""
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def normalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def conjugate(q):
    q = np.asarray(q, dtype=float)
    return np.concatenate([-q[..., :3], q[..., 3:]], axis=-1)


def check_unit(q, name="q"):
    q = np.asarray(q, dtype=float)
    if q.shape == (4,):
        n2 = float(q @ q)
        if math.isfinite(n2) and abs(math.sqrt(n2) - 1.0) <= UNIT_TOL:
            return q
    if q.shape[-1:] != (4,) or not np.all(np.isfinite(q)):
        raise InvalidInputError(f"{name} must be a finite 4-vector, got {q!r}")
    if np.any(np.abs(np.linalg.norm(q, axis=-1) - 1.0) > UNIT_TOL):
        raise InvalidInputError(f"{name} is not a unit quaternion")
    return q


def compose(p, q):
    """Quaternion product with ``A(compose(p, q)) = A(p) A(q)``; broadcasts."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim == 1 and q.ndim == 1:
        return _compose1(p.tolist(), q.tolist())
    pv, pw = p[..., :3], p[..., 3:]
    qv, qw = q[..., :3], q[..., 3:]
    vec = pw * qv + qw * pv - np.cross(pv, qv)
    w = pw * qw - np.sum(pv * qv, axis=-1, keepdims=True)
    return np.concatenate([vec, w], axis=-1)


def _compose1(p, q):
    px, py, pz, pw = p
    qx, qy, qz, qw = q
    return np.array([pw * qx + qw * px - (py * qz - pz * qy),
                     pw * qy + qw * py - (pz * qx - px * qz),
                     pw * qz + qw * pz - (px * qy - py * qx),
                     pw * qw - px * qx - py * qy - pz * qz])


def rotation_matrices(q):
    """Attitude matrices for stacked unit quaternions, shape ``(..., 3, 3)``.

    No unit-norm check; use :func:`to_rotation_matrix` for validated input.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        x, y, z, w = q.tolist()
        return np.array([
            [w * w + x * x - y * y - z * z, 2.0 * (x * y + z * w), 2.0 * (x * z - y * w)],
            [2.0 * (x * y - z * w), w * w - x * x + y * y - z * z, 2.0 * (y * z + x * w)],
            [2.0 * (x * z + y * w), 2.0 * (y * z - x * w), w * w - x * x - y * y + z * z]])
    x, y, z, w = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(q.shape[:-1] + (3, 3))
    out[..., 0, 0] = w * w + x * x - y * y - z * z
    out[..., 0, 1] = 2.0 * (x * y + z * w)
    out[..., 0, 2] = 2.0 * (x * z - y * w)
    out[..., 1, 0] = 2.0 * (x * y - z * w)
    out[..., 1, 1] = w * w - x * x + y * y - z * z
    out[..., 1, 2] = 2.0 * (y * z + x * w)
    out[..., 2, 0] = 2.0 * (x * z + y * w)
    out[..., 2, 1] = 2.0 * (y * z - x * w)
    out[..., 2, 2] = w * w - x * x - y * y + z * z
    return out


def to_rotation_matrix(q):
    """Attitude matrix ``A(q)`` such that ``b = A(q) @ r``.

    Raises
    ------
    InvalidInputError
        If ``q`` deviates from unit norm by more than 1e-6.
    """
    return rotation_matrices(check_unit(q))


def rotate(q, v):
    """Apply ``A(q)`` to ``v``; both arguments may be stacked."""
    return np.einsum("...ij,...j->...i", rotation_matrices(q), v)


def from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.append(np.sin(0.5 * angle) * axis, np.cos(0.5 * angle))


def from_euler_321(roll, pitch, yaw):
    """Quaternion of the 3-2-1 (yaw, then pitch, then roll) frame rotation, radians."""
    qz = from_axis_angle([0.0, 0.0, 1.0], yaw)
    qy = from_axis_angle([0.0, 1.0, 0.0], pitch)
    qx = from_axis_angle([1.0, 0.0, 0.0], roll)
    return compose(qx, compose(qy, qz))


def random_quaternion(rng):
    """Uniformly distributed unit quaternion."""
    return normalize(rng.standard_normal(4))


def increment(omega, dt):
    """Rotation quaternion ``[psi; cos(0.5 |w| dt)]`` for a constant rate over ``dt``."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (3,) or not np.all(np.isfinite(omega)):
        raise InvalidInputError(f"angular rate must be a finite 3-vector, got {omega!r}")
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt!r}")
    x, y, z = omega.tolist()
    rate = math.sqrt(x * x + y * y + z * z)
    if rate < SMALL_RATE:
        k, c = 0.5 * dt, 1.0
    else:
        half = 0.5 * rate * dt
        k, c = math.sin(half) / rate, math.cos(half)
    return np.array([k * x, k * y, k * z, c])


def omega_matrix(omega, dt):
    """4x4 discrete transition matrix of the quaternion kinematics."""
    dq = increment(omega, dt)
    psi, c = dq[:3], dq[3]
    out = np.empty((4, 4))
    out[:3, :3] = c * np.eye(3) - skew(psi)
    out[:3, 3] = psi
    out[3, :3] = -psi
    out[3, 3] = c
    return out


def propagate(q, omega, dt):
    """Advance ``q`` one step under constant body rate ``omega`` (rad/s)."""
    q = compose(increment(omega, dt), q)
    return q / math.sqrt(q @ q)


def rotation_vector(q):
    """Rotation vector (axis times angle, rad) of stacked quaternions, angle in [0, pi]."""
    q = np.asarray(q, dtype=float)
    sign = np.where(q[..., 3:] < 0.0, -1.0, 1.0)
    v, w = sign * q[..., :3], sign * q[..., 3:]
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    angle = 2.0 * np.arctan2(s, w)
    # angle/s -> 2/w as s -> 0
    scale = np.where(s > 1e-300, angle / np.where(s > 1e-300, s, 1.0), 2.0 / w)
    return scale * v


def attitude_error_deg(q_est, q_true):
    """Rotation angle of ``A(q_est) A(q_true)^T`` in degrees; broadcasts."""
    dq = compose(q_est, conjugate(q_true))
    s = np.linalg.norm(dq[..., :3], axis=-1)
    return np.degrees(2.0 * np.arctan2(s, np.abs(dq[..., 3])))
