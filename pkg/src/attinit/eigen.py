"""Cyclic Jacobi eigensolver for small symmetric matrices."""

import math

import numpy as np

from .errors import InvalidInputError

SYMMETRY_TOL = 1e-9


def eigh4(K, v0=None, tol=1e-13, max_sweeps=60):
    """Eigen-decomposition of a symmetric 4x4 matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    K : (4, 4) array_like
        Symmetric matrix.
    v0 : (4, 4) array_like, optional
        Orthogonal warm start, typically the eigenvectors of a nearby matrix.
        Sweeps run on ``v0.T @ K @ v0``, which is already close to diagonal.
    tol : float
        Stop once the off-diagonal Frobenius norm is below ``tol * ||K||_F``.

    Returns
    -------
    w : (4,) ndarray
        Eigenvalues in ascending order.
    V : (4, 4) ndarray
        Orthonormal eigenvectors as columns, ``K @ V[:, i] = w[i] * V[:, i]``.
    """
    K = np.asarray(K, dtype=float)
    if K.shape != (4, 4) or not np.all(np.isfinite(K)):
        raise InvalidInputError("K must be a finite 4x4 matrix")
    scale = math.sqrt(float(np.sum(K * K)))
    if np.max(np.abs(K - K.T)) > SYMMETRY_TOL * max(scale, 1.0):
        raise InvalidInputError("K is not symmetric")

    n = K.shape[0]
    if v0 is None:
        a = (0.5 * (K + K.T)).tolist()
        v = np.eye(n).tolist()
    else:
        v0 = np.asarray(v0, dtype=float)
        a = v0.T @ K @ v0
        a = (0.5 * (a + a.T)).tolist()
        v = v0.tolist()

    thresh = tol * scale
    # entries below this cannot keep the off-diagonal norm above thresh on their own
    negligible = thresh / math.sqrt(n * (n - 1))
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p][q] * a[p][q]
        if math.sqrt(2.0 * off) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= negligible:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p][p] -= t * apq
                a[q][q] += t * apq
                a[p][q] = a[q][p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = a[p][k] = akp - s * (akq + tau * akp)
                    a[k][q] = a[q][k] = akq + s * (akp - tau * akq)
                for row in v:
                    vkp, vkq = row[p], row[q]
                    row[p] = c * vkp - s * vkq
                    row[q] = s * vkp + c * vkq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")

    w = np.array([a[i][i] for i in range(n)])
    order = np.argsort(w, kind="stable")
    return w[order], np.array(v)[:, order]
