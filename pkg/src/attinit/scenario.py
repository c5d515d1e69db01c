"""Synthetic truth, gyro and single-star measurements, and the Monte Carlo runner."""

import enum
import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import NamedTuple, Optional

import numpy as np

from . import davenport as dav
from . import mekf
from . import quaternion as quat
from .errors import AttitudeError, ConfigError, DegenerateGeometryError

DEG = math.pi / 180.0
DEG_PER_HOUR = DEG / 3600.0
# Filter measurement variance floor, keeps noiseless runs invertible.
MIN_FILTER_SIGMA = 1e-6


def _default_q0():
    q = quat.from_euler_321(20.0 * DEG, -15.0 * DEG, 40.0 * DEG)
    return tuple(float(x) for x in q)


class Method(str, enum.Enum):
    OPTIMAL = "Optimal"
    OPTIMAL_PLUS_MEKF = "OptimalPlusMekf"
    MEKF_ONLY = "MekfOnly"

    @classmethod
    def parse(cls, name):
        for m in cls:
            if name.lower() in (m.value.lower(), m.name.lower()):
                return m
        raise ConfigError("methods", f"unknown method {name!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """All truth, sensor and filter parameters of one experiment.

    Attitude angles stay in deg and biases in deg/h; noise
    densities are SI. The body rate is
    ``[a sin(2 pi t / T), pitch_rate, a cos(2 pi t / T)]`` with
    ``a = wobble_amp`` and ``T = wobble_period``.
    """

    duration: float = 5400.0
    dt: float = 1.0
    init_phase: float = 300.0
    pitch_rate: float = 2.0 * math.pi / 5400.0
    wobble_amp: float = 0.05 * DEG
    wobble_period: float = 600.0
    q0_true: tuple = field(default_factory=_default_q0)
    gyro_bias_degph: tuple = (0.1, 0.1, 0.1)
    sigma_v: float = 3.16e-7
    sigma_u: float = 1e-10
    sigma_star: float = 2.909e-5
    init_att_err_deg: tuple = (10.0, 10.0, 30.0)
    mekf_att_std_deg: float = 10.0
    handoff_att_std_deg: float = 0.1
    bias_std_degph: float = 0.1
    truth_substeps: int = 10
    solve_every: int = 1
    mc_runs: int = 50
    seed: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(f.default, tuple) or f.name == "q0_true":
                try:
                    v = tuple(float(x) for x in v)
                except (TypeError, ValueError):
                    raise ConfigError(f.name, "expected a list of numbers") from None
            elif f.type is int:
                try:
                    ok = not isinstance(v, bool) and float(v).is_integer()
                except (TypeError, ValueError, OverflowError):
                    ok = False
                if not ok:
                    raise ConfigError(f.name, f"expected an integer, got {v!r}")
                v = int(v)
            else:
                try:
                    v = float(v)
                except (TypeError, ValueError):
                    raise ConfigError(f.name, f"expected a number, got {v!r}") from None
                if not math.isfinite(v):
                    raise ConfigError(f.name, "must be finite")
            object.__setattr__(self, f.name, v)
        self._validate()

    def _validate(self):
        if not self.dt > 0:
            raise ConfigError("dt", "must be positive")
        if not self.init_phase > 0:
            raise ConfigError("init_phase", "must be positive")
        if not self.duration >= self.init_phase:
            raise ConfigError("duration", "must be at least init_phase")
        for name in ("duration", "init_phase"):
            n = getattr(self, name) / self.dt
            if abs(n - round(n)) > 1e-9:
                raise ConfigError(name, "must be a whole number of dt steps")
        for name in ("gyro_bias_degph", "init_att_err_deg"):
            if len(getattr(self, name)) != 3:
                raise ConfigError(name, "expected 3 components")
        if len(self.q0_true) != 4 or abs(math.sqrt(sum(x * x for x in self.q0_true)) - 1.0) > 1e-6:
            raise ConfigError("q0_true", "expected a unit quaternion [x, y, z, w]")
        for name in ("sigma_v", "sigma_u", "sigma_star", "mekf_att_std_deg",
                     "handoff_att_std_deg", "bias_std_degph", "wobble_period"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be non-negative")
        if self.wobble_period == 0:
            raise ConfigError("wobble_period", "must be positive")
        for name in ("truth_substeps", "solve_every", "mc_runs"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be at least 1")

    @property
    def n_epochs(self):
        return int(round(self.duration / self.dt))

    @property
    def n_init(self):
        return int(round(self.init_phase / self.dt))

    @property
    def bias_rad(self):
        return np.array(self.gyro_bias_degph) * DEG_PER_HOUR

    def rate(self, t):
        """True body rate at times ``t`` (rad/s), shape ``t.shape + (3,)``."""
        t = np.asarray(t, dtype=float)
        phase = 2.0 * np.pi * t / self.wobble_period
        return np.stack([self.wobble_amp * np.sin(phase),
                         np.full_like(t, self.pitch_rate),
                         self.wobble_amp * np.cos(phase)], axis=-1)

    def mekf_config(self):
        sigma = max(self.sigma_star, MIN_FILTER_SIGMA)
        return mekf.MekfConfig(self.sigma_v, self.sigma_u, sigma * sigma, self.dt)

    def to_dict(self):
        return {f.name: list(v) if isinstance(v := getattr(self, f.name), tuple) else v
                for f in fields(self)}


class Truth(NamedTuple):
    t: np.ndarray      # (N+1,) epochs 0..N
    q: np.ndarray      # (N+1, 4) true attitude
    omega: np.ndarray  # (N, 3) constant rate equivalent to each interval's rotation


class Epoch(NamedTuple):
    t: float
    gyro: np.ndarray   # rate sample that carries the previous epoch into this one
    obs: dav.VectorObservationPair
    q_true: np.ndarray


@dataclass(frozen=True)
class ScenarioStream:
    """Sensor data of one Monte Carlo run; row ``k`` is epoch ``k + 1``."""

    t: np.ndarray
    gyro: np.ndarray
    b: np.ndarray
    r: np.ndarray
    q_true: np.ndarray
    q0_true: np.ndarray

    def __len__(self):
        return len(self.t)

    def observation(self, k):
        return dav.VectorObservationPair(self.b[k], self.r[k], float(self.t[k]))

    def epochs(self):
        for k in range(len(self)):
            yield Epoch(float(self.t[k]), self.gyro[k], self.observation(k), self.q_true[k])


def _kinematics(omega):
    """Matrices ``M`` with ``dq/dt = M q``, stacked over the leading axis."""
    x, y, z = omega[..., 0], omega[..., 1], omega[..., 2]
    M = np.zeros(omega.shape[:-1] + (4, 4))
    M[..., 0, 1], M[..., 0, 2], M[..., 0, 3] = z, -y, x
    M[..., 1, 0], M[..., 1, 2], M[..., 1, 3] = -z, x, y
    M[..., 2, 0], M[..., 2, 1], M[..., 2, 3] = y, -x, z
    M[..., 3, 0], M[..., 3, 1], M[..., 3, 2] = -x, -y, -z
    return 0.5 * M


def integrate_truth(q0, rate_fn, n_epochs, dt, substeps):
    """RK4 integration of the attitude kinematics, sampled every ``dt``."""
    h = dt / substeps
    n = n_epochs * substeps
    ts = np.arange(n) * h
    M0 = _kinematics(rate_fn(ts))
    Mh = _kinematics(rate_fn(ts + 0.5 * h))
    M1 = _kinematics(rate_fn(ts + h))
    out = np.empty((n_epochs + 1, 4))
    q = np.array(q0, dtype=float)
    out[0] = q
    for j in range(n):
        k1 = M0[j] @ q
        k2 = Mh[j] @ (q + 0.5 * h * k1)
        k3 = Mh[j] @ (q + 0.5 * h * k2)
        k4 = M1[j] @ (q + h * k3)
        q = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        q /= np.linalg.norm(q)
        if (j + 1) % substeps == 0:
            out[(j + 1) // substeps] = q
    return out


def interval_rates(q, dt):
    """Constant rates that carry ``q[k]`` exactly into ``q[k+1]``."""
    dq = quat.compose(q[1:], quat.conjugate(q[:-1]))
    return quat.rotation_vector(dq) / dt


def generate_truth(cfg, rate_fn=None):
    """True attitude at every epoch plus interval-equivalent body rates.

    Integrated at ``dt / truth_substeps`` from ``cfg.rate`` unless ``rate_fn``
    is given. Results for the built-in profile are cached per config.
    """
    if rate_fn is None:
        return _cached_truth(cfg)
    return _truth(cfg, rate_fn)


def _truth(cfg, rate_fn):
    n = cfg.n_epochs
    q = integrate_truth(cfg.q0_true, rate_fn, n, cfg.dt, cfg.truth_substeps)
    t = np.arange(n + 1) * cfg.dt
    truth = Truth(t, q, interval_rates(q, cfg.dt))
    for a in truth:
        a.setflags(write=False)
    return truth


@functools.lru_cache(maxsize=8)
def _cached_truth(cfg):
    return _truth(cfg, cfg.rate)


def generate_gyro(omega_true, bias, sigma_v, dt, rng):
    """Gyro output: true rate plus constant bias plus white noise of std ``sigma_v / sqrt(dt)``."""
    rng = np.random.default_rng(rng)
    omega_true = np.asarray(omega_true, dtype=float)
    noise = rng.standard_normal(omega_true.shape) * (sigma_v / math.sqrt(dt))
    return omega_true + np.asarray(bias, dtype=float) + noise


def generate_star_obs(q_true, sigma_star, rng):
    """One star per attitude sample: random reference direction, noisy body vector.

    Returns ``(b, r)`` with the same leading shape as ``q_true``.
    """
    rng = np.random.default_rng(rng)
    q_true = np.asarray(q_true, dtype=float)
    shape = q_true.shape[:-1] + (3,)
    r = rng.standard_normal(shape)
    r /= np.linalg.norm(r, axis=-1, keepdims=True)
    b = quat.rotate(q_true, r) + sigma_star * rng.standard_normal(shape)
    b /= np.linalg.norm(b, axis=-1, keepdims=True)
    return b, r


def run_seed(cfg, run):
    return cfg.seed + run


def make_stream(cfg, run=0):
    """Sensor stream for Monte Carlo run ``run`` (seeded with ``cfg.seed + run``)."""
    truth = generate_truth(cfg)
    gyro_rng, star_rng = (np.random.default_rng(s) for s in
                          np.random.SeedSequence(run_seed(cfg, run)).spawn(2))
    gyro = generate_gyro(truth.omega, cfg.bias_rad, cfg.sigma_v, cfg.dt, gyro_rng)
    b, r = generate_star_obs(truth.q[1:], cfg.sigma_star, star_rng)
    return ScenarioStream(truth.t[1:], gyro, b, r, truth.q[1:], truth.q[0])


@dataclass
class RunResult:
    errors: np.ndarray
    bias_error: Optional[np.ndarray] = None   # rad/s, estimate minus truth
    bias_sigma: Optional[np.ndarray] = None   # rad/s
    cov_asym: float = 0.0
    cov_min_eig: float = 0.0
    failure: Optional[str] = None


def optimal_estimates(stream, dt, n=None, solve_every=1):
    """Initializer attitude at each of the first ``n`` epochs, plus the final state.

    Until a unique solution exists the constant attitude is taken as identity.
    """
    n = len(stream) if n is None else n
    state = dav.InitializerState()
    q_b0_b = np.empty((n, 4))
    q_i_b0 = np.empty((n, 4))
    for k in range(n):
        state = dav.step_propagate(state, stream.gyro[k], dt)
        state = dav.step_observe(state, stream.observation(k), dt)
        if state.accumulator.n_obs >= 2 and ((k + 1) % solve_every == 0 or state.q_i_b0 is None):
            try:
                state = dav.step_solve(state)
            except DegenerateGeometryError:
                pass
        q_b0_b[k] = state.q_b0_b
        q_i_b0[k] = quat.IDENTITY if state.q_i_b0 is None else state.q_i_b0
    return quat.normalize(quat.compose(q_b0_b, q_i_b0)), state


def mekf_estimates(stream, state, cfg, start, check_covariance=False):
    """Run the MEKF over epochs ``start..N-1`` from ``state``."""
    mcfg = cfg.mekf_config()
    n = len(stream)
    q = np.empty((n - start, 4))
    asym, min_eig = 0.0, math.inf
    for i, k in enumerate(range(start, n)):
        state = mekf.mekf_propagate(state, stream.gyro[k], mcfg)
        state = mekf.mekf_update(state, stream.observation(k), mcfg)
        q[i] = state.q
        if check_covariance:
            a, e = mekf.covariance_health(state.P)
            asym, min_eig = max(asym, a), min(min_eig, e)
    return q, state, asym, min_eig


def run_single(cfg, method, run=0, check_covariance=False):
    """Attitude error curve (deg per epoch) of one method on one Monte Carlo run."""
    method = Method(method)
    stream = make_stream(cfg, run)
    result = RunResult(errors=np.full(len(stream), np.nan))
    try:
        final = None
        asym, min_eig = 0.0, math.inf
        if method is Method.OPTIMAL:
            q_est, _ = optimal_estimates(stream, cfg.dt, solve_every=cfg.solve_every)
        elif method is Method.OPTIMAL_PLUS_MEKF:
            n0 = cfg.n_init
            q_init, init_state = optimal_estimates(stream, cfg.dt, n0, cfg.solve_every)
            if init_state.q_i_b0 is None:
                raise DegenerateGeometryError("initializer produced no solution")
            s0 = mekf.handoff_from_initializer(
                dav.current_quaternion(init_state), cfg.handoff_att_std_deg,
                cfg.bias_std_degph * DEG_PER_HOUR, t=float(stream.t[n0 - 1]))
            q_mekf, final, asym, min_eig = mekf_estimates(stream, s0, cfg, n0, check_covariance)
            q_est = np.concatenate([q_init, q_mekf])
        else:
            err = np.array(cfg.init_att_err_deg) * DEG
            q_hat0 = quat.compose(quat.from_euler_321(*err), stream.q0_true)
            s0 = mekf.handoff_from_initializer(
                q_hat0, cfg.mekf_att_std_deg, cfg.bias_std_degph * DEG_PER_HOUR)
            q_est, final, asym, min_eig = mekf_estimates(stream, s0, cfg, 0, check_covariance)
    except (AttitudeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        result.failure = f"{type(exc).__name__}: {exc}"
        return result

    result.errors = quat.attitude_error_deg(q_est, stream.q_true)
    if final is not None:
        result.bias_error = final.bias - cfg.bias_rad
        result.bias_sigma = mekf.bias_std(final)
        result.cov_asym, result.cov_min_eig = asym, min_eig
    return result


@dataclass
class MonteCarloResult:
    method: Method
    t: np.ndarray
    errors: np.ndarray                  # (runs, epochs), NaN rows for failed runs
    failures: dict                      # run index -> message
    bias_error: np.ndarray              # (runs, 3), NaN without a filter
    bias_sigma: np.ndarray
    cov_asym: np.ndarray
    cov_min_eig: np.ndarray

    @property
    def ok(self):
        return np.array([i not in self.failures for i in range(len(self.errors))])

    def mean(self):
        return self.errors[self.ok].mean(axis=0)

    def at(self, t):
        """Error column at time ``t`` (seconds) for successful runs."""
        k = int(np.argmin(np.abs(self.t - t)))
        return self.errors[self.ok, k]


def _run_job(args):
    return run_single(*args)


def run_monte_carlo(cfg, method, workers=1, check_covariance=False, runs=None):
    """Run ``cfg.mc_runs`` seeded runs of ``method``; run ``i`` uses seed ``cfg.seed + i``.

    A run that fails numerically is recorded in ``failures`` with NaN errors
    instead of aborting the batch. Output does not depend on ``workers``.
    """
    method = Method(method)
    runs = range(cfg.mc_runs) if runs is None else runs
    jobs = [(cfg, method, i, check_covariance) for i in runs]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]

    nan3 = np.full(3, np.nan)
    return MonteCarloResult(
        method=method,
        t=np.arange(1, cfg.n_epochs + 1) * cfg.dt,
        errors=np.array([r.errors for r in results]),
        failures={i: r.failure for i, r in enumerate(results) if r.failure},
        bias_error=np.array([nan3 if r.bias_error is None else r.bias_error for r in results]),
        bias_sigma=np.array([nan3 if r.bias_sigma is None else r.bias_sigma for r in results]),
        cov_asym=np.array([r.cov_asym for r in results]),
        cov_min_eig=np.array([r.cov_min_eig for r in results]),
    )
