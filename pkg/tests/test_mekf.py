import numpy as np
import pytest
from hypothesis import given

from attinit import quaternion as quat
from attinit.davenport import VectorObservationPair
from attinit.errors import InvalidInputError, SingularUpdateError
from attinit.mekf import (DEG, DEG_PER_HOUR, MekfConfig, MekfState, covariance_health,
                          handoff_from_initializer, mekf_propagate, mekf_update,
                          process_noise, transition_matrix)
from attinit.scenario import ScenarioConfig, make_stream, mekf_estimates

from conftest import same_rotation, unit_quaternions, unit_vectors


def state(q=quat.IDENTITY, att=1e-4, bias_var=0.0, bias=(0.0, 0.0, 0.0)):
    P = np.diag([att] * 3 + [bias_var] * 3)
    return MekfState(np.array(q, dtype=float), np.array(bias, dtype=float), P)


class TestHandoff:

    def test_optimal_plus_mekf_case1(self):
        s = handoff_from_initializer(quat.IDENTITY, 0.1, 0.1 * DEG_PER_HOUR)
        d = np.diag(s.P)
        np.testing.assert_allclose(d[:3], (0.1 * np.pi / 180) ** 2, rtol=1e-15)
        np.testing.assert_allclose(d[3:], (0.1 * np.pi / (180 * 3600)) ** 2, rtol=1e-15)
        np.testing.assert_array_equal(s.P, np.diag(d))
        np.testing.assert_array_equal(s.bias, np.zeros(3))

    def test_case2_and_case3_diagonals(self):
        s = handoff_from_initializer(quat.IDENTITY, 25.0, 10.0 * DEG_PER_HOUR)
        np.testing.assert_allclose(np.diag(s.P)[:3], (25 * np.pi / 180) ** 2, rtol=1e-15)
        np.testing.assert_allclose(np.diag(s.P)[3:], (10 * np.pi / (180 * 3600)) ** 2, rtol=1e-15)

    def test_unit_conversion(self):
        assert 0.1 * DEG_PER_HOUR == pytest.approx(4.848e-7, rel=1e-3)

    def test_rejects_non_unit(self):
        with pytest.raises(InvalidInputError):
            handoff_from_initializer([0, 0, 0, 2.0], 1.0, 0.0)


class TestConfig:

    @pytest.mark.parametrize("kw", [{"sigma_v": -1.0}, {"sigma_u": float("nan")},
                                    {"r_scalar": -1e-9}, {"dt": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            MekfConfig(**kw)

    def test_process_noise_blocks(self):
        cfg = MekfConfig(sigma_v=2e-6, sigma_u=3e-9, dt=2.0)
        Q = process_noise(cfg)
        v2, u2 = 4e-12, 9e-18
        np.testing.assert_allclose(np.diag(Q)[:3], v2 * 2 + u2 * 8 / 3, rtol=1e-15)
        np.testing.assert_allclose(np.diag(Q)[3:], u2 * 2, rtol=1e-15)
        np.testing.assert_allclose(np.diag(Q[:3, 3:]), -u2 * 2, rtol=1e-15)
        np.testing.assert_array_equal(Q, Q.T)


class TestPropagate:

    def test_rate_equal_to_bias_holds_attitude(self, rng):
        q = quat.random_quaternion(rng)
        bias = np.array([1e-5, -2e-5, 3e-6])
        cfg = MekfConfig(dt=1.0)
        s = mekf_propagate(state(q, att=1e-6, bias=bias), bias, cfg)
        np.testing.assert_allclose(s.q, q, atol=1e-15)
        Q11 = cfg.sigma_v ** 2 * cfg.dt + cfg.sigma_u ** 2 * cfg.dt ** 3 / 3
        np.testing.assert_allclose(np.diag(s.P)[:3], 1e-6 + Q11, rtol=1e-14)
        assert s.t == 1.0

    def test_noiseless_trace_non_increasing(self, rng):
        # the truncated attitude block satisfies Φ11ᵀΦ11 = I + W⁴Δt⁴/4, so the only
        # permitted growth is that (|ω|Δt)⁴/4 term plus round-off
        cfg = MekfConfig(sigma_v=0.0, sigma_u=0.0)
        A = rng.standard_normal((3, 3))
        P = np.zeros((6, 6))
        P[:3, :3] = A @ A.T * 1e-4
        s = MekfState(quat.IDENTITY.copy(), np.zeros(3), P)
        for _ in range(200):
            before = np.trace(s.P)
            omega = rng.standard_normal(3) * 1e-3
            s = mekf_propagate(s, omega, cfg)
            growth = np.linalg.norm(omega) ** 4 / 4
            assert np.trace(s.P) <= before * (1 + growth + 1e-15)
            assert np.trace(s.P) <= before * (1 + 1e-10)

    def test_single_axis_scalar_oracle(self, rng):
        # rate and vectors keep the z error axis decoupled: a 2-state (angle, bias)
        # Kalman filter on that axis must reproduce the filter's z block
        cfg = MekfConfig(sigma_v=1e-5, sigma_u=1e-7, r_scalar=1e-6, dt=1.0)
        s = state(att=1e-3, bias_var=1e-9)
        omega = np.array([0.0, 0.0, 0.01])
        P2 = np.diag([1e-3, 1e-9])
        Phi2 = np.array([[1.0, -1.0], [0.0, 1.0]])
        Q = process_noise(cfg)
        Q2 = np.array([[Q[2, 2], Q[2, 5]], [Q[5, 2], Q[5, 5]]])
        h = np.array([1.0, 0.0])
        for k in range(100):
            s = mekf_propagate(s, omega, cfg)
            P2 = Phi2 @ P2 @ Phi2.T + Q2
            zs = s.P[np.ix_([2, 5], [2, 5])]
            np.testing.assert_allclose(zs, P2, rtol=1e-9)
            phi = rng.uniform(0, 2 * np.pi)
            r = np.array([np.cos(phi), np.sin(phi), 0.0])
            s = mekf_update(s, VectorObservationPair(quat.rotate(s.q, r), r), cfg)
            gain = P2 @ h / (h @ P2 @ h + cfg.r_scalar)
            P2 = P2 - np.outer(gain, h @ P2)
            zs = s.P[np.ix_([2, 5], [2, 5])]
            np.testing.assert_allclose(zs, P2, rtol=1e-9)
            assert np.max(np.abs(s.P[2, [0, 1, 3, 4]])) < 1e-9 * s.P[2, 2]


class TestUpdate:

    def test_zero_residual(self, rng):
        q = quat.random_quaternion(rng)
        r = quat.normalize(rng.standard_normal(3))
        s0 = state(q, att=1e-4, bias_var=1e-10)
        s = mekf_update(s0, VectorObservationPair(quat.rotate(q, r), r), MekfConfig())
        assert same_rotation(s.q, q, 1e-15)
        np.testing.assert_allclose(s.bias, 0.0, atol=1e-20)
        assert np.trace(s.P) < np.trace(s0.P)

    def test_large_noise_limit(self, rng):
        q_true = quat.random_quaternion(rng)
        s0 = state(quat.IDENTITY, att=1e-2)
        r = quat.normalize(rng.standard_normal(3))
        obs = VectorObservationPair(quat.rotate(q_true, r), r)
        shifts = []
        for R in (1e-2, 1.0, 1e2, 1e4):
            s = mekf_update(s0, obs, MekfConfig(r_scalar=R))
            shifts.append(quat.attitude_error_deg(s.q, s0.q))
        assert all(a > b for a, b in zip(shifts, shifts[1:]))
        assert shifts[-1] < 1e-4

    @pytest.mark.parametrize("theta_deg", [0.01, 0.1, 1.0])
    def test_planar_scalar_oracle(self, theta_deg):
        theta, p, R = np.radians(theta_deg), 1e-4, 4e-6
        q_true = quat.from_axis_angle([0, 0, 1], theta)
        r = np.array([1.0, 0.0, 0.0])
        s = mekf_update(state(att=p), VectorObservationPair(quat.rotate(q_true, r), r),
                        MekfConfig(r_scalar=R))
        dalpha_z = p * np.sin(theta) / (p + R)
        expected = quat.normalize(np.array([0.0, 0.0, dalpha_z / 2, 1.0]))
        np.testing.assert_allclose(s.q, expected, atol=1e-8)
        assert s.P[2, 2] == pytest.approx(p * R / (p + R), rel=1e-8)
        assert s.P[0, 0] == pytest.approx(p, rel=1e-12)  # the x axis is unobservable

    def test_singular_innovation(self):
        s = state(att=1.0)
        r = np.array([1.0, 0.0, 0.0])
        with pytest.raises(SingularUpdateError):
            mekf_update(s, VectorObservationPair(r, r), MekfConfig(r_scalar=0.0))

    def test_rejects_bad_vectors(self):
        with pytest.raises(InvalidInputError):
            mekf_update(state(), VectorObservationPair(np.array([np.nan, 0, 1]),
                                                       np.array([0.0, 0, 1])), MekfConfig())

    @given(q=unit_quaternions(), b=unit_vectors(), r=unit_vectors())
    def test_sign_invariance(self, q, b, r):
        cfg = MekfConfig(r_scalar=1e-4)
        obs = VectorObservationPair(b, r)
        plus = mekf_update(state(q, att=1e-3, bias_var=1e-8), obs, cfg)
        minus = mekf_update(state(-q, att=1e-3, bias_var=1e-8), obs, cfg)
        assert same_rotation(plus.q, minus.q, 1e-12)
        np.testing.assert_allclose(plus.P, minus.P, rtol=1e-9, atol=1e-18)


def test_transition_matrix_blocks():
    omega = np.array([1e-3, -2e-3, 5e-4])
    Phi = transition_matrix(omega, 1.0)
    W = -quat.skew(omega)
    np.testing.assert_allclose(Phi[:3, :3], np.eye(3) + W + W @ W / 2, atol=1e-18)
    np.testing.assert_allclose(Phi[:3, 3:], -np.eye(3) - W / 2, atol=1e-18)
    np.testing.assert_array_equal(Phi[3:], np.hstack([np.zeros((3, 3)), np.eye(3)]))


def test_perfect_initialization_stays_on_truth():
    cfg = ScenarioConfig(duration=100, init_phase=100, gyro_bias_degph=(0, 0, 0), sigma_v=0, sigma_star=0)
    stream = make_stream(cfg)
    s0 = handoff_from_initializer(stream.q0_true, 0.1, 0.1 * DEG_PER_HOUR)
    q, _, _, _ = mekf_estimates(stream, s0, cfg, 0)
    assert quat.attitude_error_deg(q, stream.q_true).max() < 1e-9


def test_covariance_health_long_run():
    cfg = ScenarioConfig(mc_runs=1)
    stream = make_stream(cfg)
    err = np.array(cfg.init_att_err_deg) * DEG
    s0 = handoff_from_initializer(quat.compose(quat.from_euler_321(*err), stream.q0_true),
                                  cfg.mekf_att_std_deg, cfg.bias_std_degph * DEG_PER_HOUR)
    q, final, asym, min_eig = mekf_estimates(stream, s0, cfg, 0, check_covariance=True)
    assert len(q) == 5400
    assert asym <= 1e-12 * np.trace(final.P)
    assert min_eig >= -1e-15
    assert quat.attitude_error_deg(q[-1], stream.q_true[-1]) < 0.05
