import numpy as np
import pytest

from windquad.dynamics import (QuadParams, RigidBodyState,
                               SimplifiedModelParams, rotor_speed_from_thrust,
                               simplified_wrench, state_derivative, step_rk4)
from windquad.errors import NotSkewSymmetric
from windquad.se3 import expm_so3


def free_wrench(t, s):
    return np.zeros(3), np.zeros(3)


# --- state derivative --------------------------------------------------------

def test_derivative_equilibrium(quad):
    st = RigidBodyState.at_rest()
    xd, vd, Rd, Od = state_derivative(st, np.zeros(3), np.zeros(3), quad)
    assert np.allclose(vd, 0.0) and np.allclose(Od, 0.0)
    assert np.allclose(Rd, 0.0) and np.allclose(xd, 0.0)


def test_derivative_principal_spin():
    quad = QuadParams(m=1.0, J=np.diag([0.1, 0.2, 0.3]))
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                        Omega=np.array([2.0, 0.0, 0.0]))
    M = np.array([0.3, 0.0, 0.0])
    _, _, _, Od = state_derivative(st, np.zeros(3), M, quad)
    assert np.allclose(Od, [3.0, 0.0, 0.0])


def test_derivative_gyroscopic():
    quad = QuadParams(m=1.0, J=np.diag([1.0, 2.0, 3.0]))
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                        Omega=np.array([1.0, 1.0, 0.0]))
    _, _, _, Od = state_derivative(st, np.zeros(3), np.zeros(3), quad)
    assert np.allclose(Od, [0.0, 0.0, -1.0 / 3.0])


# --- integrator --------------------------------------------------------------

def test_ballistic_free_fall():
    quad = QuadParams(m=2.0, g=9.81)
    st = RigidBodyState.at_rest()
    dt, T = 1e-3, 1.0

    def wrench(t, s):
        return quad.m * quad.g * np.array([0.0, 0.0, 1.0]), np.zeros(3)

    for _ in range(int(T / dt)):
        st = step_rk4(st, dt, wrench, quad)
    assert st.x[2] == pytest.approx(0.5 * quad.g * T ** 2, abs=1e-10)
    assert st.v[2] == pytest.approx(quad.g * T, abs=1e-12)


def test_principal_axis_spin_exact():
    quad = QuadParams(m=1.0, J=np.diag([0.02, 0.02, 0.04]))
    Om0 = np.array([0.0, 0.0, 5.0])
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3), Omega=Om0.copy())
    dt, T = 1e-3, 10.0
    for _ in range(int(T / dt)):
        st = step_rk4(st, dt, free_wrench, quad)
    assert np.allclose(st.Omega, Om0, atol=1e-13)
    assert np.linalg.norm(st.R - expm_so3(Om0 * T)) < 1e-8


def symmetric_top_closed_form(Om0, J, t):
    """R(t), Omega(t) for a torque-free symmetric top (J1 == J2)."""
    s = Om0[2] * (J[2, 2] - J[0, 0]) / J[0, 0]
    e3 = np.array([0.0, 0.0, 1.0])
    R = expm_so3(t * (Om0 + s * e3)) @ expm_so3(-s * t * e3)
    Om = expm_so3(s * t * e3) @ Om0
    return R, Om


def test_symmetric_top_against_closed_form():
    J = np.diag([0.02, 0.02, 0.04])
    quad = QuadParams(m=1.0, J=J, g=0.0)
    Om0 = np.array([1.5, 0.8, 3.0])
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3), Omega=Om0.copy())
    dt, T = 1e-3, 2.0
    for _ in range(int(T / dt)):
        st = step_rk4(st, dt, free_wrench, quad)
    R_ref, Om_ref = symmetric_top_closed_form(Om0, J, T)
    assert np.linalg.norm(st.R - R_ref) < 1e-9
    assert np.linalg.norm(st.Omega - Om_ref) < 1e-9


def test_integrator_fourth_order():
    J = np.diag([0.02, 0.02, 0.04])
    quad = QuadParams(m=1.0, J=J, g=0.0)
    Om0 = np.array([1.5, 0.8, 3.0])
    T = 2.0

    def terminal_error(dt):
        st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3), Omega=Om0.copy())
        for _ in range(int(round(T / dt))):
            st = step_rk4(st, dt, free_wrench, quad)
        R_ref, Om_ref = symmetric_top_closed_form(Om0, J, T)
        return np.linalg.norm(st.R - R_ref) + np.linalg.norm(st.Omega - Om_ref)

    assert terminal_error(0.02) / terminal_error(0.01) >= 14.0


def test_conservation_asymmetric_top():
    J = np.diag([0.02, 0.031, 0.045])
    quad = QuadParams(m=1.0, J=J, g=0.0)
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                        Omega=np.array([1.0, 2.0, 3.0]))
    L0 = st.R @ (J @ st.Omega)
    E0 = 0.5 * st.Omega @ (J @ st.Omega)
    for _ in range(3000):
        st = step_rk4(st, 1e-3, free_wrench, quad)
    L = st.R @ (J @ st.Omega)
    E = 0.5 * st.Omega @ (J @ st.Omega)
    assert np.linalg.norm(L - L0) / np.linalg.norm(L0) < 1e-9
    assert abs(E - E0) / E0 < 1e-9


def test_rotation_stays_orthonormal():
    quad = QuadParams(m=1.0, J=np.diag([0.02, 0.02, 0.04]), g=0.0)
    st = RigidBodyState(x=np.zeros(3), v=np.zeros(3), R=np.eye(3),
                        Omega=np.array([1.0, 2.0, 3.0]))
    worst = 0.0
    for _ in range(20000):
        st = step_rk4(st, 1e-3, free_wrench, quad)
        worst = max(worst, np.linalg.norm(st.R.T @ st.R - np.eye(3)))
    assert worst <= 1e-12


def test_step_rejects_bad_dt(quad):
    st = RigidBodyState.at_rest()
    with pytest.raises(ValueError):
        step_rk4(st, 0.0, free_wrench, quad)
    with pytest.raises(ValueError):
        step_rk4(st, 0.06, free_wrench, quad)


def test_step_propagates_wrench_errors(quad):
    st = RigidBodyState.at_rest()

    def broken(t, s):
        raise NotSkewSymmetric("boom")

    with pytest.raises(NotSkewSymmetric):
        step_rk4(st, 1e-3, broken, quad)


# --- rotor speed inversion ---------------------------------------------------

def test_rotor_speed_exact_inversion():
    p = SimplifiedModelParams(C_T=2e-5, C_Q=2e-7)
    omega, sat = rotor_speed_from_thrust(2e-5 * 1e4, p)
    assert omega == pytest.approx(100.0)
    assert not sat


def test_rotor_speed_clips_zero():
    p = SimplifiedModelParams(C_T=2e-5, C_Q=2e-7)
    omega, sat = rotor_speed_from_thrust(0.0, p)
    assert omega == pytest.approx(1.0)
    assert sat


def test_rotor_speed_clips_negative():
    p = SimplifiedModelParams(C_T=2e-5, C_Q=2e-7)
    omega, sat = rotor_speed_from_thrust(-3.0, p)
    assert omega == pytest.approx(1.0)
    assert sat


# --- simplified wrench -------------------------------------------------------

def test_simplified_hover_trim(quad):
    st = RigidBodyState.at_rest()
    U_e, M_e = simplified_wrench(st, quad.m * quad.g, np.zeros(3), quad)
    assert np.allclose(U_e, 0.0, atol=1e-12)
    assert np.allclose(M_e, 0.0)


def test_simplified_disturbance_sign(quad):
    st = RigidBodyState.at_rest()
    U_e, _ = simplified_wrench(st, quad.m * quad.g, np.zeros(3), quad,
                               delta1=np.array([1.0, 0.0, 0.0]))
    assert np.allclose(U_e, [-1.0, 0.0, 0.0])


def test_simplified_moment_passthrough(quad):
    st = RigidBodyState.at_rest()
    _, M_e = simplified_wrench(st, 0.0, np.array([0.0, 0.0, 0.1]), quad)
    assert np.allclose(M_e, [0.0, 0.0, 0.1])


# --- parameter validation ----------------------------------------------------

def test_quad_params_reject_bad_inertia():
    with pytest.raises(ValueError):
        QuadParams(J=np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        QuadParams(m=-1.0)


def test_rotor_positions_pattern(quad):
    r1, r2, r3, r4 = quad.rotor_positions
    assert np.allclose(r1, [quad.d_h, 0.0, quad.d_v])
    assert np.allclose(r2, [0.0, -quad.d_h, quad.d_v])
    assert np.allclose(r3, [-quad.d_h, 0.0, quad.d_v])
    assert np.allclose(r4, [0.0, quad.d_h, quad.d_v])


def test_simplified_params_ratio():
    p = SimplifiedModelParams(C_T=8.5e-6, C_Q=8.6e-8)
    assert p.C_TQ == pytest.approx(8.6e-8 / 8.5e-6)
