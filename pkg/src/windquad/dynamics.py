"""Rigid-body equations of motion and a fixed-step Lie-group RK4 integrator.

State evolves by

    xdot = v,   m vdot = U_e,   Rdot = R hat(Omega),   J Omegadot + Omega x J Omega = M_e

with U_e in the inertial frame and M_e in the body frame.  The integrator is
classical RK4 on (x, v, Omega) coupled with a rotation-vector chart for R:
the chart rate is the body angular velocity corrected by the inverse
right-Jacobian series (truncated at second order, which preserves the global
O(dt^4) error), and the step closes with the exponential map of the averaged
body angular increment followed by re-orthonormalization.
"""

from dataclasses import dataclass, field

import numpy as np

from .se3 import cross3, expm_so3, hat, is_rotation, orthonormalize

#: rotor speed floor shared with the aero model [rad/s]
OMEGA_MIN = 1.0

#: integrator step bound [s]
DT_MAX = 0.05


@dataclass
class RigidBodyState:
    """Pose and velocities of the vehicle.

    x, v in the inertial frame [m, m/s]; R body-to-inertial; Omega in the
    body frame [rad/s].
    """

    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        self.Omega = np.asarray(self.Omega, dtype=float)

    @classmethod
    def at_rest(cls, x=(0.0, 0.0, 0.0)):
        return cls(x=np.asarray(x, float), v=np.zeros(3), R=np.eye(3), Omega=np.zeros(3))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))
                    and np.all(np.isfinite(self.R)) and np.all(np.isfinite(self.Omega)))

    def copy(self):
        return RigidBodyState(self.x.copy(), self.v.copy(), self.R.copy(), self.Omega.copy())


@dataclass(frozen=True)
class QuadParams:
    """Mass properties and geometry of the vehicle.

    Rotors sit at [d_h,0,d_v], [0,-d_h,d_v], [-d_h,0,d_v], [0,d_h,d_v] in the
    body frame.  J is a full symmetric positive-definite inertia matrix.
    """

    m: float = 0.5
    J: np.ndarray = field(default_factory=lambda: np.diag([0.006, 0.006, 0.011]))
    d_h: float = 0.15
    d_v: float = -0.02
    g: float = 9.81

    def __post_init__(self):
        object.__setattr__(self, "J", np.asarray(self.J, dtype=float))
        if self.m <= 0.0:
            raise ValueError("mass must be positive")
        if self.J.shape != (3, 3) or np.linalg.norm(self.J - self.J.T) > 1e-12:
            raise ValueError("J must be symmetric 3x3")
        if np.any(np.linalg.eigvalsh(self.J) <= 0.0):
            raise ValueError("J must be positive-definite")
        if self.d_h <= 0.0:
            raise ValueError("d_h must be positive")
        if self.g < 0.0:
            raise ValueError("g must be non-negative")
        object.__setattr__(self, "_J_inv", np.linalg.inv(self.J))

    @property
    def J_inv(self):
        return self._J_inv

    @property
    def rotor_positions(self):
        d_h, d_v = self.d_h, self.d_v
        return (np.array([d_h, 0.0, d_v]), np.array([0.0, -d_h, d_v]),
                np.array([-d_h, 0.0, d_v]), np.array([0.0, d_h, d_v]))


@dataclass(frozen=True)
class SimplifiedModelParams:
    """Constant thrust/torque coefficients assumed by the controller.

    T'_j = C_T' w_j^2 and Q'_j = C_Q' w_j^2 = C_TQ T'_j.
    """

    C_T: float = 8.5e-06
    C_Q: float = 8.6e-08

    def __post_init__(self):
        if self.C_T <= 0.0 or self.C_Q <= 0.0:
            raise ValueError("coefficients must be positive")

    @property
    def C_TQ(self):
        """Reactive torque per unit thrust [m]."""
        return self.C_Q / self.C_T


def state_derivative(state, U_e, M_e, params):
    """Time derivative (xdot, vdot, Rdot, Omegadot) of the rigid body."""
    xdot = state.v
    vdot = np.asarray(U_e, float) / params.m
    Rdot = state.R @ hat(state.Omega)
    Omegadot = params.J_inv @ (np.asarray(M_e, float) - cross3(state.Omega, params.J @ state.Omega))
    return xdot, vdot, Rdot, Omegadot


def _dexpinv(phi, Omega):
    """Chart rate d/dt phi for R = R0 exp(hat(phi)), Rdot = R hat(Omega).

    Inverse right-Jacobian series truncated after the second-order term
    (the cubic term vanishes), sufficient for a fourth-order integrator.
    """
    c = cross3(phi, Omega)
    return Omega + 0.5 * c + cross3(phi, c) / 12.0


def step_rk4(state, dt, wrench_fn, params, t=0.0):
    """One classical RK4 step of the rigid body under wrench_fn(t, state).

    wrench_fn returns (U_e, M_e).  dt must lie in (0, DT_MAX].  Errors raised
    by wrench_fn propagate.
    """
    if not 0.0 < dt <= DT_MAX:
        raise ValueError(f"dt must be in (0, {DT_MAX}], got {dt}")

    m = params.m
    J = params.J
    J_inv = params.J_inv
    R0 = state.R

    def rates(ts, x, v, phi, Omega):
        s = RigidBodyState(x, v, R0 @ expm_so3(phi), Omega)
        U_e, M_e = wrench_fn(ts, s)
        return (v,
                np.asarray(U_e, float) / m,
                _dexpinv(phi, Omega),
                J_inv @ (np.asarray(M_e, float) - cross3(Omega, J @ Omega)))

    x0, v0, Om0 = state.x, state.v, state.Omega
    zero = np.zeros(3)

    k1 = rates(t, x0, v0, zero, Om0)
    k2 = rates(t + 0.5 * dt, x0 + 0.5 * dt * k1[0], v0 + 0.5 * dt * k1[1],
               0.5 * dt * k1[2], Om0 + 0.5 * dt * k1[3])
    k3 = rates(t + 0.5 * dt, x0 + 0.5 * dt * k2[0], v0 + 0.5 * dt * k2[1],
               0.5 * dt * k2[2], Om0 + 0.5 * dt * k2[3])
    k4 = rates(t + dt, x0 + dt * k3[0], v0 + dt * k3[1],
               dt * k3[2], Om0 + dt * k3[3])

    sixth = dt / 6.0
    x_new = x0 + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v_new = v0 + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    phi = sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    Om_new = Om0 + sixth * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])

    R_new = orthonormalize(R0 @ expm_so3(phi))
    return RigidBodyState(x_new, v_new, R_new, Om_new)


def rotor_speed_from_thrust(T_cmd, params, omega_min=OMEGA_MIN):
    """Rotor speed realizing a commanded thrust under the simplified model.

    Thrust is floored at T_min = C_T' omega_min^2 (rotors cannot reverse);
    returns (omega, saturated) where the flag marks an active clip.
    """
    T_min = params.C_T * omega_min ** 2
    saturated = T_cmd < T_min
    omega = np.sqrt(max(T_cmd, T_min) / params.C_T)
    return omega, bool(saturated)


def simplified_wrench(state, f, M_c, params, delta1=None, delta2=None):
    """Wrench of the simplified control model with injected disturbances.

    U_e = m g e3 - f R e3 - delta1 (inertial), M_e = M_c - delta2 (body).
    """
    U_e = params.m * params.g * np.array([0.0, 0.0, 1.0]) - f * state.R[:, 2]
    if delta1 is not None:
        U_e = U_e - np.asarray(delta1, float)
    M_e = np.asarray(M_c, dtype=float)
    if delta2 is not None:
        M_e = M_e - np.asarray(delta2, float)
    return U_e, M_e


def check_state(state, tol=1e-6):
    """Raise if the state is non-finite or the rotation invariants fail."""
    if not state.is_finite():
        raise ValueError("non-finite state")
    if not is_rotation(state.R, tol):
        raise ValueError("rotation matrix invariants violated")
