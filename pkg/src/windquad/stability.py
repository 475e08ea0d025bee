"""Gain feasibility checks, Lyapunov evaluation, and ultimate-bound reports.

Mechanizes the closed-loop analysis machinery: the two coupling-constant
inequalities, the positive-definiteness of the quadratic-form matrices that
sandwich the Lyapunov function and its decay, the convergence rate

    nu = min_i  lambda_min(N_i) / lambda_max(N'_i),

and the residual-set radius C5 / nu.  Everything here evaluates user-supplied
bound assumptions; nothing is estimated from data.

Two printed-source quirks are handled explicitly and flagged in reports: the
primed matrices use an otherwise undefined psi_2, which is substituted by
psi_1; and the attitude-channel constant C5_2 is built from C1_2 (the printed
subscript is inconsistent with its own derivation).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateNu


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a scalar gain inequality."""

    passed: bool
    value: float
    limit: float

    @property
    def margin(self):
        """limit - value; positive when the check passes."""
        return self.limit - self.value


def validate_c1(c1, k_x, m):
    """Position coupling constant feasibility: c1 < sqrt(k_x / m)."""
    if c1 <= 0.0 or k_x <= 0.0 or m <= 0.0:
        raise ValueError("inputs must be positive")
    limit = math.sqrt(k_x / m)
    return CheckResult(passed=c1 < limit, value=c1, limit=limit)


def validate_c2(c2, k_R, J, psi1):
    """Attitude coupling constant feasibility.

    c2 < min( sqrt(k_R lam_min(J)) / lam_max(J),
              sqrt(2 k_R / (lam_max(J) (2 - psi1))) ).
    """
    if c2 <= 0.0 or k_R <= 0.0:
        raise ValueError("inputs must be positive")
    if not psi1 < 2.0:
        raise ValueError("psi1 must be below 2")
    eig = np.linalg.eigvalsh(np.asarray(J, float))
    lam_m, lam_M = float(eig[0]), float(eig[-1])
    limit = min(math.sqrt(k_R * lam_m) / lam_M,
                math.sqrt(2.0 * k_R / (lam_M * (2.0 - psi1))))
    return CheckResult(passed=c2 < limit, value=c2, limit=limit)


@dataclass(frozen=True)
class BoundAssumptions:
    """User-supplied bounds feeding the quadratic-form matrices.

    psi1 bounds the initial attitude configuration error (in (0,1));
    B1 the command acceleration norm; B2 the command jerk terms; B4 the
    computed-attitude rate; e_x_max, x_d_max, v_d_max, E_max bound the
    position error, desired trajectory, and Euler-angle norm.  W_max/V_max/
    Z_max are the per-network weight bounds; eps1/eps2 the approximation
    accuracies.  The constants C1..C4 per network default to the smallest
    values allowed by their defining inequalities.
    """

    psi1: float = 0.01
    B1: float = 10.0
    B2: float = 1.0
    B4: float = 2.0
    e_x_max: float = 0.1
    x_d_max: float = 0.0
    v_d_max: float = 0.0
    E_max: float = 0.5
    delta1: float = 1.0
    delta2: float = 1.0
    delta3: float = 1.0
    delta4: float = 1.0
    eps1: float = 0.01
    eps2: float = 0.01
    W_max1: float = 1.0
    V_max1: float = 1.0
    W_max2: float = 1.0
    V_max2: float = 1.0
    Z_max1: float = 0.0
    Z_max2: float = 0.0
    C1_1: float = 0.0
    C2_1: float = 0.0
    C3_1: float = 0.0
    C4_1: float = 0.0
    C1_2: float = 0.0
    C2_2: float = 0.0
    C3_2: float = 0.0
    C4_2: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.psi1 < 1.0:
            raise ValueError("psi1 must lie in (0, 1)")
        for name in ("B1", "B2", "B4", "e_x_max", "E_max", "delta1", "delta2",
                     "delta3", "delta4", "eps1", "eps2", "W_max1", "V_max1",
                     "W_max2", "V_max2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.x_d_max < 0.0 or self.v_d_max < 0.0:
            raise ValueError("trajectory bounds must be non-negative")
        if self.Z_max1 <= 0.0:
            object.__setattr__(self, "Z_max1", math.hypot(self.W_max1, self.V_max1))
        if self.Z_max2 <= 0.0:
            object.__setattr__(self, "Z_max2", math.hypot(self.W_max2, self.V_max2))
        defaults = {
            "C1_1": 2.0 * self.W_max1 + self.eps1,
            "C2_1": 0.25 * (self.V_max1 + self.W_max1),
            "C1_2": 2.0 * self.W_max2 + self.eps2,
            "C2_2": 0.25 * (self.V_max2 + self.W_max2),
        }
        for name, floor in defaults.items():
            if getattr(self, name) <= 0.0:
                object.__setattr__(self, name, floor)
            elif getattr(self, name) < floor - 1e-12:
                raise ValueError(f"{name} below its defining inequality ({floor:.6g})")
        tied = {
            "C3_1": self.C2_1 * self.Z_max1,
            "C4_1": self.C2_1 * (1.0 + self.x_d_max + self.v_d_max),
            "C3_2": self.C2_2 * self.Z_max2,
            "C4_2": self.C2_2 * (1.0 + self.E_max + self.B4),
        }
        for name, floor in tied.items():
            if getattr(self, name) <= 0.0:
                object.__setattr__(self, name, floor)
            elif getattr(self, name) < floor - 1e-12:
                raise ValueError(f"{name} below its defining inequality ({floor:.6g})")

    @property
    def beta(self):
        """beta = sqrt(psi1 (2 - psi1)), the attitude-error slack factor."""
        return math.sqrt(self.psi1 * (2.0 - self.psi1))


@dataclass
class LyapunovReport:
    """Matrices, spectra, verdicts, and derived constants of one gain set."""

    matrices: dict
    eigenvalues: dict
    verdicts: dict
    constants: dict
    c1_check: CheckResult
    c2_check: CheckResult
    nu: float
    C5: float
    radius: float
    flags: list = field(default_factory=list)
    V1: float = float("nan")
    V2: float = float("nan")
    V: float = float("nan")

    @property
    def all_positive_definite(self):
        return all(self.verdicts.values())


def _eig_span(M):
    eig = np.linalg.eigvalsh(M)
    return float(eig[0]), float(eig[-1])


def build_pd_matrices(gains, m, J, assumptions):
    """Construct every quadratic-form matrix and report spectra and verdicts.

    The primed matrices bound the Lyapunov function from above, the unprimed
    ones bound its decay; nu is the smallest eigenvalue ratio.  A verdict is
    recorded per matrix; nu and the radius are meaningful only when every
    decay matrix is positive-definite (otherwise nu <= 0 is reported as-is).
    """
    a = assumptions
    J = np.asarray(J, dtype=float)
    lam_mJ, lam_MJ = _eig_span(J)
    beta = a.beta
    k_x, k_v, k_R, k_Om = gains.k_x, gains.k_v, gains.k_R, gains.k_Omega
    c1, c2 = gains.c1, gains.c2
    kap1, kap2 = gains.adapt1.kappa, gains.adapt2.kappa

    k_xb = k_x * (1.0 - beta) - a.C3_1
    k_vb = k_v * (1.0 - beta) - m * c1 - a.C3_1
    k_xv = c1 * ((1.0 + beta) * k_v + a.C3_1) + a.C3_1
    k_Omb = k_Om - c2 * lam_MJ - a.C3_2
    k_ROm = c2 * (k_Om + a.C3_2)

    C5_1 = (c1 * a.C1_1 ** 2 / (2.0 * k_xb) + a.C1_1 ** 2 / (2.0 * k_vb)
            + kap1 * a.Z_max1 ** 2 / 2.0) if k_xb > 0.0 and k_vb > 0.0 else float("inf")
    C5_2 = (c2 * a.C1_2 ** 2 / (2.0 * k_R) + a.C1_2 ** 2 / (2.0 * k_Omb)
            + kap2 * a.Z_max2 ** 2 / 2.0) if k_Omb > 0.0 else float("inf")
    C5 = C5_1 + C5_2

    M11 = 0.5 * np.array([[k_x, -m * c1], [-m * c1, m]])
    M12 = 0.5 * np.array([[k_x, m * c1], [m * c1, m]])
    M21 = 0.5 * np.array([[k_R, -c2 * lam_MJ], [-c2 * lam_MJ, lam_mJ]])
    M22 = 0.5 * np.array([[2.0 * k_R / (2.0 - a.psi1), c2 * lam_MJ],
                          [c2 * lam_MJ, lam_MJ]])

    N1 = np.array([
        [c1 * k_xb / 2.0, -k_xv / 2.0, -c1 * a.C4_1],
        [-k_xv / 2.0, k_vb / 2.0, -a.C4_1],
        [-c1 * a.C4_1, -a.C4_1, kap1],
    ])
    N2 = np.array([
        [c2 * k_R / 2.0, -k_ROm, -c2 * a.C4_2],
        [-k_ROm, k_Omb, -a.C4_2],
        [-c2 * a.C4_2, -a.C4_2, kap2],
    ])
    N3 = np.array([
        [c1 * k_xb / 2.0, -k_xv / 2.0, -c1 * a.B1],
        [-k_xv / 2.0, c1 * k_vb / 2.0, -(a.B1 + k_x * a.e_x_max)],
        [-c1 * a.B1, -(a.B1 + k_x * a.e_x_max), c2 * k_R / 2.0],
    ])

    # psi_2 in the primed matrices is undefined in the source; psi_1 is used
    psi2 = a.psi1
    g1 = min(gains.adapt1.gamma_w, gains.adapt1.gamma_v)
    g2 = min(gains.adapt2.gamma_w, gains.adapt2.gamma_v)
    N1p = np.array([
        [c2 * k_R / 2.0, m * c1, 0.0],
        [m * c1, m / 2.0, 0.0],
        [0.0, 0.0, 1.0 / g1],
    ])
    N2p = np.array([
        [1.0 / (2.0 - psi2), c2 * lam_MJ, 0.0],
        [c2 * lam_MJ, lam_MJ, 0.0],
        [0.0, 0.0, 1.0 / g2],
    ])
    N3p = np.diag([k_x / 2.0, m / 2.0, 1.0 / (2.0 - psi2)])

    matrices = {"M11": M11, "M12": M12, "M21": M21, "M22": M22,
                "N1": N1, "N2": N2, "N3": N3,
                "N1p": N1p, "N2p": N2p, "N3p": N3p}
    eigenvalues = {name: np.linalg.eigvalsh(M) for name, M in matrices.items()}
    verdicts = {name: bool(eigenvalues[name][0] > 0.0) for name in matrices}

    ratios = [eigenvalues["N1"][0] / eigenvalues["N1p"][-1],
              eigenvalues["N2"][0] / eigenvalues["N2p"][-1],
              eigenvalues["N3"][0] / eigenvalues["N3p"][-1]]
    nu = float(min(ratios))
    radius = C5 / nu if nu > 0.0 else float("inf")

    constants = {"beta": beta, "k_xb": k_xb, "k_vb": k_vb, "k_xv": k_xv,
                 "k_Omb": k_Omb, "k_ROm": k_ROm,
                 "C1_1": a.C1_1, "C2_1": a.C2_1, "C3_1": a.C3_1, "C4_1": a.C4_1,
                 "C1_2": a.C1_2, "C2_2": a.C2_2, "C3_2": a.C3_2, "C4_2": a.C4_2,
                 "C5_1": C5_1, "C5_2": C5_2, "C5": C5,
                 "lam_m_J": lam_mJ, "lam_M_J": lam_MJ}

    flags = ["psi2 undefined in source; psi1 substituted in primed matrices",
             "C5_2 built from C1_2 (printed subscript inconsistent with derivation)"]

    return LyapunovReport(
        matrices=matrices, eigenvalues=eigenvalues, verdicts=verdicts,
        constants=constants,
        c1_check=validate_c1(gains.c1, k_x, m),
        c2_check=validate_c2(gains.c2, k_R, J, a.psi1),
        nu=nu, C5=C5, radius=radius, flags=flags)


def nn_error_quadratic(W_tilde, V_tilde, gamma_w, gamma_v):
    """Weight-error storage term tr(W~^T W~)/(2 g_w) + tr(V~^T V~)/(2 g_v)."""
    return (float(np.sum(W_tilde * W_tilde)) / (2.0 * gamma_w)
            + float(np.sum(V_tilde * V_tilde)) / (2.0 * gamma_v))


def lyapunov_value(e_x, e_v, e_R, e_Omega, psi, gains, m, J,
                   nn_errors=None):
    """Lyapunov function pieces (V1, V2, V) at one error state.

    V1 = k_x/2 ||e_x||^2 + m/2 ||e_v||^2 + m c1 e_x . e_v (+ weight term)
    V2 = 1/2 e_Om . J e_Om + k_R psi + c2 e_R . J e_Om    (+ weight term)

    `nn_errors`, when the ideal weights are known (synthetic-truth mode), is
    ((W~1, V~1), (W~2, V~2)); omitted, the weight terms are dropped and the
    value covers tracking errors only.
    """
    e_x = np.asarray(e_x, float)
    e_v = np.asarray(e_v, float)
    e_R = np.asarray(e_R, float)
    e_Om = np.asarray(e_Omega, float)
    J = np.asarray(J, float)

    V01 = V02 = 0.0
    if nn_errors is not None:
        (W1t, V1t), (W2t, V2t) = nn_errors
        V01 = nn_error_quadratic(W1t, V1t, gains.adapt1.gamma_w, gains.adapt1.gamma_v)
        V02 = nn_error_quadratic(W2t, V2t, gains.adapt2.gamma_w, gains.adapt2.gamma_v)

    V1 = (0.5 * gains.k_x * e_x @ e_x + 0.5 * m * e_v @ e_v
          + m * gains.c1 * e_x @ e_v + V01)
    V2 = (0.5 * e_Om @ (J @ e_Om) + gains.k_R * psi
          + gains.c2 * e_R @ (J @ e_Om) + V02)
    return float(V1), float(V2), float(V1 + V2)


def ultimate_bound(nu, C5):
    """Radius C5 / nu of the residual set.

    Raises
    ------
    DegenerateNu
        If nu <= 0.
    """
    if nu <= 0.0:
        raise DegenerateNu(f"nu = {nu:.3e} is not positive")
    return C5 / nu


def set_d_functional(e_x, e_v, e_R, e_Omega, Z_tilde_sq1, Z_tilde_sq2,
                     gamma1, gamma2):
    """Weighted error norm whose sublevel set is the residual set.

    ||e_x||^2 + ||e_v||^2 + ||e_R||^2 + ||e_Om||^2
    + ||Z~1||^2 / gamma1 + ||Z~2||^2 / gamma2,

    with gamma_i = max of that network's two learning rates and
    ||Z~i||^2 = ||W~i||_F^2 + ||V~i||_F^2.
    """
    sq = (float(np.dot(e_x, e_x)) + float(np.dot(e_v, e_v))
          + float(np.dot(e_R, e_R)) + float(np.dot(e_Omega, e_Omega)))
    return sq + Z_tilde_sq1 / gamma1 + Z_tilde_sq2 / gamma2


def b3_diagnostic(e_x_norm, e_v_norm, e_v_dot_norm, k_x, k_v, B1, B2):
    """Instantaneous bound on the commanded-attitude axis rate.

    2 (k_x ||e_v|| + k_v ||e_v_dot|| + B2) / (k_x ||e_x|| + k_v ||e_v|| + B1).
    """
    return 2.0 * (k_x * e_v_norm + k_v * e_v_dot_norm + B2) \
        / (k_x * e_x_norm + k_v * e_v_norm + B1)


def thrust_mismatch_term(f, R, R_c):
    """Force component from imperfect attitude tracking.

    (f / (e3^T R_c^T R e3)) [ (e3^T R_c^T R e3) R e3 - R_c e3 ]; appears in
    the velocity-error equation and vanishes when R e3 aligns with R_c e3.
    """
    r3 = np.asarray(R, float)[:, 2]
    rc3 = np.asarray(R_c, float)[:, 2]
    align = float(rc3 @ r3)
    return (f / align) * (align * r3 - rc3)


def format_report(report, precision=6):
    """Render a report as structured 'key: value' text."""
    lines = []
    p = precision

    def fmt(x):
        return f"{x:.{p}g}"

    lines.append(f"c1_check: {'pass' if report.c1_check.passed else 'FAIL'} "
                 f"(value {fmt(report.c1_check.value)}, limit {fmt(report.c1_check.limit)})")
    lines.append(f"c2_check: {'pass' if report.c2_check.passed else 'FAIL'} "
                 f"(value {fmt(report.c2_check.value)}, limit {fmt(report.c2_check.limit)})")
    for name in sorted(report.verdicts):
        eig = report.eigenvalues[name]
        lines.append(f"{name}_positive_definite: {'pass' if report.verdicts[name] else 'FAIL'} "
                     f"(min_eig {fmt(eig[0])}, max_eig {fmt(eig[-1])})")
    for key in sorted(report.constants):
        lines.append(f"{key}: {fmt(report.constants[key])}")
    lines.append(f"nu: {fmt(report.nu)}")
    lines.append(f"C5: {fmt(report.C5)}")
    lines.append(f"bound_radius: {fmt(report.radius)}")
    if not math.isnan(report.V):
        lines.append(f"V1: {fmt(report.V1)}")
        lines.append(f"V2: {fmt(report.V2)}")
        lines.append(f"V: {fmt(report.V)}")
    for flag in report.flags:
        lines.append(f"note: {flag}")
    return "\n".join(lines)
