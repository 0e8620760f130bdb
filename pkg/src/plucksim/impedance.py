"""Task-space impedance law with quaternion pose error.

The realized behaviour renders D_d (xdot_d - xdot) + K_d (x_d - x) =
-(f_ed - f_e) by commanding a required Cartesian velocity; the desired
inertia matrix is accepted for forward compatibility but not used.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .spatial import SpatialForceVector, SpatialMotionVector, SpatialTransform, skew, transform_force


@dataclass
class ImpedanceSpec:
    """Desired impedance: diagonal stiffness/damping plus a contact setpoint."""

    stiffness: np.ndarray
    damping: np.ndarray
    inertia: np.ndarray = field(default_factory=lambda: np.zeros(6))
    f_desired: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        self.stiffness = np.asarray(self.stiffness, dtype=float).reshape(6)
        self.damping = np.asarray(self.damping, dtype=float).reshape(6)
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(6)
        self.f_desired = np.asarray(self.f_desired, dtype=float).reshape(6)
        if np.any(self.stiffness <= 0.0) or np.any(self.damping <= 0.0):
            raise ValueError("stiffness and damping diagonals must be positive")


@dataclass(frozen=True)
class DerivedGains:
    """Gamma = K_d D_d^-1 and Sigma = D_d^-1 as 6x6 matrices."""

    gamma: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class PoseError:
    position: np.ndarray
    orientation: np.ndarray

    def as_array(self):
        return np.concatenate([self.position, self.orientation])


def quaternion_error(eta, eps, eta_d, eps_d):
    """Orientation error eta eps_d - eta_d eps - eps_d x eps.

    Zero exactly when the two quaternions describe the same rotation, for
    either sign of either quaternion.  Non-unit inputs are normalized with a
    warning.
    """
    eps = np.asarray(eps, dtype=float).reshape(3)
    eps_d = np.asarray(eps_d, dtype=float).reshape(3)
    n = float(np.sqrt(eta * eta + eps @ eps))
    n_d = float(np.sqrt(eta_d * eta_d + eps_d @ eps_d))
    if abs(n - 1.0) > 1e-10 or abs(n_d - 1.0) > 1e-10:
        warnings.warn("quaternion_error: normalizing non-unit quaternion input")
        eta, eps = eta / n, eps / n
        eta_d, eps_d = eta_d / n_d, eps_d / n_d
    return eta * eps_d - eta_d * eps - skew(eps_d) @ eps


def derive_gains(spec: ImpedanceSpec) -> DerivedGains:
    """Impedance-consistent velocity gains from the diagonal spec."""
    if np.any(np.abs(spec.damping) < 1e-300):
        raise ValueError("damping must be invertible")
    sigma = np.diag(1.0 / spec.damping)
    gamma = np.diag(spec.stiffness) @ sigma
    return DerivedGains(gamma=gamma, sigma=sigma)


def required_cartesian_velocity(xdot_d, error: PoseError | np.ndarray, f_desired, f_filtered, gamma, sigma):
    """Reference velocity xdot_d + Gamma e + Sigma (f_ed - f_tilde)."""
    e = error.as_array() if isinstance(error, PoseError) else np.asarray(error, dtype=float).reshape(6)
    return (
        np.asarray(xdot_d, dtype=float).reshape(6)
        + np.asarray(gamma, dtype=float) @ e
        + np.asarray(sigma, dtype=float) @ (np.asarray(f_desired, dtype=float) - np.asarray(f_filtered, dtype=float))
    )


def required_joint_velocity(J, xdot_r, damping_scale=1e-3, cond_threshold=1e8):
    """Damped least-squares inverse of the task Jacobian.

    Near singularities the damping lambda = damping_scale * sigma_max bounds
    the commanded rates; `degraded` reports that the damped branch fired.
    Returns (qdot_r, degraded).
    """
    J = np.asarray(J, dtype=float)
    xdot_r = np.asarray(xdot_r, dtype=float)
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    degraded = bool(s[0] <= 0.0 or s[-1] < s[0] / cond_threshold)
    if degraded:
        lam = damping_scale * s[0]
        s_inv = s / (s * s + lam * lam)
    else:
        s_inv = 1.0 / s
    return Vt.T @ (s_inv * (U.T @ xdot_r)), degraded


def tool_frame_targets(xdot_r, f_desired, n_c, u_tip_body: SpatialTransform):
    """Required twists at the tip and tool-body frames and the tip wrench.

    `n_c` maps the 6-vector task velocity to the tip twist and must satisfy
    n_c^T n_c = I; `u_tip_body` is the wrench map from the tool body frame to
    the tip frame, whose transpose carries the tip twist into body
    coordinates.  Returns (v_r_tip, v_r_body, f_r_tip).
    """
    n_c = np.asarray(n_c, dtype=float)
    if np.max(np.abs(n_c.T @ n_c - np.eye(6))) > 1e-9:
        raise ValueError("contact map must be orthonormal (n_c^T n_c = I)")
    v_tip = n_c @ np.asarray(xdot_r, dtype=float).reshape(6)
    f_tip = n_c @ np.asarray(f_desired, dtype=float).reshape(6)
    R = u_tip_body.rotation
    r = u_tip_body.offset
    lin = R.T @ v_tip[:3] - R.T @ skew(r) @ v_tip[3:]
    ang = R.T @ v_tip[3:]
    v_body = np.concatenate([lin, ang])
    return v_tip, v_body, f_tip


def impedance_residual(edot, e, f_desired, f_contact, damping, stiffness):
    """Diagnostic D_d edot + K_d e + (f_ed - f_e); zero when rendered."""
    e = e.as_array() if isinstance(e, PoseError) else np.asarray(e, dtype=float).reshape(6)
    edot = np.asarray(edot, dtype=float).reshape(6)
    return (
        np.asarray(damping, dtype=float) * edot
        + np.asarray(stiffness, dtype=float) * e
        + (np.asarray(f_desired, dtype=float) - np.asarray(f_contact, dtype=float))
    )
