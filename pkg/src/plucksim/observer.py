"""Generalized-momentum disturbance observer on per-body Plucker momenta.

Each joint frame carries a first-order residual loop driven by the body's
momentum and a model-side force term; the joint screws project the per-body
residuals to a joint-space vector, and the transposed-Jacobian pseudo-inverse
reconstructs the tip wrench.  No acceleration measurement is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spatial import SpatialForceVector, SpatialInertia, SpatialMotionVector, _check_frames, motion_cross


@dataclass
class ObserverConfig:
    """Gains for the residual loop, impact detector and force filter.

    `gain` is the diagonal of the per-body residual gain (1/s), `impact_threshold`
    the joint-residual norm that raises the impact flag, `filter_gain` the
    diagonal of the first-order force filter (1/s).
    """

    gain: np.ndarray = field(default_factory=lambda: np.full(6, 100.0))
    impact_threshold: float = 50.0
    filter_gain: np.ndarray = field(default_factory=lambda: np.full(6, 200.0))
    pinv_rel_cutoff: float = 1e-8
    hysteresis: float = 0.8

    def __post_init__(self):
        self.gain = np.asarray(self.gain, dtype=float).reshape(6)
        self.filter_gain = np.asarray(self.filter_gain, dtype=float).reshape(6)
        if np.any(self.gain <= 0.0) or np.any(self.filter_gain <= 0.0):
            raise ValueError("observer gains must be positive")
        if self.impact_threshold <= 0.0:
            raise ValueError("impact threshold must be positive")


def body_force_term(M: SpatialInertia, v: SpatialMotionVector, f_star: SpatialForceVector,
                    coriolis=None, gravity_term: SpatialForceVector | None = None):
    """Model-side force feeding the residual integral for one body.

    Computes f_star - [(v x)^T M + M (v x)] v - (C v + G) with the quantities
    expressed in a static coordinate frame.  `coriolis` is the 6x6 Coriolis
    matrix; when omitted the gyroscopic factorization -(v x)^T M is used.
    """
    _check_frames(M.frame, v.frame, "body_force_term")
    _check_frames(f_star.frame, v.frame, "body_force_term")
    va = v.as_array()
    vx = motion_cross(va)
    C = -vx.T @ M.matrix if coriolis is None else np.asarray(coriolis, dtype=float)
    out = f_star.as_array() - (vx.T @ M.matrix + M.matrix @ vx) @ va - C @ va
    if gravity_term is not None:
        _check_frames(gravity_term.frame, v.frame, "body_force_term")
        out -= gravity_term.as_array()
    return SpatialForceVector.from_array(out, v.frame)


def residual_step(residual, integral, h_now, h_zero, f_prev, f_now, gain, dt):
    """One trapezoidal update of the residual loop for one body.

    State is (residual, accumulated integral); `f_prev`/`f_now` are the force
    term at the previous and current tick.  The update solves the implicit
    trapezoidal rule for R = K(H - H0 - int(F + R)), which keeps the loop
    stable for stiff gains.  Returns (residual, integral).
    """
    k = np.asarray(gain, dtype=float)
    half = 0.5 * dt
    rhs = h_now - h_zero - integral - half * (f_prev + f_now + residual)
    new_res = k * rhs / (1.0 + half * k)
    new_int = integral + half * (f_prev + f_now + residual + new_res)
    return new_res, new_int


def project_to_joint(screws, residuals):
    """Joint residual r_i = s_i . R_i for per-joint screws and residuals."""
    return np.array([np.asarray(s, dtype=float) @ np.asarray(r, dtype=float) for s, r in zip(screws, residuals)])


def reconstruct_wrench(J, r, rel_cutoff=1e-8):
    """Tip wrench estimate (J^T)^+ r with relative SVD truncation.

    Returns (f_hat, degraded): `degraded` flags that singular values were
    truncated, which signals operation near a singular configuration.
    """
    J = np.asarray(J, dtype=float)
    r = np.asarray(r, dtype=float)
    U, s, Vt = np.linalg.svd(J.T, full_matrices=False)
    keep = s > rel_cutoff * s[0] if s[0] > 0.0 else np.zeros_like(s, dtype=bool)
    degraded = bool(np.any(~keep))
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    f_hat = Vt.T @ (s_inv * (U.T @ r))
    return f_hat, degraded


def detect_impact(r, threshold, latched=False, hysteresis=0.8):
    """Threshold detector on ||r|| with a hysteresis exit band."""
    n = float(np.linalg.norm(np.asarray(r, dtype=float)))
    if latched:
        return n >= hysteresis * threshold
    return n > threshold


def filter_force_step(filtered, f_prev, f_now, filter_gain, dt):
    """Trapezoidal step of the first-order force filter df/dt + C f = C f_hat."""
    c = np.asarray(filter_gain, dtype=float)
    half = 0.5 * dt
    return ((1.0 - half * c) * filtered + half * c * (f_prev + f_now)) / (1.0 + half * c)


class MomentumObserver:
    """Streaming observer over all bodies of one chain.

    Owns per-body residual loops (vectorized over bodies), the filtered tip
    wrench and the latched impact flag.  The caller feeds, per tick, the
    per-body momenta (n x 6), the per-body force terms (n x 6), the joint
    Jacobian, and the per-joint screw axes.
    """

    def __init__(self, n_bodies, config: ObserverConfig | None = None):
        self.config = config or ObserverConfig()
        self.n = n_bodies
        self.residual = np.zeros((n_bodies, 6))
        self.integral = np.zeros((n_bodies, 6))
        self._h0 = None
        self._f_prev = None
        self.f_hat = np.zeros(6)
        self.f_tilde = np.zeros(6)
        self._fhat_prev = np.zeros(6)
        self.impact = False
        self.degraded = False
        self.joint_residual = np.zeros(n_bodies)

    def step(self, h_bodies, f_bodies, screws, J, dt):
        h = np.asarray(h_bodies, dtype=float).reshape(self.n, 6)
        f = np.asarray(f_bodies, dtype=float).reshape(self.n, 6)
        if self._h0 is None:
            # priming tick: residual starts at zero with H(t0) recorded
            self._h0 = h.copy()
            self._f_prev = f.copy()
        else:
            k = self.config.gain
            half = 0.5 * dt
            rhs = h - self._h0 - self.integral - half * (self._f_prev + f + self.residual)
            new_res = k * rhs / (1.0 + half * k)
            self.integral += half * (self._f_prev + f + self.residual + new_res)
            self.residual = new_res
            self._f_prev = f.copy()

        self.joint_residual = np.einsum("ij,ij->i", np.asarray(screws, dtype=float), self.residual)
        if J is not None:
            self.f_hat, self.degraded = reconstruct_wrench(J, self.joint_residual, self.config.pinv_rel_cutoff)
            self.f_tilde = filter_force_step(self.f_tilde, self._fhat_prev, self.f_hat, self.config.filter_gain, dt)
            self._fhat_prev = self.f_hat.copy()
        self.impact = detect_impact(
            self.joint_residual, self.config.impact_threshold, self.impact, self.config.hysteresis
        )
        return self.joint_residual
