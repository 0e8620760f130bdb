"""Deterministic closed-loop contact simulator.

One scenario is one single-threaded fixed-step tick loop: trajectory sampling,
momentum-observer update, task-space impedance, per-body adaptive control,
semi-implicit Euler plant integration against a unilateral spring-damper
surface, and per-tick diagnostics.

Sign conventions: the environment state (`environment_force`) returns the
reaction wrench the surface applies on the robot tip; the logged and
estimated contact quantities (f_e, f_hat, f_tilde, f_ed) use the opposite,
robot-on-environment sense, which is the one the impedance law and the
rendered-stiffness metric are written in.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import adaptive, impedance, observer as observer_mod
from .model import (
    ManipulatorModel,
    chain_arrays,
    phi_to_pseudo,
    pseudo_to_phi,
    quaternion_from_matrix,
    regressor,
)
from ._core import kernels
from .trajectory import PoseTrajectory, PoseWaypoint


class DivergenceAbort(RuntimeError):
    """Plant state exceeded the configured rate bound."""

    def __init__(self, message, log=None, tick=None):
        super().__init__(message)
        self.log = log
        self.tick = tick


@dataclass
class Environment:
    """Planar unilateral spring-damper surface.

    `normal` is the outward unit normal of the surface (pointing into the
    robot's free half-space); the tip is in contact when normal . p < offset.
    `inertia` is carried for completeness of the impedance triple but the
    force law realizes the zero-inertia case (tip acceleration is not an
    input here).
    """

    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, -1.0, 0.0]))
    offset: float = 0.0
    stiffness: float = 1e5
    damping: float = 1e3
    inertia: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            raise ValueError("surface normal must be nonzero")
        self.normal = n / norm
        if min(self.stiffness, self.damping, self.inertia) < 0.0:
            raise ValueError("environment parameters must be non-negative")


def environment_force(env: Environment, tip_position, tip_velocity):
    """Reaction wrench on the robot tip, world coordinates.

    Zero when not penetrating; otherwise the spring-damper law acts along the
    outward normal with a unilateral clamp (pull-off never produces adhesion).
    """
    p = np.asarray(tip_position, dtype=float)
    v = np.asarray(tip_velocity, dtype=float)
    depth = env.offset - float(env.normal @ p)
    if depth <= 0.0:
        return np.zeros(6), 0.0
    rate = -float(env.normal @ v)  # positive while penetrating deeper
    magnitude = env.stiffness * depth + env.damping * rate
    magnitude = max(magnitude, 0.0)
    wrench = np.concatenate([magnitude * env.normal, np.zeros(3)])
    return wrench, depth


def vpf(v_required, v_actual, f_required, f_actual):
    """Virtual power flow: (v_r - v) . (f_r - f) in one common frame."""
    dv = np.asarray(v_required, dtype=float) - np.asarray(v_actual, dtype=float)
    df = np.asarray(f_required, dtype=float) - np.asarray(f_actual, dtype=float)
    return float(dv @ df)


def tip_vpf_terms(e_pose, e_rate, stiffness, damping, gamma, sigma):
    """Tip virtual power flow from the gain-consistency expansion.

    Substituting the rendered impedance relation into the tip VPF leaves four
    quadratic forms whose coefficient matrices vanish exactly when
    gamma = K_d D_d^-1 and sigma = D_d^-1.  Returns (p_t, scale) where
    `scale` sums the magnitudes of the constituent forms before cancellation.
    """
    a = np.asarray(e_rate, dtype=float).reshape(6)
    b = np.asarray(e_pose, dtype=float).reshape(6)
    K = np.diag(np.asarray(stiffness, dtype=float))
    D = np.diag(np.asarray(damping, dtype=float))
    G = np.asarray(gamma, dtype=float)
    S = np.asarray(sigma, dtype=float)
    DSD = D @ S @ D
    KSK = K @ S @ K
    DSK = D @ S @ K
    KSD = K @ S @ D
    GtK = G.T @ K
    GtD = G.T @ D
    terms = (
        a @ (DSD @ a) - a @ (D @ a),
        b @ (KSK @ b) - b @ (GtK @ b),
        a @ (DSK @ b) - a @ (K @ b),
        b @ (KSD @ a) - b @ (GtD @ a),
    )
    pieces = (
        abs(a @ (DSD @ a)),
        abs(a @ (D @ a)),
        abs(b @ (KSK @ b)),
        abs(b @ (GtK @ b)),
        abs(a @ (DSK @ b)),
        abs(a @ (K @ b)),
        abs(b @ (KSD @ a)),
        abs(b @ (GtD @ a)),
    )
    return float(sum(terms)), float(sum(pieces))


def lemma1_check(p_t_column, scale_column):
    """Max |p_T| over a run and the run power scale, from logged columns."""
    p = np.asarray(p_t_column, dtype=float)
    s = np.asarray(scale_column, dtype=float)
    return float(np.max(np.abs(p))) if p.size else 0.0, float(np.max(s)) if s.size else 0.0


def accompanying_function(m_tool, verr, gamma, l_true, l_hat, net: adaptive.RbfNetwork):
    """Four-term storage function for the tool body.

    Quadratic velocity-error term, the scaled log-det divergence between the
    true and estimated pseudo-inertia, and the estimator quadratics (the ideal
    weights/bias are zero in a disturbance-free run, so the estimation errors
    reduce to the estimates themselves).
    """
    verr = np.asarray(verr, dtype=float).reshape(6)
    quad = 0.5 * float(verr @ np.asarray(m_tool, dtype=float) @ verr)
    breg = gamma * adaptive.bregman_divergence(l_true, l_hat)
    w_term = 0.5 * float(np.sum(net.weights**2)) / net.weight_gain
    e_term = 0.5 * float(net.bias @ net.bias) / net.bias_gain
    return quad + breg + w_term + e_term


@dataclass
class BodyControlConfig:
    """Per-body feedback gains and which bodies adapt."""

    feedback_gains: np.ndarray = None  # (n,) scalars -> K_i = k_i I6
    adapt_tool: bool = True
    tool_underestimate: float = 0.5  # fraction of true phi used at t0
    rbf_enabled: bool = True


@dataclass
class AdaptationConfig:
    gamma: float = 500.0
    gamma0: float = 1e-3
    weight_gain: float = 300.0
    bias_gain: float = 10.0
    weight_leak: float = 1e-3
    bias_leak: float = 1e-3
    n_centers: int = 32
    velocity_envelope: float = 1.0  # half-width of the RBF input box


@dataclass
class DisturbanceSpec:
    """Band-limited smooth random wrench injected on the tool body."""

    amplitude: float = 0.0
    bandwidth_hz: float = 2.0
    components: int = 4

    def realize(self, seed):
        if self.amplitude <= 0.0:
            return None
        rng = np.random.default_rng(seed)
        freqs = rng.uniform(0.1, self.bandwidth_hz, size=(self.components, 6))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=(self.components, 6))
        amps = rng.uniform(0.3, 1.0, size=(self.components, 6))
        amps *= self.amplitude / np.sum(amps, axis=0)

        def wrench(t):
            return np.sum(amps * np.sin(2.0 * np.pi * freqs * t + phases), axis=0)

        return wrench


@dataclass
class ControllerConfig:
    spec: impedance.ImpedanceSpec
    gamma_scale: float = 1.0
    sigma_override: np.ndarray = None  # decouples Sigma from D_d^-1 for sweeps
    mode: str = "task_impedance"  # or "joint_pd" (oracle scenarios)
    joint_kp: float = 200.0
    joint_kd: float = 50.0
    joint_setpoint: np.ndarray = None
    joint_wobble_amp: float = 0.0  # sinusoidal setpoint modulation, rad
    joint_wobble_hz: float = 0.0
    n_contact_map: np.ndarray = None  # defaults to identity


@dataclass
class ScenarioSettings:
    dt: float = 1e-3
    duration: float = 5.0
    seed: int = 0
    rate_abort: float = 20.0
    integrator: str = "semi_implicit"  # or "rk4"
    log_every: int = 1
    name: str = "scenario"


class SimLog:
    """Column-oriented run log with a frozen, versioned column order."""

    FORMAT_VERSION = 1

    def __init__(self, n_joints):
        self.n = n_joints
        self.columns = (
            ["t"]
            + [f"q{i+1}" for i in range(n_joints)]
            + [f"qd{i+1}" for i in range(n_joints)]
            + ["x", "y", "z", "quat_w", "quat_x", "quat_y", "quat_z"]
            + [f"xdot{i+1}" for i in range(6)]
            + ["ep_x", "ep_y", "ep_z", "eo_x", "eo_y", "eo_z"]
            + [f"r{i+1}" for i in range(n_joints)]
            + [f"fhat{i+1}" for i in range(6)]
            + [f"ftilde{i+1}" for i in range(6)]
            + [f"fe{i+1}" for i in range(6)]
            + ["impact", "p_t", "p_t_scale", "nu1"]
            + [f"tau{i+1}" for i in range(n_joints)]
            + ["penetration", "kinetic_energy"]
        )
        self.rows = []

    def append(self, values):
        if len(values) != len(self.columns):
            raise ValueError("log row width mismatch")
        self.rows.append(np.asarray(values, dtype=float))

    def as_array(self):
        return np.vstack(self.rows) if self.rows else np.empty((0, len(self.columns)))

    def column(self, name):
        return self.as_array()[:, self.columns.index(name)]

    def write_csv(self, stream_or_path):
        def _write(fh):
            fh.write(f"# plucksim log v{self.FORMAT_VERSION} joints={self.n}\n")
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

        if isinstance(stream_or_path, io.TextIOBase):
            _write(stream_or_path)
        else:
            with open(stream_or_path, "w") as fh:
                _write(fh)

    @classmethod
    def read_csv(cls, path):
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("# plucksim log"):
                raise ValueError("not a plucksim log file")
            n = int(header.rsplit("joints=", 1)[1])
            names = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        log = cls(n)
        if names != log.columns:
            raise ValueError("log column layout does not match this version")
        log.rows = [row for row in data]
        return log


class Simulator:
    """Owns the full closed loop for one scenario."""

    def __init__(self, model: ManipulatorModel, trajectory: PoseTrajectory, env: Environment | None,
                 controller: ControllerConfig, body_control: BodyControlConfig,
                 adaptation: AdaptationConfig, observer_config: observer_mod.ObserverConfig,
                 settings: ScenarioSettings, q0=None, qd0=None, disturbance: DisturbanceSpec | None = None):
        self.model = model
        self.arr = chain_arrays(model)
        self.traj = trajectory
        self.env = env
        self.ctrl = controller
        self.body_ctrl = body_control
        self.adapt_cfg = adaptation
        self.obs_cfg = observer_config
        self.settings = settings
        self.q = np.zeros(model.dof) if q0 is None else np.asarray(q0, dtype=float).copy()
        self.qd = np.zeros(model.dof) if qd0 is None else np.asarray(qd0, dtype=float).copy()
        self.disturbance = (disturbance or DisturbanceSpec()).realize(settings.seed)

        n = model.dof
        if body_control.feedback_gains is None:
            gains = np.full(n, 50.0)
        else:
            gains = np.asarray(body_control.feedback_gains, dtype=float).reshape(n)
        self.body_gains = gains

        self.gains = impedance.derive_gains(controller.spec)
        self.gamma_eff = controller.gamma_scale * self.gains.gamma
        if controller.sigma_override is None:
            self.sigma_eff = self.gains.sigma
        else:
            self.sigma_eff = np.diag(np.asarray(controller.sigma_override, dtype=float).reshape(6))
        self.n_c = np.eye(6) if controller.n_contact_map is None else np.asarray(controller.n_contact_map)

        self.observer = observer_mod.MomentumObserver(n, observer_config)
        self.phi_true = np.array([b.as_vector() for b in model.bodies])

        # adaptive state for the tool body
        self.l_true = phi_to_pseudo(model.bodies[-1])
        if body_control.adapt_tool:
            phi0 = self.phi_true[-1] * (1.0 - body_control.tool_underestimate)
            from .model import InertialParams, consistency_check

            ok, _ = consistency_check(InertialParams.from_vector(phi0))
            if not ok:
                raise ValueError("underestimated tool parameters are not physically consistent")
            self.nal = adaptive.NalState(
                phi_to_pseudo(InertialParams.from_vector(phi0)),
                gamma=adaptation.gamma,
                gamma0=adaptation.gamma0,
            )
        else:
            self.nal = None
        env_half = adaptation.velocity_envelope
        self.rbf = adaptive.RbfNetwork.lattice(
            low=-env_half * np.ones(12),
            high=env_half * np.ones(12),
            n_centers=adaptation.n_centers,
            weight_gain=adaptation.weight_gain,
            bias_gain=adaptation.bias_gain,
            weight_leak=adaptation.weight_leak,
            bias_leak=adaptation.bias_leak,
        )

        self._qdr_prev = None
        self._quat_prev = None
        self.log = SimLog(n)

    # -- per-tick pieces -------------------------------------------------

    def _measure(self, t):
        R_w, p_w, tool = kernels.fk(self.arr, self.q)
        J = kernels.jacobian(self.arr, self.q)
        quat = quaternion_from_matrix(R_w[-1])
        if self._quat_prev is not None and float(quat @ self._quat_prev) < 0.0:
            quat = -quat
        self._quat_prev = quat
        xdot = J @ self.qd
        return R_w, p_w, tool, J, quat, xdot

    def _task_errors(self, t, tool, quat, xdot):
        p_d, quat_d, xdot_d, _ = self.traj.sample(t)
        q_m = quat if float(quat @ quat_d) >= 0.0 else -quat
        e_o = impedance.quaternion_error(q_m[0], q_m[1:], quat_d[0], quat_d[1:])
        e = np.concatenate([p_d - tool, e_o])
        edot = xdot_d - xdot
        return p_d, quat_d, xdot_d, e, edot

    def _controller(self, t, J, e, edot, xdot_d, f_push_tilde, R_w, p_w, tool, dt):
        """Returns joint torques and diagnostic intermediates."""
        spec = self.ctrl.spec
        if self.ctrl.mode == "joint_pd":
            setpoint = np.asarray(self.ctrl.joint_setpoint, dtype=float)
            if self.ctrl.joint_wobble_amp:
                # raised-cosine modulation: starts at rest with zero slope
                setpoint = setpoint + 0.5 * self.ctrl.joint_wobble_amp * (
                    1.0 - np.cos(2.0 * np.pi * self.ctrl.joint_wobble_hz * t)
                )
            tau_pd = self.ctrl.joint_kp * (setpoint - self.q) - self.ctrl.joint_kd * self.qd
            tau_g, _ = kernels.rnea(self.arr, self.q, np.zeros(self.model.dof), np.zeros(self.model.dof), self.model.gravity)
            return tau_pd + tau_g, np.zeros(6), np.zeros(6), np.zeros((self.model.dof, 6))

        xdot_r = impedance.required_cartesian_velocity(
            xdot_d, e, spec.f_desired, f_push_tilde, self.gamma_eff, self.sigma_eff
        )
        qdot_r, _ = impedance.required_joint_velocity(J, xdot_r)
        if self._qdr_prev is None:
            qddot_r = np.zeros_like(qdot_r)
        else:
            qddot_r = (qdot_r - self._qdr_prev) / dt
        self._qdr_prev = qdot_r.copy()

        V, _ = kernels.vel_acc(self.arr, self.q, self.qd, np.zeros(self.model.dof))
        V_r, A_r = kernels.vel_acc(self.arr, self.q, qdot_r, qddot_r)

        n = self.model.dof
        f_star_r = np.empty((n, 6))
        verr_tool = V_r[-1] - V[-1]
        for i in range(n):
            g_i = R_w[i].T @ self.model.gravity
            Y = regressor(A_r[i], V_r[i], V[i], g_i)
            if i == n - 1 and self.nal is not None:
                phi_hat = pseudo_to_phi(self.nal.pseudo).as_vector()
            else:
                phi_hat = self.phi_true[i]
            wrench = Y @ phi_hat + self.body_gains[i] * (V_r[i] - V[i])
            if i == n - 1 and self.body_ctrl.rbf_enabled:
                psi = adaptive.rbf_eval(self.rbf, np.concatenate([V[-1], verr_tool]))
                wrench = wrench + adaptive.uncertainty_estimate(self.rbf, psi)
                adaptive.adapt_step(self.rbf, psi, verr_tool, dt)
            f_star_r[i] = wrench

        if self.nal is not None:
            g_tool = R_w[-1].T @ self.model.gravity
            Y_tool = regressor(A_r[-1], V_r[-1], V[-1], g_tool)
            S = adaptive.build_S(Y_tool, verr_tool)
            adaptive.nal_step(self.nal, S, dt)

        tau = self._project_chain(f_star_r, spec.f_desired, R_w, p_w, tool)
        return tau, xdot_r, verr_tool, V_r

    def _project_chain(self, f_star_r, f_ed_push, R_w, p_w, tool):
        """Accumulate required cutting-point wrenches tip-to-base.

        The tool body's wrench adds the image of the desired push on the
        environment; each joint torque is the screw projection of its
        cutting-point wrench.
        """
        n = self.model.dof
        arr = self.arr
        Rs, rs = kernels.joint_local(arr, self.q)
        tau = np.zeros(n)
        w = np.zeros(6)
        for i in range(n - 1, -1, -1):
            if i == n - 1:
                f_local = R_w[i].T @ f_ed_push[:3]
                m_local = R_w[i].T @ (f_ed_push[3:] + np.cross(tool - p_w[i], f_ed_push[:3]))
                w = f_star_r[i] + np.concatenate([f_local, m_local])
            else:
                f = Rs[i + 1] @ w[:3]
                m = Rs[i + 1] @ w[3:] + np.cross(rs[i + 1], f)
                w = f_star_r[i] + np.concatenate([f, m])
            tau[i] = arr.screws[i] @ w
        return tau

    # -- main loop --------------------------------------------------------

    def run(self, raise_on_divergence=True):
        dt = self.settings.dt
        n_ticks = int(round(self.settings.duration / dt)) + 1
        n = self.model.dof
        aborted_at = None
        for k in range(n_ticks):
            t = k * dt
            R_w, p_w, tool, J, quat, xdot = self._measure(t)
            p_d, quat_d, xdot_d, e, edot = self._task_errors(t, tool, quat, xdot)

            f_react, depth = (
                environment_force(self.env, tool, xdot[:3]) if self.env is not None else (np.zeros(6), 0.0)
            )
            f_push_true = -f_react
            f_push_tilde = -self.observer.f_tilde

            tau, xdot_r, verr_tool, V_r = self._controller(
                t, J, e, edot, xdot_d, f_push_tilde, R_w, p_w, tool, dt
            )

            tau_ext = J.T @ f_react
            if self.disturbance is not None:
                B = kernels.body_jacobians(self.arr, self.q)
                tau_ext = tau_ext + B[-1].T @ self.disturbance(t)

            bias, _ = kernels.rnea(self.arr, self.q, self.qd, np.zeros(n), self.model.gravity)
            M_joint = kernels.mass_matrix(self.arr, self.q)
            qdd = np.linalg.solve(M_joint, tau + tau_ext - bias)

            H, F, V = kernels.observer_terms(self.arr, self.q, self.qd, qdd, self.model.gravity, f_react)
            self.observer.step(H, F, self.arr.screws, J, dt)

            p_t, p_scale = tip_vpf_terms(
                e, edot, self.ctrl.spec.stiffness, self.ctrl.spec.damping, self.gamma_eff, self.sigma_eff
            )
            if self.nal is not None:
                m_tool = self.model.bodies[-1].spatial_inertia().matrix
                nu1 = accompanying_function(m_tool, verr_tool, self.adapt_cfg.gamma, self.l_true, self.nal.pseudo, self.rbf)
            else:
                nu1 = 0.0
            energy = 0.5 * float(self.qd @ M_joint @ self.qd)

            if k % self.settings.log_every == 0 or k == n_ticks - 1:
                row = np.concatenate(
                    [
                        [t],
                        self.q,
                        self.qd,
                        tool,
                        quat,
                        xdot,
                        e,
                        self.observer.joint_residual,
                        -self.observer.f_hat,
                        -self.observer.f_tilde,
                        f_push_true,
                        [1.0 if self.observer.impact else 0.0, p_t, p_scale, nu1],
                        tau,
                        [depth, energy],
                    ]
                )
                self.log.append(row)

            if self.settings.integrator == "rk4":
                self._rk4_step(tau, dt)
            else:
                # semi-implicit Euler: rates first, then positions
                self.qd = self.qd + dt * qdd
                self.q = self.q + dt * self.qd

            if np.linalg.norm(self.qd) > self.settings.rate_abort:
                aborted_at = k
                if raise_on_divergence:
                    raise DivergenceAbort(
                        f"joint rate {np.linalg.norm(self.qd):.2f} rad/s exceeded bound at t={t:.3f}",
                        log=self.log,
                        tick=k,
                    )
                break
        return self.log, aborted_at


    def _plant_accel(self, q, qd, tau):
        """Forward dynamics at an arbitrary state with the torque held."""
        n = self.model.dof
        R_w, p_w, tool = kernels.fk(self.arr, q)
        J = kernels.jacobian(self.arr, q)
        f_react, _ = environment_force(self.env, tool, (J @ qd)[:3]) if self.env is not None else (np.zeros(6), 0.0)
        tau_ext = J.T @ f_react
        bias, _ = kernels.rnea(self.arr, q, qd, np.zeros(n), self.model.gravity)
        M_joint = kernels.mass_matrix(self.arr, q)
        return np.linalg.solve(M_joint, tau + tau_ext - bias)

    def _rk4_step(self, tau, dt):
        """Classic RK4 on (q, qd) with a zero-order hold on the command."""
        q0, qd0 = self.q, self.qd
        k1q, k1v = qd0, self._plant_accel(q0, qd0, tau)
        k2q, k2v = qd0 + 0.5 * dt * k1v, self._plant_accel(q0 + 0.5 * dt * k1q, qd0 + 0.5 * dt * k1v, tau)
        k3q, k3v = qd0 + 0.5 * dt * k2v, self._plant_accel(q0 + 0.5 * dt * k2q, qd0 + 0.5 * dt * k2v, tau)
        k4q, k4v = qd0 + dt * k3v, self._plant_accel(q0 + dt * k3q, qd0 + dt * k3v, tau)
        self.q = q0 + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        self.qd = qd0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)


def metrics(log: SimLog, stiffness=None, f_desired=None, contact_axis=None, steady_window=0.2):
    """Run summary: tracking RMS, the rho index, peak forces, rendered stiffness."""
    data = log.as_array()
    if data.shape[0] == 0:
        raise ValueError("empty log")
    ep = np.stack([log.column("ep_x"), log.column("ep_y"), log.column("ep_z")], axis=1)
    eo = np.stack([log.column("eo_x"), log.column("eo_y"), log.column("eo_z")], axis=1)
    xdot = np.stack([log.column(f"xdot{i+1}") for i in range(3)], axis=1)
    fhat = np.stack([log.column(f"fhat{i+1}") for i in range(3)], axis=1)
    fe = np.stack([log.column(f"fe{i+1}") for i in range(3)], axis=1)

    pos_err = np.linalg.norm(ep, axis=1)
    ori_err = np.linalg.norm(eo, axis=1)
    speed = np.linalg.norm(xdot, axis=1)
    max_err = float(np.max(pos_err))
    max_speed = float(np.max(speed))
    rho = max_err / max_speed if max_speed > 0.0 else 0.0

    out = {
        "rms_position_error_m": float(np.sqrt(np.mean(pos_err**2))),
        "rms_orientation_error": float(np.sqrt(np.mean(ori_err**2))),
        "max_position_error_m": max_err,
        "max_speed_m_per_s": max_speed,
        "rho_s": float(rho),
        "peak_force_est_n": float(np.max(np.linalg.norm(fhat, axis=1))),
        "peak_force_true_n": float(np.max(np.linalg.norm(fe, axis=1))),
        "max_abs_p_t": float(np.max(np.abs(log.column("p_t")))),
        "p_t_power_scale": float(np.max(log.column("p_t_scale"))),
        "nu1_start": float(log.column("nu1")[0]),
        "nu1_end": float(log.column("nu1")[-1]),
        "impact_detected": bool(np.any(log.column("impact") > 0.5)),
    }

    if stiffness is not None and contact_axis is not None:
        axis = int(contact_axis)
        n_rows = data.shape[0]
        w = max(1, int(steady_window * n_rows))
        f_line = fhat[:, axis][-w:]
        e_line = ep[:, axis][-w:]
        f_d = 0.0 if f_desired is None else float(np.asarray(f_desired)[axis])
        denom = float(np.mean(e_line))
        rendered = (float(np.mean(f_line)) - f_d) / denom if abs(denom) > 1e-12 else float("nan")
        out["rendered_stiffness_n_per_m"] = rendered
        k_target = float(np.asarray(stiffness)[axis])
        out["rendered_stiffness_rel_err"] = abs(rendered - k_target) / k_target
    return out
