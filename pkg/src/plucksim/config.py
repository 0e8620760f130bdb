"""Declarative model and scenario files.

Both file kinds are YAML with explicit units in key names and a
`schema_version` field.  Loader errors carry the file, the offending key path
and, for parse errors, the line number.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import yaml

from . import impedance, observer, simulate
from .model import InertialParams, JointSpec, ManipulatorModel, forward_kinematics, rpy_to_matrix
from .spatial import SpatialTransform, UnitScrew
from .trajectory import PoseTrajectory, PoseWaypoint

MODEL_SCHEMA_VERSION = 1
SCENARIO_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed model/scenario file; message carries file and key context."""


def _load_yaml(path):
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f", line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}{line}: YAML parse error: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


class _Section:
    """Key-path aware accessor over one nested mapping."""

    def __init__(self, data, path, where):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{where}: '{path}' must be a mapping")
        self.data = data
        self.path = path
        self.where = where

    def child(self, key, required=False):
        if required and key not in self.data:
            raise ConfigError(f"{self.where}: missing required section '{self._p(key)}'")
        return _Section(self.data.get(key), self._p(key), self.where)

    def _p(self, key):
        return f"{self.path}.{key}" if self.path else str(key)

    def has(self, key):
        return key in self.data and self.data[key] is not None

    def get(self, key, default=None, required=False):
        if key not in self.data or self.data[key] is None:
            if required:
                raise ConfigError(f"{self.where}: missing required key '{self._p(key)}'")
            return default
        return self.data[key]

    def number(self, key, default=None, required=False, positive=False):
        v = self.get(key, default, required)
        if v is None:
            return None
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.where}: '{self._p(key)}' must be a number") from None
        if positive and v <= 0.0:
            raise ConfigError(f"{self.where}: '{self._p(key)}' must be > 0")
        return v

    def vector(self, key, size, default=None, required=False):
        v = self.get(key, default, required)
        if v is None:
            return None
        try:
            out = np.asarray(v, dtype=float).reshape(size)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.where}: '{self._p(key)}' must be a {size}-vector") from None
        return out


def load_model(path) -> ManipulatorModel:
    raw = _load_yaml(path)
    top = _Section(raw, "", str(path))
    version = int(top.number("schema_version", required=True))
    if version != MODEL_SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported model schema_version {version}")
    gravity = top.vector("gravity_m_per_s2", 3, default=[0.0, 0.0, -9.81])
    tool = top.vector("tool_offset_m", 3, required=True)

    joints_raw = top.get("joints", required=True)
    if not isinstance(joints_raw, list) or not joints_raw:
        raise ConfigError(f"{path}: 'joints' must be a non-empty list")

    joints, bodies, frames = [], [], []
    parent = "world"
    for idx, jraw in enumerate(joints_raw):
        sec = _Section(jraw, f"joints[{idx}]", str(path))
        name = str(sec.get("name", default=f"j{idx + 1}"))
        jtype = str(sec.get("type", default="revolute"))
        axis = sec.vector("axis", 3, required=True)
        n = np.linalg.norm(axis)
        if n < 1e-12:
            raise ConfigError(f"{path}: joints[{idx}].axis must be nonzero")
        axis = axis / n
        if jtype == "revolute":
            screw = UnitScrew(np.zeros(3), axis)
        elif jtype == "prismatic":
            screw = UnitScrew(axis, np.zeros(3))
        else:
            raise ConfigError(f"{path}: joints[{idx}].type must be revolute or prismatic")
        rpy = sec.vector("offset_rotation_rpy_rad", 3, default=[0.0, 0.0, 0.0])
        trans = sec.vector("offset_translation_m", 3, required=True)
        limits = sec.vector("limits_rad" if jtype == "revolute" else "limits_m", 2, default=[-np.pi, np.pi])
        offset = SpatialTransform(rpy_to_matrix(rpy), trans, name, parent)
        joints.append(JointSpec(screw, offset, (float(limits[0]), float(limits[1]))))
        frames.append(name)
        parent = name

        body = sec.child("body", required=True)
        mass = body.number("mass_kg", required=True, positive=True)
        com = body.vector("com_m", 3, required=True)
        isec = body.child("inertia_com_kgm2", required=True)
        I = np.array(
            [
                [isec.number("ixx", required=True), isec.number("ixy", 0.0), isec.number("ixz", 0.0)],
                [isec.number("ixy", 0.0), isec.number("iyy", required=True), isec.number("iyz", 0.0)],
                [isec.number("ixz", 0.0), isec.number("iyz", 0.0), isec.number("izz", required=True)],
            ]
        )
        if np.any(np.linalg.eigvalsh(I) <= 0.0):
            raise ConfigError(f"{path}: joints[{idx}].body inertia must be positive definite")
        bodies.append(InertialParams.from_com(mass, com, I))

    return ManipulatorModel(
        joints=tuple(joints),
        bodies=tuple(bodies),
        gravity=gravity,
        tool_offset=tool,
        name=str(top.get("name", default=os.path.basename(str(path)))),
        frames=tuple(frames),
    )


@dataclass
class Scenario:
    """Fully resolved scenario, ready to instantiate a Simulator."""

    name: str
    model: ManipulatorModel
    trajectory: PoseTrajectory
    environment: simulate.Environment | None
    controller: simulate.ControllerConfig
    body_control: simulate.BodyControlConfig
    adaptation: simulate.AdaptationConfig
    observer_config: observer.ObserverConfig
    settings: simulate.ScenarioSettings
    q0: np.ndarray
    raw: dict
    base_dir: str = "."

    def build(self, seed=None) -> simulate.Simulator:
        settings = self.settings
        if seed is not None:
            settings = simulate.ScenarioSettings(
                dt=settings.dt,
                duration=settings.duration,
                seed=int(seed),
                rate_abort=settings.rate_abort,
                integrator=settings.integrator,
                log_every=settings.log_every,
                name=settings.name,
            )
        disturbance = _disturbance_from(self.raw.get("disturbance"))
        return simulate.Simulator(
            self.model,
            self.trajectory,
            self.environment,
            self.controller,
            self.body_control,
            self.adaptation,
            self.observer_config,
            settings,
            q0=self.q0,
            disturbance=disturbance,
        )


def _disturbance_from(raw):
    if not raw:
        return None
    sec = _Section(raw, "disturbance", "scenario")
    return simulate.DisturbanceSpec(
        amplitude=sec.number("amplitude_n", 0.0),
        bandwidth_hz=sec.number("bandwidth_hz", 2.0),
        components=int(sec.number("components", 4)),
    )


def load_scenario(path) -> Scenario:
    raw = _load_yaml(path)
    return scenario_from_dict(raw, str(path), os.path.dirname(str(path)))


def scenario_from_dict(raw, where, base_dir) -> Scenario:
    top = _Section(raw, "", where)
    version = int(top.number("schema_version", required=True))
    if version != SCENARIO_SCHEMA_VERSION:
        raise ConfigError(f"{where}: unsupported scenario schema_version {version}")

    model_ref = str(top.get("model", required=True))
    model_path = model_ref if os.path.isabs(model_ref) else os.path.join(base_dir, model_ref)
    model = load_model(model_path)
    n = model.dof

    dt = top.number("dt_s", required=True, positive=True)
    duration = top.number("duration_s", required=True, positive=True)
    seed = int(top.number("seed", 0))
    q0 = top.vector("initial_q_rad", n, default=np.zeros(n))

    imp = top.child("impedance", required=True)
    stiffness = np.concatenate(
        [imp.vector("stiffness_n_per_m", 3, required=True), imp.vector("stiffness_nm_per_rad", 3, required=True)]
    )
    damping = np.concatenate(
        [imp.vector("damping_ns_per_m", 3, required=True), imp.vector("damping_nms_per_rad", 3, required=True)]
    )
    inertia = np.concatenate(
        [imp.vector("inertia_kg", 3, default=np.zeros(3)), imp.vector("inertia_kgm2", 3, default=np.zeros(3))]
    )
    f_des = np.concatenate(
        [imp.vector("desired_force_n", 3, default=np.zeros(3)), imp.vector("desired_moment_nm", 3, default=np.zeros(3))]
    )
    spec = impedance.ImpedanceSpec(stiffness=stiffness, damping=damping, inertia=inertia, f_desired=f_des)

    sigma_override = imp.vector("sigma_override_m_per_ns", 6)
    controller = simulate.ControllerConfig(
        spec=spec,
        gamma_scale=imp.number("gamma_scale", 1.0),
        sigma_override=sigma_override,
        mode=str(top.get("controller_mode", default="task_impedance")),
    )

    obs = top.child("observer")
    observer_config = observer.ObserverConfig(
        gain=np.full(6, obs.number("residual_gain_per_s", 100.0, positive=True)),
        impact_threshold=obs.number("impact_threshold_n", 150.0, positive=True),
        filter_gain=np.full(6, obs.number("force_filter_per_s", 200.0, positive=True)),
    )

    bc = top.child("body_control")
    gains = bc.vector("feedback_gains", n, default=np.full(n, 50.0))
    body_control = simulate.BodyControlConfig(
        feedback_gains=gains,
        adapt_tool=bool(bc.get("adapt_tool", default=True)),
        tool_underestimate=bc.number("tool_underestimate_frac", 0.5),
        rbf_enabled=bool(bc.get("rbf_enabled", default=True)),
    )

    ad = top.child("adaptation")
    adaptation = simulate.AdaptationConfig(
        gamma=ad.number("gamma", 500.0, positive=True),
        gamma0=ad.number("gamma0", 0.01, positive=True),
        weight_gain=ad.number("weight_gain", 300.0, positive=True),
        bias_gain=ad.number("bias_gain", 10.0, positive=True),
        weight_leak=ad.number("weight_leak", 1e-3),
        bias_leak=ad.number("bias_leak", 1e-3),
        n_centers=int(ad.number("rbf_centers", 32, positive=True)),
        velocity_envelope=ad.number("velocity_envelope_m_per_s", 1.0, positive=True),
    )

    env = None
    if top.has("environment"):
        es = top.child("environment")
        normal = es.vector("normal", 3, required=True)
        point = es.vector("plane_point_m", 3, required=True)
        env = simulate.Environment(
            normal=normal,
            offset=float(np.asarray(normal) @ point / np.linalg.norm(normal)),
            stiffness=es.number("stiffness_n_per_m", 1e5),
            damping=es.number("damping_ns_per_m", 1e3),
            inertia=es.number("inertia_kg", 0.0),
        )

    lim = top.child("limits")
    settings = simulate.ScenarioSettings(
        dt=dt,
        duration=duration,
        seed=seed,
        rate_abort=lim.number("rate_abort_rad_per_s", 20.0, positive=True),
        integrator=str(top.get("integrator", default="semi_implicit")),
        name=str(top.get("name", default=os.path.splitext(os.path.basename(where))[0])),
    )

    start_pose = forward_kinematics(model, q0)
    waypoints = [PoseWaypoint(start_pose.position, start_pose.quaternion, duration=1.0)]
    traj_sec = top.child("trajectory")
    raw_wps = traj_sec.get("waypoints", default=[])
    if not isinstance(raw_wps, list):
        raise ConfigError(f"{where}: trajectory.waypoints must be a list")
    prev_quat = start_pose.quaternion
    for idx, wraw in enumerate(raw_wps):
        sec = _Section(wraw, f"trajectory.waypoints[{idx}]", where)
        pos = sec.vector("position_m", 3, required=True)
        if sec.has("orientation_rpy_rad"):
            from .model import quaternion_from_matrix

            quat = quaternion_from_matrix(rpy_to_matrix(sec.vector("orientation_rpy_rad", 3)))
        else:
            quat = prev_quat
        prev_quat = quat
        waypoints.append(
            PoseWaypoint(pos, quat, duration=sec.number("duration_s", required=True, positive=True),
                         hold=sec.number("hold_s", 0.0))
        )
    trajectory = PoseTrajectory(waypoints)

    if controller.mode == "joint_pd":
        controller.joint_setpoint = top.vector("joint_setpoint_rad", n, default=q0)
        controller.joint_kp = top.number("joint_kp", 200.0)
        controller.joint_kd = top.number("joint_kd", 50.0)

    return Scenario(
        name=settings.name,
        model=model,
        trajectory=trajectory,
        environment=env,
        controller=controller,
        body_control=body_control,
        adaptation=adaptation,
        observer_config=observer_config,
        settings=settings,
        q0=q0,
        raw=raw,
        base_dir=base_dir,
    )


def set_by_path(raw: dict, dotted_path: str, value):
    """Assign into a nested mapping by dotted path; integers index lists."""
    keys = dotted_path.split(".")
    node = raw
    for key in keys[:-1]:
        nxt = node[int(key)] if isinstance(node, list) else node.setdefault(key, {})
        if nxt is None:
            node[key] = {}
            nxt = node[key]
        node = nxt
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value
