"""Kinematics and Newton-Euler dynamics of a serial chain of rigid bodies.

A model is an ordered list of single-DoF joints, each carrying one rigid body
whose inertial parameters are expressed in the joint frame.  The joint frame
is attached to its body at the joint axis; all per-body quantities (twists,
wrenches, inertias) live in body-attached coordinates.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np

from .spatial import (
    SpatialForceVector,
    SpatialInertia,
    SpatialMotionVector,
    SpatialTransform,
    UnitScrew,
    force_cross_dual,
    motion_cross,
    skew,
)


def rotation_about(axis, angle):
    """Rodrigues rotation about a unit axis."""
    a = np.asarray(axis, dtype=float)
    K = skew(a)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rpy_to_matrix(rpy):
    """Roll-pitch-yaw (x, then y, then z, extrinsic) to rotation matrix."""
    r, p, y = rpy
    return rotation_about([0, 0, 1], y) @ rotation_about([0, 1, 0], p) @ rotation_about([1, 0, 0], r)


def quaternion_from_matrix(R):
    """Unit quaternion (eta, eps) from a rotation matrix, eta >= 0."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        eta = 0.25 * s
        eps = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) / s
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(R[i, i] - R[j, j] - R[k, k] + 1.0) * 2.0
        eps = np.zeros(3)
        eta = (R[k, j] - R[j, k]) / s
        eps[i] = 0.25 * s
        eps[j] = (R[j, i] + R[i, j]) / s
        eps[k] = (R[k, i] + R[i, k]) / s
    q = np.concatenate([[eta], eps])
    q /= np.linalg.norm(q)
    if q[0] < 0.0:
        q = -q
    return q


def quaternion_to_matrix(q):
    eta, ex, ey, ez = np.asarray(q, dtype=float)
    E = skew([ex, ey, ez])
    return np.eye(3) + 2.0 * eta * E + 2.0 * (E @ E)


@dataclass(frozen=True)
class Pose:
    """End-effector position and unit quaternion (eta scalar first)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.quaternion, dtype=float).reshape(4)
        if abs(q @ q - 1.0) > 1e-10:
            raise ValueError("quaternion is not normalized")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "quaternion", q)

    @property
    def eta(self):
        return float(self.quaternion[0])

    @property
    def eps(self):
        return self.quaternion[1:]

    def rotation(self):
        return quaternion_to_matrix(self.quaternion)


@dataclass(frozen=True)
class InertialParams:
    """Ten-parameter body description: mass, first moment, frame inertia.

    `first_moment` is m * r_com and `inertia` is the rotational inertia about
    the frame origin, both expressed in the body/joint frame.  The dynamics
    are linear in the stacked vector (m, h, Ixx, Ixy, Ixz, Iyy, Iyz, Izz).
    """

    mass: float
    first_moment: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.first_moment, dtype=float).reshape(3)
        I = np.asarray(self.inertia, dtype=float)
        if I.shape != (3, 3) or np.max(np.abs(I - I.T)) > 1e-9:
            raise ValueError("inertia must be 3x3 symmetric")
        object.__setattr__(self, "first_moment", h)
        object.__setattr__(self, "inertia", 0.5 * (I + I.T))

    @classmethod
    def from_com(cls, mass, com, inertia_com):
        """Build from CoM offset and inertia about the CoM (parallel axis)."""
        c = np.asarray(com, dtype=float)
        cx = skew(c)
        return cls(mass, mass * c, np.asarray(inertia_com, dtype=float) - mass * (cx @ cx))

    @classmethod
    def from_vector(cls, phi):
        phi = np.asarray(phi, dtype=float).reshape(10)
        m, hx, hy, hz, ixx, ixy, ixz, iyy, iyz, izz = phi
        I = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
        return cls(m, [hx, hy, hz], I)

    def as_vector(self):
        I = self.inertia
        return np.array(
            [
                self.mass,
                self.first_moment[0],
                self.first_moment[1],
                self.first_moment[2],
                I[0, 0],
                I[0, 1],
                I[0, 2],
                I[1, 1],
                I[1, 2],
                I[2, 2],
            ]
        )

    def spatial_inertia(self, frame="body"):
        hx = skew(self.first_moment)
        M = np.zeros((6, 6))
        M[:3, :3] = self.mass * np.eye(3)
        M[:3, 3:] = -hx
        M[3:, :3] = hx
        M[3:, 3:] = self.inertia
        return SpatialInertia(M, frame)


@dataclass(frozen=True)
class PseudoInertia:
    """4x4 symmetric matrix whose positive definiteness encodes physicality."""

    matrix: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.matrix, dtype=float)
        if L.shape != (4, 4) or np.max(np.abs(L - L.T)) > 1e-9:
            raise ValueError("pseudo-inertia must be 4x4 symmetric")
        object.__setattr__(self, "matrix", 0.5 * (L + L.T))

    def is_positive_definite(self):
        try:
            np.linalg.cholesky(self.matrix)
            return True
        except np.linalg.LinAlgError:
            return False

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])


def phi_to_pseudo(params: InertialParams) -> PseudoInertia:
    """Linear bijection from the 10 inertial parameters to a 4x4 matrix."""
    I = params.inertia
    top = 0.5 * np.trace(I) * np.eye(3) - I
    L = np.zeros((4, 4))
    L[:3, :3] = top
    L[:3, 3] = params.first_moment
    L[3, :3] = params.first_moment
    L[3, 3] = params.mass
    return PseudoInertia(L)


def pseudo_to_phi(L: PseudoInertia) -> InertialParams:
    """Inverse of phi_to_pseudo."""
    S = L.matrix[:3, :3]
    I = np.trace(S) * np.eye(3) - S
    return InertialParams(float(L.matrix[3, 3]), L.matrix[:3, 3].copy(), I)


def consistency_check(params: InertialParams):
    """Physical consistency: pseudo-inertia strictly positive definite.

    Returns (consistent, min_eigenvalue).
    """
    L = phi_to_pseudo(params)
    lam = L.min_eigenvalue()
    return lam > 0.0, lam


@dataclass(frozen=True)
class JointSpec:
    screw: UnitScrew
    offset: SpatialTransform  # parent frame -> joint frame at q = 0
    limits: tuple = (-np.pi, np.pi)

    def __post_init__(self):
        lo, hi = self.limits
        if not lo < hi:
            raise ValueError("joint limits must satisfy min < max")


@dataclass(frozen=True, eq=False)
class ManipulatorModel:
    """Ordered serial chain: joints, per-joint bodies, gravity, tool offset."""

    joints: tuple
    bodies: tuple  # InertialParams, one per joint, in that joint's frame
    gravity: np.ndarray  # world frame, m/s^2
    tool_offset: np.ndarray  # tool tip position in the last joint frame, m
    name: str = "chain"
    frames: tuple = field(default=None)

    def __post_init__(self):
        if len(self.joints) != len(self.bodies):
            raise ValueError("need exactly one body per joint")
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "bodies", tuple(self.bodies))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float).reshape(3))
        object.__setattr__(self, "tool_offset", np.asarray(self.tool_offset, dtype=float).reshape(3))
        if self.frames is None:
            object.__setattr__(self, "frames", tuple(f"j{i + 1}" for i in range(len(self.joints))))

    @property
    def dof(self):
        return len(self.joints)

    def check_limits(self, q, clamp=False):
        q = np.asarray(q, dtype=float)
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        if clamp:
            return np.clip(q, lo, hi)
        if np.any(q < lo) or np.any(q > hi):
            bad = np.where((q < lo) | (q > hi))[0]
            raise ValueError(f"joint(s) {bad.tolist()} outside limits")
        return q


def joint_transform(joint: JointSpec, q):
    """Parent-frame -> joint-frame transform at joint position q.

    Returned as (R, r): child axes in parent coordinates and child origin in
    parent coordinates.
    """
    R0 = joint.offset.rotation
    r0 = joint.offset.offset
    if joint.screw.is_revolute:
        return R0 @ rotation_about(joint.screw.rotation, q), r0.copy()
    return R0.copy(), r0 + R0 @ (joint.screw.translation * q)


def frame_poses(model: ManipulatorModel, q):
    """World rotation and origin of every joint frame plus the tool point."""
    q = np.asarray(q, dtype=float)
    R = np.eye(3)
    p = np.zeros(3)
    rotations, origins = [], []
    for joint, qi in zip(model.joints, q):
        Rj, rj = joint_transform(joint, qi)
        p = p + R @ rj
        R = R @ Rj
        rotations.append(R)
        origins.append(p)
    tool = origins[-1] + rotations[-1] @ model.tool_offset
    return rotations, origins, tool


def forward_kinematics(model: ManipulatorModel, q, clamp_limits=False, continuity=None) -> Pose:
    """Tool pose for joint vector q.

    The quaternion sign is chosen with eta >= 0 unless `continuity` supplies
    the previous quaternion, in which case the closer hemisphere wins.
    """
    q = model.check_limits(q, clamp=clamp_limits)
    rotations, _, tool = frame_poses(model, q)
    quat = quaternion_from_matrix(rotations[-1])
    if continuity is not None and float(np.asarray(continuity) @ quat) < 0.0:
        quat = -quat
    return Pose(tool, quat)


def jacobian(model: ManipulatorModel, q):
    """World-frame task Jacobian at the tool point: xdot = J qdot.

    Task velocity is [linear velocity of the tool point; angular velocity],
    both in world coordinates.
    """
    q = np.asarray(q, dtype=float)
    rotations, origins, tool = frame_poses(model, q)
    J = np.zeros((6, model.dof))
    for i, joint in enumerate(model.joints):
        if joint.screw.is_revolute:
            axis = rotations[i] @ joint.screw.rotation
            J[:3, i] = np.cross(axis, tool - origins[i])
            J[3:, i] = axis
        else:
            J[:3, i] = rotations[i] @ joint.screw.translation
    return J


def _motion_to_child(Rj, rj, v_parent):
    """Re-express a parent-frame twist in child coordinates."""
    lin = Rj.T @ (v_parent[:3] + np.cross(v_parent[3:], rj))
    ang = Rj.T @ v_parent[3:]
    return np.concatenate([lin, ang])


def chain_velocities(model: ManipulatorModel, q, qd):
    """Per-body twists in body coordinates, propagated root to tip."""
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    out = []
    v = np.zeros(6)
    for joint, qi, qdi in zip(model.joints, q, qd):
        Rj, rj = joint_transform(joint, qi)
        v = _motion_to_child(Rj, rj, v) + joint.screw.as_array() * qdi
        out.append(v)
    return [SpatialMotionVector.from_array(vi, fr) for vi, fr in zip(out, model.frames)]


def chain_accelerations(model: ManipulatorModel, q, qd, qdd):
    """Per-body true spatial accelerations in body coordinates."""
    q, qd, qdd = (np.asarray(x, dtype=float) for x in (q, qd, qdd))
    vels, accs = [], []
    v = np.zeros(6)
    a = np.zeros(6)
    for joint, qi, qdi, qddi in zip(model.joints, q, qd, qdd):
        Rj, rj = joint_transform(joint, qi)
        s = joint.screw.as_array()
        v = _motion_to_child(Rj, rj, v) + s * qdi
        a = _motion_to_child(Rj, rj, a) + s * qddi + motion_cross(v) @ (s * qdi)
        vels.append(v)
        accs.append(a)
    return vels, accs


def _mass_action_columns(a):
    """10 columns of d(M(phi) a)/d(phi) for a twist-like 6-array a."""
    a = np.asarray(a, dtype=float)
    al, aw = a[:3], a[3:]
    Y = np.zeros((6, 10))
    Y[:3, 0] = al
    Y[:3, 1:4] = skew(aw)
    Y[3:, 1:4] = -skew(al)
    # inertia columns: I aw for I = sym(ixx..izz)
    Y[3, 4:7] = [aw[0], aw[1], aw[2]]
    Y[4, 5] = aw[0]
    Y[4, 7] = aw[1]
    Y[4, 8] = aw[2]
    Y[5, 6] = aw[0]
    Y[5, 8] = aw[1]
    Y[5, 9] = aw[2]
    return Y


def regressor(vdot_r, v_r, v, gravity_in_frame):
    """6x10 matrix Y with Y phi = M vdot_r + C(v) v_r + G for any phi.

    `vdot_r`/`v_r` are the required acceleration/velocity; passing the actual
    twist for both reproduces the net body force exactly.  `gravity_in_frame`
    is the gravity acceleration expressed in the body frame.
    """
    vdot_r = np.asarray(vdot_r, dtype=float).reshape(6)
    v_r = np.asarray(v_r, dtype=float).reshape(6)
    v = np.asarray(v, dtype=float).reshape(6)
    g6 = np.concatenate([np.asarray(gravity_in_frame, dtype=float).reshape(3), np.zeros(3)])
    Y = _mass_action_columns(vdot_r - g6)
    Y += force_cross_dual(v) @ _mass_action_columns(v_r)
    return Y


def net_body_force(params: InertialParams, v: SpatialMotionVector, vdot, gravity_in_frame):
    """Net spatial force M vdot + C(v) v + G on one body, in its own frame."""
    if isinstance(vdot, SpatialMotionVector):
        vdot = vdot.as_array()
    M = params.spatial_inertia(v.frame).matrix
    va = v.as_array()
    g6 = np.concatenate([np.asarray(gravity_in_frame, dtype=float).reshape(3), np.zeros(3)])
    f = M @ np.asarray(vdot, dtype=float).reshape(6) + force_cross_dual(va) @ (M @ va) - M @ g6
    return SpatialForceVector.from_array(f, v.frame)


def inverse_dynamics(model: ManipulatorModel, q, qd, qdd, tip_wrench_world=None, gravity=None):
    """Joint torques via the recursive Newton-Euler pass.

    `tip_wrench_world` is an optional [force; moment] acting on the tool point,
    expressed in world axes.  Gravity is folded in through a fictitious base
    acceleration.  Returns (tau, per-body net wrenches in body coords).
    """
    q, qd, qdd = (np.asarray(x, dtype=float) for x in (q, qd, qdd))
    n = model.dof
    g = model.gravity if gravity is None else np.asarray(gravity, dtype=float)
    Rs, rs, screws = [], [], []
    v = np.zeros(6)
    a = np.concatenate([-g, np.zeros(3)])
    vels, accs = [], []
    for joint, qi, qdi, qddi in zip(model.joints, q, qd, qdd):
        Rj, rj = joint_transform(joint, qi)
        s = joint.screw.as_array()
        v = _motion_to_child(Rj, rj, v) + s * qdi
        a = _motion_to_child(Rj, rj, a) + s * qddi + motion_cross(v) @ (s * qdi)
        Rs.append(Rj)
        rs.append(rj)
        screws.append(s)
        vels.append(v)
        accs.append(a)

    net = []
    for i in range(n):
        M = model.bodies[i].spatial_inertia().matrix
        net.append(M @ accs[i] + force_cross_dual(vels[i]) @ (M @ vels[i]))

    if tip_wrench_world is not None:
        rotations, origins, tool = frame_poses(model, q)
        fw = np.asarray(tip_wrench_world, dtype=float).reshape(6)
        Rn = rotations[-1]
        f_local = Rn.T @ fw[:3]
        m_local = Rn.T @ fw[3:] + np.cross(model.tool_offset, f_local)
        net[-1] -= np.concatenate([f_local, m_local])

    tau = np.zeros(n)
    w = np.zeros(6)
    wrenches = [None] * n
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            # child wrench into this frame: force map with (R, r) of joint i+1
            R, r = Rs[i + 1], rs[i + 1]
            f = R @ w[:3]
            m = R @ w[3:] + np.cross(r, f)
            w = net[i] + np.concatenate([f, m])
        else:
            w = net[i].copy()
        wrenches[i] = w
        tau[i] = screws[i] @ w
    return tau, wrenches


def mass_matrix(model: ManipulatorModel, q):
    """Joint-space mass matrix assembled from unit-acceleration sweeps."""
    n = model.dof
    zero = np.zeros(n)
    M = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j], _ = inverse_dynamics(model, q, zero, e, gravity=np.zeros(3))
    return 0.5 * (M + M.T)


def bias_forces(model: ManipulatorModel, q, qd):
    """Velocity and gravity torques: tau_bias = C(q, qd) qd + g(q)."""
    tau, _ = inverse_dynamics(model, q, qd, np.zeros(model.dof))
    return tau


def total_kinetic_energy(model: ManipulatorModel, q, qd):
    vels = chain_velocities(model, q, qd)
    total = 0.0
    for params, v in zip(model.bodies, vels):
        va = v.as_array()
        total += 0.5 * float(va @ params.spatial_inertia().matrix @ va)
    return total


class ChainArrays:
    """Flat-array view of a model for the numeric kernels."""

    def __init__(self, model: ManipulatorModel):
        n = model.dof
        self.n = n
        self.offs_R = np.stack([j.offset.rotation for j in model.joints])
        self.offs_r = np.stack([j.offset.offset for j in model.joints])
        self.is_rev = np.array([1 if j.screw.is_revolute else 0 for j in model.joints], dtype=np.int64)
        self.axis = np.stack(
            [j.screw.rotation if j.screw.is_revolute else j.screw.translation for j in model.joints]
        )
        self.screws = np.stack([j.screw.as_array() for j in model.joints])
        self.M_body = np.stack([b.spatial_inertia().matrix for b in model.bodies])
        self.phi = np.stack([b.as_vector() for b in model.bodies])
        self.tool = model.tool_offset.copy()
        self.gravity = model.gravity.copy()


_chain_cache = weakref.WeakKeyDictionary()


def chain_arrays(model: ManipulatorModel) -> ChainArrays:
    """Cached flat-array form of the model (the model is immutable)."""
    try:
        return _chain_cache[model]
    except KeyError:
        arr = ChainArrays(model)
        _chain_cache[model] = arr
        return arr
