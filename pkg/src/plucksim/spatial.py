"""6D spatial-vector algebra in Plucker coordinates.

Twists and wrenches are stored as [linear; angular] 6-vectors tagged with an
explicit frame id.  Every operation that mixes two quantities checks that the
frame ids agree; silent frame mismatches are the dominant failure mode when
per-body momenta get accumulated, so the checks are not optional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FrameError(ValueError):
    """Raised when an operation mixes quantities from different frames."""


def _check_frames(frame_a, frame_b, what):
    if frame_a != frame_b:
        raise FrameError(f"{what}: frame {frame_a!r} does not match {frame_b!r}")


def _vec3(x):
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite entries in 3-vector")
    return v


def skew(alpha):
    """Antisymmetric matrix S with S @ b == cross(alpha, b)."""
    x, y, z = _vec3(alpha)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class SpatialMotionVector:
    """Twist: linear velocity (m/s) and angular velocity (rad/s) in `frame`."""

    linear: np.ndarray
    angular: np.ndarray
    frame: str

    def __post_init__(self):
        object.__setattr__(self, "linear", _vec3(self.linear))
        object.__setattr__(self, "angular", _vec3(self.angular))

    @classmethod
    def from_array(cls, v, frame):
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:], frame)

    def as_array(self):
        return np.concatenate([self.linear, self.angular])

    def __add__(self, other):
        _check_frames(self.frame, other.frame, "twist sum")
        return SpatialMotionVector(self.linear + other.linear, self.angular + other.angular, self.frame)

    def __sub__(self, other):
        _check_frames(self.frame, other.frame, "twist difference")
        return SpatialMotionVector(self.linear - other.linear, self.angular - other.angular, self.frame)

    def __mul__(self, scale):
        return SpatialMotionVector(self.linear * scale, self.angular * scale, self.frame)

    __rmul__ = __mul__

    def dot(self, wrench):
        """Power pairing <twist, wrench>; both must share a frame."""
        _check_frames(self.frame, wrench.frame, "power pairing")
        return float(self.linear @ wrench.force + self.angular @ wrench.moment)


@dataclass(frozen=True)
class SpatialForceVector:
    """Wrench: force (N) and moment (N m) in `frame`."""

    force: np.ndarray
    moment: np.ndarray
    frame: str

    def __post_init__(self):
        object.__setattr__(self, "force", _vec3(self.force))
        object.__setattr__(self, "moment", _vec3(self.moment))

    @classmethod
    def from_array(cls, f, frame):
        f = np.asarray(f, dtype=float).reshape(6)
        return cls(f[:3], f[3:], frame)

    def as_array(self):
        return np.concatenate([self.force, self.moment])

    def __add__(self, other):
        _check_frames(self.frame, other.frame, "wrench sum")
        return SpatialForceVector(self.force + other.force, self.moment + other.moment, self.frame)

    def __sub__(self, other):
        _check_frames(self.frame, other.frame, "wrench difference")
        return SpatialForceVector(self.force - other.force, self.moment - other.moment, self.frame)

    def __mul__(self, scale):
        return SpatialForceVector(self.force * scale, self.moment * scale, self.frame)

    __rmul__ = __mul__


@dataclass(frozen=True)
class UnitScrew:
    """Joint axis: exactly one of (translation, rotation) is a unit vector."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        t = _vec3(self.translation)
        r = _vec3(self.rotation)
        nt, nr = np.linalg.norm(t), np.linalg.norm(r)
        revolute = abs(nr - 1.0) < 1e-9 and nt < 1e-12
        prismatic = abs(nt - 1.0) < 1e-9 and nr < 1e-12
        if not (revolute or prismatic):
            raise ValueError("screw must be pure unit rotation or pure unit translation")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @property
    def is_revolute(self):
        return np.linalg.norm(self.rotation) > 0.5

    def as_array(self):
        return np.concatenate([self.translation, self.rotation])


@dataclass(frozen=True)
class SpatialTransform:
    """Frame-change map built from a rotation and an offset.

    `rotation` holds the axes of `from_frame` expressed in `to_frame`, and
    `offset` is the origin of `from_frame` seen from `to_frame`.  Wrenches map
    from `from_frame` to `to_frame` through the 6x6 block matrix
    [[R, 0], [skew(offset) R, R]]; twists map the same direction through the
    inverse transpose of that matrix.
    """

    rotation: np.ndarray
    offset: np.ndarray
    from_frame: str
    to_frame: str

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation must have det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "offset", _vec3(self.offset))

    @classmethod
    def identity(cls, frame):
        return cls(np.eye(3), np.zeros(3), frame, frame)

    def as_matrix(self):
        """6x6 wrench map (from_frame -> to_frame)."""
        R = self.rotation
        U = np.zeros((6, 6))
        U[:3, :3] = R
        U[3:, 3:] = R
        U[3:, :3] = skew(self.offset) @ R
        return U

    def motion_matrix(self):
        """6x6 twist map (from_frame -> to_frame); equals inv(as_matrix()).T."""
        R = self.rotation
        X = np.zeros((6, 6))
        X[:3, :3] = R
        X[3:, 3:] = R
        X[:3, 3:] = skew(self.offset) @ R
        return X

    def inverse(self):
        Rt = self.rotation.T
        return SpatialTransform(Rt, -Rt @ self.offset, self.to_frame, self.from_frame)

    def compose(self, inner):
        """self o inner: maps inner.from_frame all the way to self.to_frame."""
        _check_frames(self.from_frame, inner.to_frame, "transform composition")
        return SpatialTransform(
            self.rotation @ inner.rotation,
            self.offset + self.rotation @ inner.offset,
            inner.from_frame,
            self.to_frame,
        )


def motion_cross(v):
    """6x6 motion cross operator for a [linear; angular] twist array."""
    v = np.asarray(v, dtype=float).reshape(6)
    out = np.zeros((6, 6))
    wx = skew(v[3:])
    out[:3, :3] = wx
    out[:3, 3:] = skew(v[:3])
    out[3:, 3:] = wx
    return out


def force_cross_dual(v):
    """Dual (wrench-side) cross operator: -motion_cross(v).T."""
    return -motion_cross(np.asarray(v, dtype=float)).T


def transform_motion(U: SpatialTransform, v: SpatialMotionVector) -> SpatialMotionVector:
    """Re-express a twist given in U.from_frame in U.to_frame."""
    _check_frames(v.frame, U.from_frame, "transform_motion")
    ang = U.rotation @ v.angular
    lin = U.rotation @ v.linear + np.cross(U.offset, ang)
    return SpatialMotionVector(lin, ang, U.to_frame)


def transform_force(U: SpatialTransform, f: SpatialForceVector) -> SpatialForceVector:
    """Re-express a wrench given in U.from_frame in U.to_frame."""
    _check_frames(f.frame, U.from_frame, "transform_force")
    force = U.rotation @ f.force
    moment = U.rotation @ f.moment + np.cross(U.offset, force)
    return SpatialForceVector(force, moment, U.to_frame)


@dataclass(frozen=True)
class SpatialInertia:
    """6x6 spatial inertia of one rigid body, tagged with its frame."""

    matrix: np.ndarray
    frame: str

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        if M.shape != (6, 6):
            raise ValueError("spatial inertia must be 6x6")
        if np.max(np.abs(M - M.T)) > 1e-9:
            raise ValueError("spatial inertia must be symmetric")
        object.__setattr__(self, "matrix", M)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])


def inertia_from_params(mass, r_com, inertia_com, rotation=None, frame="body"):
    """Spatial inertia from mass, CoM offset and rotational inertia at the CoM.

    `r_com` points from the frame origin to the CoM, expressed in the frame;
    `inertia_com` is taken about the CoM in CoM-aligned axes, optionally
    rotated into the frame by `rotation`.
    """
    if mass <= 0.0:
        raise ValueError("mass must be positive")
    I_b = np.asarray(inertia_com, dtype=float)
    if np.max(np.abs(I_b - I_b.T)) > 1e-9 or np.any(np.linalg.eigvalsh(I_b) <= 0.0):
        raise ValueError("rotational inertia must be symmetric positive definite")
    r = _vec3(r_com)
    R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    rx = skew(r)
    I_frame = R @ I_b @ R.T - mass * (rx @ rx)
    M = np.zeros((6, 6))
    M[:3, :3] = mass * np.eye(3)
    M[:3, 3:] = -mass * rx
    M[3:, :3] = mass * rx
    M[3:, 3:] = I_frame
    return SpatialInertia(M, frame)


def spatial_momentum(M: SpatialInertia, v: SpatialMotionVector) -> SpatialForceVector:
    """Momentum wrench H = M v (an element of the wrench space)."""
    _check_frames(M.frame, v.frame, "spatial_momentum")
    return SpatialForceVector.from_array(M.matrix @ v.as_array(), v.frame)


def inertia_rate(M: SpatialInertia, v: SpatialMotionVector):
    """Time derivative of a body-fixed spatial inertia seen in a static frame.

    Returns -(v x)^T M - M (v x); the result is symmetric by construction.
    """
    _check_frames(M.frame, v.frame, "inertia_rate")
    vx = motion_cross(v.as_array())
    return -vx.T @ M.matrix - M.matrix @ vx


def coriolis_matrix(M: SpatialInertia, v: SpatialMotionVector):
    """Gyroscopic factorization C = -(v x)^T M.

    Satisfies C v == d(M)/dt v for the body-fixed inertia, so the rate
    identity minus twice C is skew in the quadratic-form sense.
    """
    _check_frames(M.frame, v.frame, "coriolis_matrix")
    return -motion_cross(v.as_array()).T @ M.matrix


def gravity_wrench_term(M: SpatialInertia, gravity_in_frame, frame=None):
    """Left-hand-side gravity term G = -M [g; 0] for gravity g in body axes."""
    g6 = np.concatenate([_vec3(gravity_in_frame), np.zeros(3)])
    return SpatialForceVector.from_array(-(M.matrix @ g6), frame or M.frame)


def kinetic_energy(M: SpatialInertia, v: SpatialMotionVector):
    _check_frames(M.frame, v.frame, "kinetic_energy")
    va = v.as_array()
    return 0.5 * float(va @ M.matrix @ va)
