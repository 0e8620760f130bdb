"""Fifth-order point-to-point trajectory generation.

Each segment interpolates position (and optionally orientation along the
geodesic) with the minimum-order polynomial meeting zero boundary velocity
and acceleration; the time scaling s(t) = 10u^3 - 15u^4 + 6u^5 is shared by
all coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import quaternion_to_matrix, rotation_about


def quintic_scaling(t, t_f):
    """Scaling s in [0, 1] and its two time derivatives; clamps outside [0, t_f]."""
    if t <= 0.0:
        return 0.0, 0.0, 0.0
    if t >= t_f:
        return 1.0, 0.0, 0.0
    u = t / t_f
    s = u**3 * (10.0 - 15.0 * u + 6.0 * u * u)
    sd = 30.0 * u * u * (1.0 - u) ** 2 / t_f
    sdd = 60.0 * u * (1.0 - 3.0 * u + 2.0 * u * u) / t_f**2
    return s, sd, sdd


@dataclass(frozen=True)
class QuinticSegment:
    """One rest-to-rest segment between two waypoint vectors."""

    start: np.ndarray
    end: np.ndarray
    duration: float

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError("segment duration must be positive")
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float))


def quintic(segment: QuinticSegment, t):
    """Position, velocity and acceleration along the segment at time t."""
    s, sd, sdd = quintic_scaling(t, segment.duration)
    span = segment.end - segment.start
    return segment.start + s * span, sd * span, sdd * span


def _quat_mult(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def _quat_log(q):
    """Rotation vector (axis * angle) of a unit quaternion."""
    w = np.clip(q[0], -1.0, 1.0)
    v = q[1:]
    n = np.linalg.norm(v)
    if n < 1e-12:
        return np.zeros(3)
    return v / n * 2.0 * np.arctan2(n, w)


@dataclass(frozen=True)
class PoseWaypoint:
    position: np.ndarray
    quaternion: np.ndarray
    duration: float
    hold: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.quaternion, dtype=float).reshape(4)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "quaternion", q / np.linalg.norm(q))


class PoseTrajectory:
    """Piecewise-quintic pose trajectory through waypoints with hold phases.

    Orientation moves along the geodesic between consecutive quaternions with
    the same quintic scaling; the desired angular velocity is analytic.
    Beyond the last waypoint everything holds at rest.
    """

    def __init__(self, waypoints):
        if len(waypoints) < 1:
            raise ValueError("need at least one waypoint")
        self.waypoints = list(waypoints)
        self._segments = []
        t0 = 0.0
        for prev, nxt in zip(self.waypoints[:-1], self.waypoints[1:]):
            q0, q1 = prev.quaternion, nxt.quaternion
            if float(q0 @ q1) < 0.0:
                q1 = -q1
            rotvec = _quat_log(_quat_mult(np.array([q0[0], -q0[1], -q0[2], -q0[3]]), q1))
            self._segments.append((t0, nxt.duration, nxt.hold, prev.position, nxt.position, q0, rotvec))
            t0 += nxt.duration + nxt.hold
        self.total_duration = t0

    @staticmethod
    def _interp(local, dur, p0, p1, q0, rotvec):
        s, sd, sdd = quintic_scaling(local, dur)
        pos = p0 + s * (p1 - p0)
        vel = sd * (p1 - p0)
        acc = sdd * (p1 - p0)
        angle_vec = s * rotvec
        n = np.linalg.norm(angle_vec)
        if n > 1e-12:
            dq = np.concatenate([[np.cos(0.5 * n)], np.sin(0.5 * n) * angle_vec / n])
        else:
            dq = np.array([1.0, 0.0, 0.0, 0.0])
        quat = _quat_mult(q0, dq)
        # the geodesic axis is fixed in the moving frame, so the world-frame
        # angular rate is just the q0-frame rate rotated once
        R0 = quaternion_to_matrix(q0)
        omega = R0 @ (sd * rotvec)
        omega_dot = R0 @ (sdd * rotvec)
        return pos, quat, np.concatenate([vel, omega]), np.concatenate([acc, omega_dot])

    def sample(self, t):
        """Desired (position, quaternion, xdot6, xddot6) at time t."""
        if not self._segments:
            wp0 = self.waypoints[0]
            return wp0.position, wp0.quaternion, np.zeros(6), np.zeros(6)
        for t_start, dur, hold, p0, p1, q0, rotvec in self._segments:
            if t < t_start + dur + hold:
                return self._interp(min(max(t - t_start, 0.0), dur), dur, p0, p1, q0, rotvec)
        t_start, dur, hold, p0, p1, q0, rotvec = self._segments[-1]
        return self._interp(dur, dur, p0, p1, q0, rotvec)

    def peak_speed(self):
        """Largest linear speed over the trajectory: (15/8) ||span|| / t_f."""
        peak = 0.0
        for _, dur, _, p0, p1, _, _ in self._segments:
            peak = max(peak, 15.0 / 8.0 * float(np.linalg.norm(p1 - p0)) / dur)
        return peak
