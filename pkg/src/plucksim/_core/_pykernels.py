"""Pure-numpy implementation of the chain kernels.

All kernels work on the flat arrays produced by `model.chain_arrays`:

    offs_R   (n, 3, 3)  child-frame axes in parent coordinates at q = 0
    offs_r   (n, 3)     child origin in parent coordinates at q = 0
    axis     (n, 3)     unit joint axis in child coordinates
    is_rev   (n,)       1 for revolute, 0 for prismatic
    screws   (n, 6)     [translation; rotation] unit screws
    M_body   (n, 6, 6)  spatial inertia of body i in joint frame i
    tool     (3,)       tool point in the last joint frame

Twists/wrenches are [linear; angular] 6-arrays in body coordinates.
"""

import numpy as np


def _skew(a):
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def _rot_axis(axis, angle):
    K = _skew(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def _joint_Rr(arr, i, qi):
    R0 = arr.offs_R[i]
    r0 = arr.offs_r[i]
    if arr.is_rev[i]:
        return R0 @ _rot_axis(arr.axis[i], qi), r0
    return R0, r0 + R0 @ (arr.axis[i] * qi)


def _to_child(R, r, v6):
    lin = R.T @ (v6[:3] + np.cross(v6[3:], r))
    ang = R.T @ v6[3:]
    return np.concatenate([lin, ang])


def _mcross(v6):
    out = np.zeros((6, 6))
    out[:3, :3] = _skew(v6[3:])
    out[:3, 3:] = _skew(v6[:3])
    out[3:, 3:] = _skew(v6[3:])
    return out


def joint_local(arr, q):
    """Per-joint local transforms (child axes / origin in parent coords)."""
    n = arr.n
    Rs = np.empty((n, 3, 3))
    rs = np.empty((n, 3))
    for i in range(n):
        Rs[i], rs[i] = _joint_Rr(arr, i, q[i])
    return Rs, rs


def fk(arr, q):
    """World rotations/origins of all joint frames and the tool point."""
    n = arr.n
    R_w = np.empty((n, 3, 3))
    p_w = np.empty((n, 3))
    R = np.eye(3)
    p = np.zeros(3)
    for i in range(n):
        Rj, rj = _joint_Rr(arr, i, q[i])
        p = p + R @ rj
        R = R @ Rj
        R_w[i] = R
        p_w[i] = p
    tool = p_w[n - 1] + R_w[n - 1] @ arr.tool
    return R_w, p_w, tool


def jacobian(arr, q):
    """World task Jacobian at the tool point."""
    n = arr.n
    R_w, p_w, tool = fk(arr, q)
    J = np.zeros((6, n))
    for i in range(n):
        if arr.is_rev[i]:
            a = R_w[i] @ arr.axis[i]
            J[:3, i] = np.cross(a, tool - p_w[i])
            J[3:, i] = a
        else:
            J[:3, i] = R_w[i] @ arr.axis[i]
    return J


def vel_acc(arr, q, qd, qdd):
    """Body twists and true spatial accelerations, body coordinates."""
    n = arr.n
    V = np.empty((n, 6))
    A = np.empty((n, 6))
    v = np.zeros(6)
    a = np.zeros(6)
    for i in range(n):
        Rj, rj = _joint_Rr(arr, i, q[i])
        s = arr.screws[i]
        v = _to_child(Rj, rj, v) + s * qd[i]
        a = _to_child(Rj, rj, a) + s * qdd[i] + _mcross(v) @ (s * qd[i])
        V[i] = v
        A[i] = a
    return V, A


def velocities(arr, q, qd):
    return vel_acc(arr, q, qd, np.zeros(arr.n))[0]


def _force_to_parent(R, r, w6):
    f = R @ w6[:3]
    m = R @ w6[3:] + np.cross(r, f)
    return np.concatenate([f, m])


def rnea(arr, q, qd, qdd, gravity, tip_wrench_world=None):
    """Inverse dynamics: joint torques and per-body net wrenches.

    Gravity enters through a fictitious base acceleration; `tip_wrench_world`
    is an external [force; moment] on the tool point in world axes.
    """
    n = arr.n
    Rs = []
    rs = []
    v = np.zeros(6)
    a = np.concatenate([-np.asarray(gravity, dtype=float), np.zeros(3)])
    net = np.empty((n, 6))
    for i in range(n):
        Rj, rj = _joint_Rr(arr, i, q[i])
        s = arr.screws[i]
        v = _to_child(Rj, rj, v) + s * qd[i]
        a = _to_child(Rj, rj, a) + s * qdd[i] + _mcross(v) @ (s * qd[i])
        Rs.append(Rj)
        rs.append(rj)
        M = arr.M_body[i]
        h = M @ v
        vx = _mcross(v)
        net[i] = M @ a - vx.T @ h

    if tip_wrench_world is not None:
        R_w, p_w, tool = fk(arr, q)
        fw = np.asarray(tip_wrench_world, dtype=float)
        f_local = R_w[n - 1].T @ fw[:3]
        m_local = R_w[n - 1].T @ fw[3:] + np.cross(arr.tool, f_local)
        net[n - 1] -= np.concatenate([f_local, m_local])

    tau = np.zeros(n)
    wrenches = np.empty((n, 6))
    w = np.zeros(6)
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            w = net[i] + _force_to_parent(Rs[i + 1], rs[i + 1], w)
        else:
            w = net[i].copy()
        wrenches[i] = w
        tau[i] = arr.screws[i] @ w
    return tau, wrenches


def mass_matrix(arr, q):
    """Joint-space mass matrix via unit-acceleration sweeps, zero gravity."""
    n = arr.n
    M = np.empty((n, n))
    zero3 = np.zeros(3)
    zeron = np.zeros(n)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = rnea(arr, q, zeron, e, zero3)[0]
    return 0.5 * (M + M.T)


def observer_terms(arr, q, qd, qdd, gravity, tip_wrench_world):
    """Per-body momenta H and force terms for the residual loops.

    H_i = M_i V_i; the force term is M_i A_i minus the image of the tip
    wrench on body i (the model-side wrench with the contact removed), all in
    body coordinates.  Gravity cancels identically in this combination, so it
    is accepted only for signature parity.
    """
    n = arr.n
    R_w, p_w, tool = fk(arr, q)
    V, A = vel_acc(arr, q, qd, qdd)
    H = np.einsum("nij,nj->ni", arr.M_body, V)
    F = np.einsum("nij,nj->ni", arr.M_body, A)
    fw = np.asarray(tip_wrench_world, dtype=float)
    for i in range(n):
        # tip wrench image: world wrench at the tool point seen from frame i
        f_local = R_w[i].T @ fw[:3]
        m_local = R_w[i].T @ (fw[3:] + np.cross(tool - p_w[i], fw[:3]))
        F[i] -= np.concatenate([f_local, m_local])
    return H, F, V


def body_jacobians(arr, q):
    """Motion maps from joint rates to each body twist: V_i = B_i(q) qdot.

    Returned as (n, 6, n); column j of B_i is the screw of joint j carried
    into frame i (zero for j > i).
    """
    n = arr.n
    B = np.zeros((n, 6, n))
    Rs = []
    rs = []
    for i in range(n):
        Rj, rj = _joint_Rr(arr, i, q[i])
        Rs.append(Rj)
        rs.append(rj)
        if i > 0:
            for j in range(i):
                B[i, :, j] = _to_child(Rs[i], rs[i], B[i - 1, :, j])
        B[i, :, i] = arr.screws[i]
    return B
