# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementation of the chain kernels.

Mirrors `_pykernels` function by function on the same flat model arrays; the
pure-numpy module is the reference, this one is the fast path picked at
import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


cdef inline void _skew_mul(double ax, double ay, double az,
                           double bx, double by, double bz, double* out) nogil:
    out[0] = ay * bz - az * by
    out[1] = az * bx - ax * bz
    out[2] = ax * by - ay * bx


cdef inline void _rot_axis(double* a, double angle, double* R) nogil:
    # Rodrigues formula for a unit axis, row-major 3x3 output
    cdef double c = cos(angle)
    cdef double s = sin(angle)
    cdef double v = 1.0 - c
    R[0] = c + a[0] * a[0] * v
    R[1] = a[0] * a[1] * v - a[2] * s
    R[2] = a[0] * a[2] * v + a[1] * s
    R[3] = a[1] * a[0] * v + a[2] * s
    R[4] = c + a[1] * a[1] * v
    R[5] = a[1] * a[2] * v - a[0] * s
    R[6] = a[2] * a[0] * v - a[1] * s
    R[7] = a[2] * a[1] * v + a[0] * s
    R[8] = c + a[2] * a[2] * v


cdef inline void _mat3_mul(double* A, double* B, double* C) nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            C[3 * i + j] = A[3 * i] * B[j] + A[3 * i + 1] * B[3 + j] + A[3 * i + 2] * B[6 + j]


cdef inline void _mat3_vec(double* A, double* b, double* c) nogil:
    cdef int i
    for i in range(3):
        c[i] = A[3 * i] * b[0] + A[3 * i + 1] * b[1] + A[3 * i + 2] * b[2]


cdef inline void _mat3T_vec(double* A, double* b, double* c) nogil:
    cdef int i
    for i in range(3):
        c[i] = A[i] * b[0] + A[3 + i] * b[1] + A[6 + i] * b[2]


cdef inline void _joint_Rr(double[:, :, ::1] offs_R, double[:, ::1] offs_r,
                           double[:, ::1] axis, long[::1] is_rev,
                           int i, double qi, double* R, double* r) nogil:
    cdef double Rq[9]
    cdef double a[3]
    cdef double step[3]
    cdef double R0[9]
    cdef int k
    for k in range(9):
        R0[k] = offs_R[i, k // 3, k % 3]
    a[0] = axis[i, 0]
    a[1] = axis[i, 1]
    a[2] = axis[i, 2]
    if is_rev[i]:
        _rot_axis(a, qi, Rq)
        _mat3_mul(R0, Rq, R)
        r[0] = offs_r[i, 0]
        r[1] = offs_r[i, 1]
        r[2] = offs_r[i, 2]
    else:
        for k in range(9):
            R[k] = R0[k]
        a[0] *= qi
        a[1] *= qi
        a[2] *= qi
        _mat3_vec(R0, a, step)
        r[0] = offs_r[i, 0] + step[0]
        r[1] = offs_r[i, 1] + step[1]
        r[2] = offs_r[i, 2] + step[2]


cdef inline void _to_child(double* R, double* r, double* v, double* out) nogil:
    # twist re-expression parent -> child: lin = R^T (v_lin + v_ang x r)
    cdef double tmp[3]
    _skew_mul(v[3], v[4], v[5], r[0], r[1], r[2], tmp)
    tmp[0] += v[0]
    tmp[1] += v[1]
    tmp[2] += v[2]
    _mat3T_vec(R, tmp, out)
    _mat3T_vec(R, v + 3, out + 3)


cdef inline void _mcross_apply(double* v, double* m, double* out) nogil:
    # motion cross: out = [w x m_lin + v_lin x m_ang; w x m_ang]
    cdef double t1[3]
    cdef double t2[3]
    _skew_mul(v[3], v[4], v[5], m[0], m[1], m[2], t1)
    _skew_mul(v[0], v[1], v[2], m[3], m[4], m[5], t2)
    out[0] = t1[0] + t2[0]
    out[1] = t1[1] + t2[1]
    out[2] = t1[2] + t2[2]
    _skew_mul(v[3], v[4], v[5], m[3], m[4], m[5], out + 3)


cdef inline void _dualcross_apply(double* v, double* f, double* out) nogil:
    # force (dual) cross: out = [w x f; w x m + v_lin x f]
    cdef double t[3]
    _skew_mul(v[3], v[4], v[5], f[0], f[1], f[2], out)
    _skew_mul(v[3], v[4], v[5], f[3], f[4], f[5], out + 3)
    _skew_mul(v[0], v[1], v[2], f[0], f[1], f[2], t)
    out[3] += t[0]
    out[4] += t[1]
    out[5] += t[2]


cdef inline void _m6_vec(double[:, :, ::1] M, int i, double* x, double* y) nogil:
    cdef int a, b
    for a in range(6):
        y[a] = 0.0
        for b in range(6):
            y[a] += M[i, a, b] * x[b]


cdef void _chain_frames(double[:, :, ::1] offs_R, double[:, ::1] offs_r,
                        double[:, ::1] axis, long[::1] is_rev,
                        double[::1] q, int n, double* Rj_all, double* rj_all,
                        double* Rw_all, double* pw_all) nogil:
    cdef double Racc[9]
    cdef double pacc[3]
    cdef double tmpR[9]
    cdef double tmpv[3]
    cdef int i, k
    for k in range(9):
        Racc[k] = 1.0 if k % 4 == 0 else 0.0
    pacc[0] = pacc[1] = pacc[2] = 0.0
    for i in range(n):
        _joint_Rr(offs_R, offs_r, axis, is_rev, i, q[i], Rj_all + 9 * i, rj_all + 3 * i)
        _mat3_vec(Racc, rj_all + 3 * i, tmpv)
        pacc[0] += tmpv[0]
        pacc[1] += tmpv[1]
        pacc[2] += tmpv[2]
        _mat3_mul(Racc, Rj_all + 9 * i, tmpR)
        for k in range(9):
            Racc[k] = tmpR[k]
            Rw_all[9 * i + k] = tmpR[k]
        for k in range(3):
            pw_all[3 * i + k] = pacc[k]


def joint_local(arr, double[::1] q):
    cdef int n = arr.n
    cdef double[:, :, ::1] offs_R = arr.offs_R
    cdef double[:, ::1] offs_r = arr.offs_r
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    Rs = np.empty((n, 3, 3))
    rs = np.empty((n, 3))
    cdef double[:, :, ::1] Rs_v = Rs
    cdef double[:, ::1] rs_v = rs
    cdef double R[9]
    cdef double r[3]
    cdef int i, k
    for i in range(n):
        _joint_Rr(offs_R, offs_r, axis, is_rev, i, q[i], R, r)
        for k in range(9):
            Rs_v[i, k // 3, k % 3] = R[k]
        for k in range(3):
            rs_v[i, k] = r[k]
    return Rs, rs


def fk(arr, double[::1] q):
    cdef int n = arr.n
    cdef double[:, :, ::1] offs_R = arr.offs_R
    cdef double[:, ::1] offs_r = arr.offs_r
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    cdef double[::1] tool = arr.tool
    R_w = np.empty((n, 3, 3))
    p_w = np.empty((n, 3))
    tip = np.empty(3)
    cdef double[:, :, ::1] Rw_v = R_w
    cdef double[:, ::1] pw_v = p_w
    cdef double[::1] tip_v = tip
    # numpy scratch buffers kept alive by the local references
    scratch_Rj = np.empty(9 * n)
    scratch_rj = np.empty(3 * n)
    scratch_Rw = np.empty(9 * n)
    scratch_pw = np.empty(3 * n)
    cdef double[::1] sRj = scratch_Rj
    cdef double[::1] srj = scratch_rj
    cdef double[::1] sRw = scratch_Rw
    cdef double[::1] spw = scratch_pw
    cdef int i, k
    _chain_frames(offs_R, offs_r, axis, is_rev, q, n, &sRj[0], &srj[0], &sRw[0], &spw[0])
    for i in range(n):
        for k in range(9):
            Rw_v[i, k // 3, k % 3] = sRw[9 * i + k]
        for k in range(3):
            pw_v[i, k] = spw[3 * i + k]
    cdef double tl[3]
    _mat3_vec(&sRw[9 * (n - 1)], &tool[0], tl)
    for k in range(3):
        tip_v[k] = spw[3 * (n - 1) + k] + tl[k]
    return R_w, p_w, tip


def jacobian(arr, double[::1] q):
    cdef int n = arr.n
    R_w, p_w, tip = fk(arr, q)
    cdef double[:, :, ::1] Rw_v = R_w
    cdef double[:, ::1] pw_v = p_w
    cdef double[::1] tip_v = tip
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    J = np.zeros((6, n))
    cdef double[:, ::1] J_v = J
    cdef double a[3]
    cdef double aw[3]
    cdef double lever[3]
    cdef double col[3]
    cdef double Rw[9]
    cdef int i, k
    for i in range(n):
        for k in range(9):
            Rw[k] = Rw_v[i, k // 3, k % 3]
        a[0] = axis[i, 0]
        a[1] = axis[i, 1]
        a[2] = axis[i, 2]
        _mat3_vec(Rw, a, aw)
        if is_rev[i]:
            lever[0] = tip_v[0] - pw_v[i, 0]
            lever[1] = tip_v[1] - pw_v[i, 1]
            lever[2] = tip_v[2] - pw_v[i, 2]
            _skew_mul(aw[0], aw[1], aw[2], lever[0], lever[1], lever[2], col)
            for k in range(3):
                J_v[k, i] = col[k]
                J_v[3 + k, i] = aw[k]
        else:
            for k in range(3):
                J_v[k, i] = aw[k]
    return J


def vel_acc(arr, double[::1] q, double[::1] qd, double[::1] qdd):
    cdef int n = arr.n
    cdef double[:, :, ::1] offs_R = arr.offs_R
    cdef double[:, ::1] offs_r = arr.offs_r
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    cdef double[:, ::1] screws = arr.screws
    V = np.empty((n, 6))
    A = np.empty((n, 6))
    cdef double[:, ::1] V_v = V
    cdef double[:, ::1] A_v = A
    cdef double R[9]
    cdef double r[3]
    cdef double v[6]
    cdef double a[6]
    cdef double sq[6]
    cdef double tmp[6]
    cdef int i, k
    for k in range(6):
        v[k] = 0.0
        a[k] = 0.0
    for i in range(n):
        _joint_Rr(offs_R, offs_r, axis, is_rev, i, q[i], R, r)
        _to_child(R, r, v, tmp)
        for k in range(6):
            sq[k] = screws[i, k] * qd[i]
            v[k] = tmp[k] + sq[k]
        _to_child(R, r, a, tmp)
        _mcross_apply(v, sq, a)  # a temporarily holds v x (s qd)
        for k in range(6):
            a[k] = tmp[k] + screws[i, k] * qdd[i] + a[k]
        for k in range(6):
            V_v[i, k] = v[k]
            A_v[i, k] = a[k]
    return V, A


def velocities(arr, double[::1] q, double[::1] qd):
    return vel_acc(arr, q, qd, np.zeros(arr.n))[0]


def rnea(arr, double[::1] q, double[::1] qd, double[::1] qdd, gravity, tip_wrench_world=None):
    cdef int n = arr.n
    cdef double[:, :, ::1] offs_R = arr.offs_R
    cdef double[:, ::1] offs_r = arr.offs_r
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    cdef double[:, ::1] screws = arr.screws
    cdef double[:, :, ::1] M_body = arr.M_body
    g_arr = np.ascontiguousarray(gravity, dtype=np.float64)
    cdef double[::1] g = g_arr

    tau = np.zeros(n)
    wrenches = np.empty((n, 6))
    cdef double[::1] tau_v = tau
    cdef double[:, ::1] w_v = wrenches

    scratch = np.empty((n, 12))
    cdef double[:, ::1] Rr = scratch  # per-joint local R (9) and r (3)
    net = np.empty((n, 6))
    cdef double[:, ::1] net_v = net

    cdef double v[6]
    cdef double a[6]
    cdef double sq[6]
    cdef double tmp[6]
    cdef double h[6]
    cdef double cx[6]
    cdef int i, k
    for k in range(6):
        v[k] = 0.0
        a[k] = 0.0
    a[0] = -g[0]
    a[1] = -g[1]
    a[2] = -g[2]
    cdef double R[9]
    cdef double r[3]
    for i in range(n):
        _joint_Rr(offs_R, offs_r, axis, is_rev, i, q[i], R, r)
        for k in range(9):
            Rr[i, k] = R[k]
        for k in range(3):
            Rr[i, 9 + k] = r[k]
        _to_child(R, r, v, tmp)
        for k in range(6):
            sq[k] = screws[i, k] * qd[i]
            v[k] = tmp[k] + sq[k]
        _to_child(R, r, a, tmp)
        _mcross_apply(v, sq, cx)
        for k in range(6):
            a[k] = tmp[k] + screws[i, k] * qdd[i] + cx[k]
        _m6_vec(M_body, i, v, h)
        _m6_vec(M_body, i, a, tmp)
        _dualcross_apply(v, h, cx)
        for k in range(6):
            net_v[i, k] = tmp[k] + cx[k]

    if tip_wrench_world is not None:
        R_w, p_w, tip = fk(arr, q)
        fw_arr = np.ascontiguousarray(tip_wrench_world, dtype=np.float64)
        Rn_arr = np.ascontiguousarray(R_w[n - 1])
        _tip_into_net(net, fw_arr, Rn_arr, np.asarray(arr.tool))

    cdef double w[6]
    cdef double fpar[6]
    cdef double Rc[9]
    cdef double rc[3]
    for k in range(6):
        w[k] = 0.0
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            for k in range(9):
                Rc[k] = Rr[i + 1, k]
            for k in range(3):
                rc[k] = Rr[i + 1, 9 + k]
            _mat3_vec(Rc, w, fpar)
            _mat3_vec(Rc, w + 3, fpar + 3)
            _skew_mul(rc[0], rc[1], rc[2], fpar[0], fpar[1], fpar[2], tmp)
            for k in range(3):
                fpar[3 + k] += tmp[k]
            for k in range(6):
                w[k] = net_v[i, k] + fpar[k]
        else:
            for k in range(6):
                w[k] = net_v[i, k]
        tau_v[i] = 0.0
        for k in range(6):
            w_v[i, k] = w[k]
            tau_v[i] += screws[i, k] * w[k]
    return tau, wrenches


def _tip_into_net(double[:, ::1] net, double[::1] fw, double[:, ::1] Rn, double[::1] tool):
    cdef double f_local[3]
    cdef double m_local[3]
    cdef double R[9]
    cdef double tmp[3]
    cdef int k
    for k in range(9):
        R[k] = Rn[k // 3, k % 3]
    _mat3T_vec(R, &fw[0], f_local)
    _mat3T_vec(R, &fw[3], m_local)
    _skew_mul(tool[0], tool[1], tool[2], f_local[0], f_local[1], f_local[2], tmp)
    cdef int n = net.shape[0]
    for k in range(3):
        net[n - 1, k] -= f_local[k]
        net[n - 1, 3 + k] -= m_local[k] + tmp[k]


def mass_matrix(arr, double[::1] q):
    cdef int n = arr.n
    M = np.empty((n, n))
    cdef double[:, ::1] M_v = M
    zero3 = np.zeros(3)
    zeron = np.zeros(n)
    cdef int i, j
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        col = rnea(arr, q, zeron, e, zero3)[0]
        for i in range(n):
            M_v[i, j] = col[i]
    Ms = 0.5 * (M + M.T)
    return Ms


def observer_terms(arr, double[::1] q, double[::1] qd, double[::1] qdd, gravity, tip_wrench_world):
    cdef int n = arr.n
    cdef double[:, :, ::1] M_body = arr.M_body
    R_w, p_w, tip = fk(arr, q)
    V, A = vel_acc(arr, q, qd, qdd)
    H = np.empty((n, 6))
    F = np.empty((n, 6))
    cdef double[:, ::1] H_v = H
    cdef double[:, ::1] F_v = F
    cdef double[:, ::1] V_v = V
    cdef double[:, ::1] A_v = A
    cdef double[:, :, ::1] Rw_v = R_w
    cdef double[:, ::1] pw_v = p_w
    cdef double[::1] tip_v = tip
    fw_arr = np.ascontiguousarray(tip_wrench_world, dtype=np.float64)
    cdef double[::1] fw = fw_arr
    cdef double x[6]
    cdef double y[6]
    cdef double R[9]
    cdef double lever[3]
    cdef double mw[3]
    cdef double fl[3]
    cdef double ml[3]
    cdef int i, k
    for i in range(n):
        for k in range(6):
            x[k] = V_v[i, k]
        _m6_vec(M_body, i, x, y)
        for k in range(6):
            H_v[i, k] = y[k]
        for k in range(6):
            x[k] = A_v[i, k]
        _m6_vec(M_body, i, x, y)
        for k in range(9):
            R[k] = Rw_v[i, k // 3, k % 3]
        lever[0] = tip_v[0] - pw_v[i, 0]
        lever[1] = tip_v[1] - pw_v[i, 1]
        lever[2] = tip_v[2] - pw_v[i, 2]
        _skew_mul(lever[0], lever[1], lever[2], fw[0], fw[1], fw[2], mw)
        mw[0] += fw[3]
        mw[1] += fw[4]
        mw[2] += fw[5]
        _mat3T_vec(R, &fw[0], fl)
        _mat3T_vec(R, mw, ml)
        for k in range(3):
            F_v[i, k] = y[k] - fl[k]
            F_v[i, 3 + k] = y[3 + k] - ml[k]
    return H, F, V


def body_jacobians(arr, double[::1] q):
    cdef int n = arr.n
    cdef double[:, :, ::1] offs_R = arr.offs_R
    cdef double[:, ::1] offs_r = arr.offs_r
    cdef double[:, ::1] axis = arr.axis
    cdef long[::1] is_rev = arr.is_rev
    cdef double[:, ::1] screws = arr.screws
    B = np.zeros((n, 6, n))
    cdef double[:, :, ::1] B_v = B
    cdef double R[9]
    cdef double r[3]
    cdef double col[6]
    cdef double out[6]
    cdef int i, j, k
    for i in range(n):
        _joint_Rr(offs_R, offs_r, axis, is_rev, i, q[i], R, r)
        for j in range(i):
            for k in range(6):
                col[k] = B_v[i - 1, k, j]
            _to_child(R, r, col, out)
            for k in range(6):
                B_v[i, k, j] = out[k]
        for k in range(6):
            B_v[i, k, i] = screws[i, k]
    return B
