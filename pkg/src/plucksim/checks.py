"""Cross-module numeric invariant suite backing the `check` subcommand.

Every check returns (passed, measured, threshold); the registry order is the
report order.  All randomness is seeded so the report is reproducible.
"""

from __future__ import annotations

import numpy as np

from . import adaptive, impedance, model, observer, simulate, spatial, trajectory


def _rng():
    return np.random.default_rng(20240615)


def _random_params(rng):
    m = rng.uniform(0.5, 40.0)
    com = rng.normal(size=3) * 0.3
    A = rng.normal(size=(3, 3)) * 0.5
    return model.InertialParams.from_com(m, com, A @ A.T + np.eye(3) * rng.uniform(0.3, 2.0))


def _random_transform(rng, frm, to):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    R = model.rotation_about(axis, rng.uniform(-np.pi, np.pi))
    return spatial.SpatialTransform(R, rng.normal(size=3), frm, to)


def check_transform_power_invariance(n=300):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        U = _random_transform(rng, "b", "a")
        v_b = spatial.SpatialMotionVector.from_array(rng.normal(size=6), "b")
        f_b = spatial.SpatialForceVector.from_array(rng.normal(size=6), "b")
        v_a = spatial.transform_motion(U, v_b)
        f_a = spatial.transform_force(U, f_b)
        worst = max(worst, abs(v_a.dot(f_a) - v_b.dot(f_b)))
    return worst < 1e-12 * 100.0, worst, 1e-12 * 100.0


def check_transform_composition(n=200):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        U_ab = _random_transform(rng, "b", "a")
        U_bc = _random_transform(rng, "c", "b")
        U_ac = U_ab.compose(U_bc)
        f_c = spatial.SpatialForceVector.from_array(rng.normal(size=6), "c")
        direct = spatial.transform_force(U_ac, f_c).as_array()
        stepped = spatial.transform_force(U_ab, spatial.transform_force(U_bc, f_c)).as_array()
        worst = max(worst, float(np.max(np.abs(direct - stepped))))
    return worst < 1e-12 * 100.0, worst, 1e-12 * 100.0


def check_dual_pairing(n=300):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        v, w, f = (rng.normal(size=6) for _ in range(3))
        a = (spatial.motion_cross(v) @ w) @ f
        b = w @ (spatial.force_cross_dual(v) @ f)
        worst = max(worst, abs(a + b))
    return worst < 1e-12 * 100.0, worst, 1e-12 * 100.0


def check_inertia_positive_definite(n=200):
    rng = _rng()
    worst = np.inf
    for _ in range(n):
        p = _random_params(rng)
        M = spatial.inertia_from_params(p.mass, p.first_moment / p.mass, np.eye(3) * rng.uniform(0.2, 3.0))
        worst = min(worst, M.min_eigenvalue())
    return worst > 0.0, worst, 0.0


def check_inertia_rate(n=200):
    rng = _rng()
    worst_sym = 0.0
    worst_fd = 0.0
    for _ in range(n):
        p = _random_params(rng)
        Mi = p.spatial_inertia("b")
        v = spatial.SpatialMotionVector.from_array(rng.normal(size=6), "b")
        rate = spatial.inertia_rate(Mi, v)
        worst_sym = max(worst_sym, float(np.max(np.abs(rate - rate.T))))
        fd = _inertia_rate_fd(p, v)
        scale = max(1.0, float(np.max(np.abs(rate))))
        worst_fd = max(worst_fd, float(np.max(np.abs(rate - fd))) / scale)
    passed = worst_sym < 1e-12 and worst_fd < 1e-5
    return passed, worst_fd, 1e-5


def _inertia_rate_fd(params, v, dt=1e-7):
    """Central difference of the fixed-frame inertia under a body twist."""

    def M_at(sign):
        w = v.angular
        ang = np.linalg.norm(w) * dt * sign
        R = model.rotation_about(w / np.linalg.norm(w), ang) if np.linalg.norm(w) > 0 else np.eye(3)
        p = v.linear * dt * sign
        U = np.zeros((6, 6))
        U[:3, :3] = R
        U[3:, 3:] = R
        U[3:, :3] = spatial.skew(p) @ R
        return U @ params.spatial_inertia().matrix @ U.T

    return (M_at(1.0) - M_at(-1.0)) / (2.0 * dt)


def check_regressor_identity(n=300):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        p = _random_params(rng)
        v = spatial.SpatialMotionVector.from_array(rng.normal(size=6), "b")
        vd = rng.normal(size=6)
        g = rng.normal(size=3) * 9.81
        lhs = model.net_body_force(p, v, vd, g).as_array()
        rhs = model.regressor(vd, v.as_array(), v.as_array(), g) @ p.as_vector()
        scale = max(1.0, float(np.max(np.abs(lhs))))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    return worst < 1e-9, worst, 1e-9


def check_pseudo_inertia_roundtrip(n=300):
    rng = _rng()
    worst = 0.0
    for _ in range(n):
        phi = rng.normal(size=10)
        p = model.InertialParams.from_vector(phi)
        back = model.pseudo_to_phi(model.phi_to_pseudo(p)).as_vector()
        worst = max(worst, float(np.max(np.abs(back - p.as_vector()))))
        # linearity of the map
        phi2 = rng.normal(size=10)
        a, b = rng.normal(size=2)
        lin = model.phi_to_pseudo(model.InertialParams.from_vector(a * phi + b * phi2)).matrix
        sep = a * model.phi_to_pseudo(p).matrix + b * model.phi_to_pseudo(model.InertialParams.from_vector(phi2)).matrix
        worst = max(worst, float(np.max(np.abs(lin - sep))))
    return worst < 1e-10, worst, 1e-10


def check_bregman(n=300):
    rng = _rng()
    min_value = np.inf
    for _ in range(n):
        A = rng.normal(size=(4, 4))
        L = model.PseudoInertia(A @ A.T + 0.1 * np.eye(4))
        B = rng.normal(size=(4, 4))
        Lh = model.PseudoInertia(B @ B.T + 0.1 * np.eye(4))
        min_value = min(min_value, adaptive.bregman_divergence(L, Lh))
    spot = adaptive.bregman_divergence(np.eye(4), 2.0 * np.eye(4))
    spot_err = abs(spot - (4.0 * np.log(2.0) - 2.0))
    self_val = adaptive.bregman_divergence(np.eye(4) * 3.0, np.eye(4) * 3.0)
    passed = min_value >= 0.0 and spot_err < 1e-12 and abs(self_val) < 1e-12
    return passed, spot_err, 1e-12


def check_build_s_pairing():
    rng = _rng()
    worst = 0.0
    Y = rng.normal(size=(6, 10))
    verr = rng.normal(size=6)
    S = adaptive.build_S(Y, verr)
    for i in range(10):
        e = np.zeros(10)
        e[i] = 1.0
        lhs = float(np.sum(S * model.phi_to_pseudo(model.InertialParams.from_vector(e)).matrix))
        rhs = float(verr @ Y @ e)
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-12 * max(1.0, float(np.max(np.abs(Y)))), worst, 1e-12


def check_nal_definiteness(n=2000):
    rng = _rng()
    state = adaptive.NalState(model.phi_to_pseudo(_random_params(rng)), gamma=500.0, gamma0=1e-3)
    min_eig = np.inf
    for _ in range(n):
        S = rng.normal(size=(4, 4))
        adaptive.nal_step(state, S + S.T, 1e-3)
        min_eig = min(min_eig, state.pseudo.min_eigenvalue())
    return min_eig > 0.0, min_eig, 0.0


def check_quaternion_error(n=500):
    rng = _rng()
    ok = True
    worst = 0.0
    for _ in range(n):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        R = model.rotation_about(axis, rng.uniform(-np.pi, np.pi))
        q = model.quaternion_from_matrix(R)
        sign = -1.0 if rng.random() < 0.5 else 1.0
        e = impedance.quaternion_error(sign * q[0], sign * q[1:], q[0], q[1:])
        worst = max(worst, float(np.linalg.norm(e)))
        # distinct rotations must yield a nonzero error
        R2 = R @ model.rotation_about(axis, 0.3)
        q2 = model.quaternion_from_matrix(R2)
        e2 = impedance.quaternion_error(q2[0], q2[1:], q[0], q[1:])
        ok = ok and float(np.linalg.norm(e2)) > 1e-3
    return ok and worst < 1e-9, worst, 1e-9


def check_quintic():
    seg = trajectory.QuinticSegment(np.array([1.0, -2.0]), np.array([3.0, 4.0]), 2.5)
    x0, v0, a0 = trajectory.quintic(seg, 0.0)
    x1, v1, a1 = trajectory.quintic(seg, 2.5)
    xm, vm, _ = trajectory.quintic(seg, 1.25)
    worst = max(
        float(np.max(np.abs(x0 - seg.start))),
        float(np.max(np.abs(x1 - seg.end))),
        float(np.max(np.abs(v0))),
        float(np.max(np.abs(v1))),
        float(np.max(np.abs(a0))),
        float(np.max(np.abs(a1))),
        float(np.max(np.abs(xm - 0.5 * (seg.start + seg.end)))),
    )
    peak = float(np.max(np.abs(vm)))
    expected = 15.0 / 8.0 * abs(seg.end[1] - seg.start[1]) / seg.duration
    worst = max(worst, abs(peak - expected))
    return worst < 1e-12, worst, 1e-12


def check_environment_unilateral(n=500):
    rng = _rng()
    env = simulate.Environment(normal=[0.0, -1.0, 0.0], offset=-0.2, stiffness=1e5, damping=2e3)
    worst = np.inf
    for _ in range(n):
        p = rng.normal(size=3)
        v = rng.normal(size=3) * 2.0
        f, _ = simulate.environment_force(env, p, v)
        worst = min(worst, float(f[:3] @ env.normal))
    return worst >= 0.0, worst, 0.0


def check_lemma1_gains(n=200):
    rng = _rng()
    spec = impedance.ImpedanceSpec(
        stiffness=np.array([1e6, 7.5e3, 0.7e6, 1.2e6, 1.2e6, 1.2e6]),
        damping=np.array([1e5, 1.6667e3, 1e5, 1e5, 1e5, 1e5]),
    )
    gains = impedance.derive_gains(spec)
    worst_ok = 0.0
    worst_perturbed = np.inf
    for _ in range(n):
        e = rng.normal(size=6) * 0.05
        edot = rng.normal(size=6) * 0.5
        p_t, scale = simulate.tip_vpf_terms(e, edot, spec.stiffness, spec.damping, gains.gamma, gains.sigma)
        worst_ok = max(worst_ok, abs(p_t) / scale)
        p_t2, scale2 = simulate.tip_vpf_terms(e, edot, spec.stiffness, spec.damping, 1.1 * gains.gamma, gains.sigma)
        worst_perturbed = min(worst_perturbed, abs(p_t2) / scale2)
    passed = worst_ok < 1e-9 and worst_perturbed > 1e-6
    return passed, worst_ok, 1e-9


def check_observer_dc():
    k = 80.0
    obs = observer.MomentumObserver(1, observer.ObserverConfig(gain=np.full(6, k), impact_threshold=1.0))
    f_d = np.array([5.0, -2.0, 1.0, 0.5, 0.0, -1.0])
    h = np.zeros((1, 6))
    screws = np.array([[0, 0, 0, 0, 0, 1.0]])
    for _ in range(int(1.0 / 1e-3)):
        obs.step(h, -f_d.reshape(1, 6), screws, None, 1e-3)
    err = float(np.max(np.abs(obs.residual[0] - f_d))) / float(np.max(np.abs(f_d)))
    return err < 5e-3, err, 5e-3


REGISTRY = [
    ("transform_power_invariance", check_transform_power_invariance),
    ("transform_composition", check_transform_composition),
    ("dual_pairing", check_dual_pairing),
    ("inertia_positive_definite", check_inertia_positive_definite),
    ("inertia_rate_fd", check_inertia_rate),
    ("regressor_identity", check_regressor_identity),
    ("pseudo_inertia_roundtrip", check_pseudo_inertia_roundtrip),
    ("bregman_divergence", check_bregman),
    ("build_s_pairing", check_build_s_pairing),
    ("nal_definiteness", check_nal_definiteness),
    ("quaternion_error", check_quaternion_error),
    ("quintic_boundary", check_quintic),
    ("environment_unilateral", check_environment_unilateral),
    ("lemma1_gain_conditions", check_lemma1_gains),
    ("observer_dc_gain", check_observer_dc),
]


def run_all():
    """Run every registered check; yields (name, passed, measured, threshold)."""
    for name, fn in REGISTRY:
        passed, measured, threshold = fn()
        yield name, bool(passed), float(measured), float(threshold)
