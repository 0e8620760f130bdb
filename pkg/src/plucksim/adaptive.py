"""Body-level adaptive control: RBF uncertainty estimator and the natural
adaptation law on the manifold of positive-definite pseudo-inertia matrices.

The adaptation flow L' = (1/gamma) L (S - gamma0 L) L stays on the manifold in
continuous time; the discrete stepper guards positive definiteness by halving
the step when an update would leave it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import InertialParams, PseudoInertia, phi_to_pseudo


class AdaptationError(RuntimeError):
    """Raised when a discrete adaptation step cannot preserve definiteness."""


@dataclass
class RbfNetwork:
    """Gaussian RBF estimator of the unmodeled body wrench.

    `centers` is (n_centers, dim), `widths` (n_centers,), `weights`
    (n_centers, 6) and `bias` (6,).  `weight_gain` (Pi), `bias_gain` (pi) and
    the leakage rates `weight_leak` (tau0) / `bias_leak` (pi0) drive the
    adaptation laws.
    """

    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray = None
    bias: np.ndarray = None
    weight_gain: float = 300.0
    bias_gain: float = 10.0
    weight_leak: float = 1e-3
    bias_leak: float = 1e-3

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.widths = np.asarray(self.widths, dtype=float).reshape(self.centers.shape[0])
        if np.any(self.widths <= 0.0):
            raise ValueError("RBF widths must be positive")
        if self.weights is None:
            self.weights = np.zeros((self.centers.shape[0], 6))
        else:
            self.weights = np.asarray(self.weights, dtype=float).reshape(self.centers.shape[0], 6)
        if self.bias is None:
            self.bias = np.zeros(6)
        else:
            self.bias = np.asarray(self.bias, dtype=float).reshape(6)
        if min(self.weight_gain, self.bias_gain) <= 0.0 or min(self.weight_leak, self.bias_leak) < 0.0:
            raise ValueError("adaptation gains must be positive (leaks non-negative)")

    @classmethod
    def lattice(cls, low, high, n_centers=32, **gains):
        """Deterministic quasi-random center lattice over a box envelope.

        Halton points fill the envelope reproducibly without a seed; the
        width is the typical nearest-neighbour spacing of the lattice.
        """
        low = np.asarray(low, dtype=float)
        high = np.asarray(high, dtype=float)
        dim = low.size
        pts = _halton(n_centers, dim)
        centers = low + pts * (high - low)
        width = float(np.linalg.norm(high - low)) / max(n_centers ** (1.0 / dim), 2.0)
        return cls(centers=centers, widths=np.full(n_centers, width), **gains)


def _halton(n, dim):
    """First n points of the Halton sequence in [0, 1]^dim."""
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
    while len(primes) < dim:
        primes.append(primes[-1] + 2)  # crude but deterministic padding
    out = np.empty((n, dim))
    for j in range(dim):
        base = primes[j]
        for i in range(n):
            f, r = 1.0, 0.0
            k = i + 1
            while k > 0:
                f /= base
                r += f * (k % base)
                k //= base
            out[i, j] = r
    return out


def rbf_eval(net: RbfNetwork, chi):
    """Gaussian activations exp(-||chi - c_i||^2 / w_i^2), each in (0, 1]."""
    chi = np.asarray(chi, dtype=float).reshape(-1)
    if chi.size != net.centers.shape[1]:
        raise ValueError(f"RBF input dim {chi.size} != center dim {net.centers.shape[1]}")
    d2 = np.sum((net.centers - chi) ** 2, axis=1)
    return np.exp(-d2 / net.widths**2)


def uncertainty_estimate(net: RbfNetwork, psi):
    """Estimated unmodeled wrench W^T Psi + bias."""
    return net.weights.T @ np.asarray(psi, dtype=float) + net.bias


def adapt_step(net: RbfNetwork, psi, velocity_error, dt):
    """Explicit-Euler update of the RBF weights and bias with leakage."""
    psi = np.asarray(psi, dtype=float).reshape(-1)
    verr = np.asarray(velocity_error, dtype=float).reshape(6)
    net.weights += dt * net.weight_gain * (np.outer(psi, verr) - net.weight_leak * net.weights)
    net.bias += dt * net.bias_gain * (verr - net.bias_leak * net.bias)
    return net


@dataclass
class NalState:
    """Pseudo-inertia estimate plus the adaptation gains."""

    pseudo: PseudoInertia
    gamma: float = 500.0
    gamma0: float = 1e-3

    def __post_init__(self):
        if self.gamma <= 0.0 or self.gamma0 <= 0.0:
            raise ValueError("gamma and gamma0 must be positive")
        if not self.pseudo.is_positive_definite():
            raise ValueError("initial pseudo-inertia must be positive definite")


class _PairingBasis:
    """Cached solver for the pullback of phi-space functionals to S(4).

    tr(S f(phi)) = c . phi for all phi has a unique symmetric solution S; the
    10x10 Gram matrix of the basis images f(e_i) is built once.
    """

    def __init__(self):
        self.images = []
        for i in range(10):
            e = np.zeros(10)
            e[i] = 1.0
            self.images.append(phi_to_pseudo(InertialParams.from_vector(e)).matrix)
        gram = np.array([[np.sum(a * b) for b in self.images] for a in self.images])
        self._solve = np.linalg.inv(gram)
        self.images = np.array(self.images)

    def pullback(self, c):
        alpha = self._solve @ np.asarray(c, dtype=float).reshape(10)
        return np.einsum("i,ijk->jk", alpha, self.images)


_BASIS = _PairingBasis()


def build_S(regressor_matrix, velocity_error):
    """Symmetric 4x4 matrix S with tr(S f(phi)) = verr . (Y phi) for all phi."""
    c = np.asarray(regressor_matrix, dtype=float).T @ np.asarray(velocity_error, dtype=float).reshape(6)
    return _BASIS.pullback(c)


def nal_step(state: NalState, S, dt, max_halvings=10):
    """One step of the natural adaptation law, preserving definiteness.

    The explicit-Euler increment (dt/gamma) L (S - gamma0 L) L is halved up to
    `max_halvings` times if it would destroy positive definiteness; running
    out of halvings raises AdaptationError (dt or gamma misconfigured).
    """
    S = np.asarray(S, dtype=float)
    S = 0.5 * (S + S.T)
    L = state.pseudo.matrix
    step = dt
    for _ in range(max_halvings + 1):
        inc = (step / state.gamma) * (L @ (S - state.gamma0 * L) @ L)
        candidate = L + 0.5 * (inc + inc.T)
        try:
            np.linalg.cholesky(candidate)
        except np.linalg.LinAlgError:
            step *= 0.5
            continue
        state.pseudo = PseudoInertia(candidate)
        return state
    raise AdaptationError("NAL step lost positive definiteness after halvings")


def bregman_divergence(L: PseudoInertia | np.ndarray, L_hat: PseudoInertia | np.ndarray):
    """Log-det Bregman divergence log(|Lh|/|L|) + tr(Lh^-1 L) - 4, >= 0."""
    A = L.matrix if isinstance(L, PseudoInertia) else np.asarray(L, dtype=float)
    B = L_hat.matrix if isinstance(L_hat, PseudoInertia) else np.asarray(L_hat, dtype=float)
    try:
        chol_a = np.linalg.cholesky(A)
        chol_b = np.linalg.cholesky(B)
    except np.linalg.LinAlgError as exc:
        raise ValueError("bregman_divergence needs positive definite inputs") from exc
    logdet_a = 2.0 * np.sum(np.log(np.diag(chol_a)))
    logdet_b = 2.0 * np.sum(np.log(np.diag(chol_b)))
    W = np.linalg.solve(chol_b, chol_a)
    return float(logdet_b - logdet_a + np.sum(W * W) - A.shape[0])


def required_net_force(regressor_matrix, phi_hat, feedback_gain, velocity_error, delta_hat=None):
    """Control wrench Y phi_hat + K (v_r - v) + Delta_hat for one body."""
    out = np.asarray(regressor_matrix, dtype=float) @ np.asarray(phi_hat, dtype=float).reshape(10)
    out += np.asarray(feedback_gain, dtype=float) @ np.asarray(velocity_error, dtype=float).reshape(6)
    if delta_hat is not None:
        out += np.asarray(delta_hat, dtype=float).reshape(6)
    return out


def required_spatial_force(f_star_r, u_body_tip, f_r_tip):
    """Cutting-point wrench F*_r + U f_r for the tool body.

    `u_body_tip` is the 6x6 wrench map from the tip frame into the tool body
    frame.
    """
    return np.asarray(f_star_r, dtype=float) + np.asarray(u_body_tip, dtype=float) @ np.asarray(
        f_r_tip, dtype=float
    ).reshape(6)
