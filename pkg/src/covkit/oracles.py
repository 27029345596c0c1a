"""Independent checks of the matrix-exponential covariances.

Three routes that share no code with ``metrics.augmented_solution``:

* ``lde_integrate`` steps the Lyapunov differential equation of the augmented
  state block by block (RK4, or implicit trapezoid).
* ``van_loan_discretize`` gives the exact zero-order sampling of the
  stochastic system, used by
* ``monte_carlo_metrics`` which simulates trajectories and applies the
  displacement/smear/jitter definitions sample by sample.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InputError
from .linalg import expm, symmetrize
from .metrics import AugmentedSolution, check_analysable, state_covariance


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    Ad: np.ndarray
    Qd: np.ndarray
    h: float


@dataclass(frozen=True, eq=False)
class MonteCarloReport:
    est_A: np.ndarray
    est_D: np.ndarray
    est_S: np.ndarray
    est_J: np.ndarray
    stderr_A: np.ndarray
    stderr_D: np.ndarray
    stderr_S: np.ndarray
    stderr_J: np.ndarray
    n_trials: int
    seed: int
    T: float
    h: float

    def estimates(self):
        return {"A": self.est_A, "D": self.est_D, "S": self.est_S, "J": self.est_J}

    def stderrs(self):
        return {"A": self.stderr_A, "D": self.stderr_D, "S": self.stderr_S, "J": self.stderr_J}

    def z_scores(self, pc):
        """``(estimate - analytic) / stderr`` for each of A, D, S, J."""
        ref = {"A": pc.sigma_A, "D": pc.sigma_D, "S": pc.sigma_S, "J": pc.sigma_J}
        out = {}
        for k, est in self.estimates().items():
            se = self.stderrs()[k]
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(se > 0, (est - ref[k]) / se, 0.0)
            out[k] = z
        return out


# ---------------------------------------------------------------------------
# Lyapunov differential equation, integrated directly

_BLOCKS = ("P_xx", "P_xz1", "P_xz2", "P_z1z1", "P_z1z2", "P_z2z2",
           "Y_z1z1", "Y_z1z2", "W_z1z2", "Y_z2z2")


def _lde_rhs(state, A, BBt, C):
    Pxx, Pxz1, Pxz2, P11, P12, P22, Y11, Y12, W, Y22 = state
    return (
        A @ Pxx + Pxx @ A.T + BBt,
        A @ Pxz1 + Pxx @ C.T,
        A @ Pxz2 + Pxz1,
        C @ Pxz1 + Pxz1.T @ C.T,
        C @ Pxz2 + P11,
        P12 + P12.T,
        C @ Pxz1,
        Y11,
        C @ Pxz2,
        W + 2.0 * Y12,
    )


def _axpy(state, k, h):
    return tuple(s + h * d for s, d in zip(state, k))


def lde_integrate(sys, T, n_steps, method="rk4"):
    """Integrate the augmented Lyapunov differential equation from 0 to T.

    The state is ``P_xx(0) = P`` (stationary covariance) with every other
    block zero. Besides the six covariance blocks the auxiliary Y/W
    variables are carried along so the returned solution is complete.

    ``method`` is ``"rk4"`` (classical Runge-Kutta, 4th order) or
    ``"trapezoid"`` (implicit trapezoidal rule, 2nd order).
    """
    check_analysable(sys)
    if n_steps < 2:
        raise InputError(f"n_steps must be >= 2, got {n_steps}")
    if not T > 0:
        raise InputError(f"T must be positive, got {T}")
    A, C = sys.A, sys.C
    BBt = sys.B @ sys.B.T
    n_x, n_p = sys.n_x, sys.n_p
    P = state_covariance(sys)
    zeros = [np.zeros(s) for s in ((n_x, n_p), (n_x, n_p), (n_p, n_p), (n_p, n_p), (n_p, n_p),
                                   (n_p, n_p), (n_p, n_p), (n_p, n_p), (n_p, n_p))]
    state = (P.copy(), *zeros)
    h = T / n_steps

    if method == "rk4":
        f = lambda s: _lde_rhs(s, A, BBt, C)  # noqa: E731
        for _ in range(n_steps):
            k1 = f(state)
            k2 = f(_axpy(state, k1, h / 2))
            k3 = f(_axpy(state, k2, h / 2))
            k4 = f(_axpy(state, k3, h))
            state = tuple(s + (h / 6.0) * (a + 2 * b + 2 * c + d)
                          for s, a, b, c, d in zip(state, k1, k2, k3, k4))
    elif method == "trapezoid":
        state = _trapezoid(state, A, BBt, C, h, n_steps)
    else:
        raise InputError(f"unknown method {method!r}")

    blocks = dict(zip(_BLOCKS, state))
    return AugmentedSolution(
        P=symmetrize(blocks["P_xx"]), P_xz1=blocks["P_xz1"], P_xz2=blocks["P_xz2"],
        P_z1z1=blocks["P_z1z1"], P_z1z2=blocks["P_z1z2"], P_z2z2=blocks["P_z2z2"],
        Y_z1z1=blocks["Y_z1z1"], Y_z1z2=blocks["Y_z1z2"], W_z1z2=blocks["W_z1z2"],
        Y_z2z2=blocks["Y_z2z2"])


def _trapezoid(state, A, BBt, C, h, n_steps):
    shapes = [s.shape for s in state]
    sizes = [int(np.prod(s)) for s in shapes]

    def unpack(v):
        out, i = [], 0
        for shp, n in zip(shapes, sizes):
            out.append(v[i:i + n].reshape(shp))
            i += n
        return tuple(out)

    def pack(s):
        return np.concatenate([x.ravel() for x in s])

    zero_forcing = tuple(np.zeros(s) for s in shapes)
    c = pack(_lde_rhs(zero_forcing, A, BBt, C))
    N = c.size
    # the right-hand side is affine: f(v) = J v + c
    J = np.empty((N, N))
    basis = np.zeros(N)
    homog = np.zeros_like(BBt)
    for k in range(N):
        basis[k] = 1.0
        J[:, k] = pack(_lde_rhs(unpack(basis), A, homog, C))
        basis[k] = 0.0
    ident = np.eye(N)
    lu = lu_factor(ident - 0.5 * h * J)
    explicit = ident + 0.5 * h * J
    v = pack(state)
    for _ in range(n_steps):
        v = lu_solve(lu, explicit @ v + h * c)
    return unpack(v)


# ---------------------------------------------------------------------------
# exact discretization and Monte Carlo

def van_loan_discretize(sys, h):
    """Transition matrix and process-noise covariance over a step ``h``.

    ``expm([[-A, B B^T], [0, A^T]] h) = [[., F12], [0, F22]]`` gives
    ``Ad = F22^T`` and ``Qd = F22^T F12``.
    """
    if not h > 0:
        raise InputError(f"step must be positive, got {h}")
    n = sys.n_x
    A = sys.A
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = -A
    blk[:n, n:] = sys.B @ sys.B.T
    blk[n:, n:] = A.T
    F = expm(blk, h)
    Ad = F[n:, n:].T
    Qd = symmetrize(Ad @ F[:n, n:])
    return DiscreteModel(Ad, Qd, float(h))


def _sqrt_psd(S):
    w, V = np.linalg.eigh(symmetrize(S))
    return V * np.sqrt(np.clip(w, 0.0, None))


def _trial_rng(seed, index):
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _exact_mean(samples):
    """Order-insensitive mean over axis 0 (exactly rounded sums)."""
    flat = samples.reshape(samples.shape[0], -1)
    sums = np.array([math.fsum(col) for col in flat.T])
    return (sums / samples.shape[0]).reshape(samples.shape[1:])


def monte_carlo_metrics(sys, T, h, n_trials, seed, chunk=512):
    """Sample estimates of the four pointing covariances.

    Each trial starts from ``x(0) ~ N(0, P)``, propagates the exactly
    discretized system with step ``h`` and evaluates, by composite trapezoid
    over the ``T / h + 1`` samples,

    * displacement ``(1/T) int p``,
    * smear ``(12/T^2) int (t - T/2) p``,
    * jitter ``p(t) - pbar - (t - T/2) vbar`` averaged in square over the window,
    * accuracy as the window average of ``p p^T``.

    Trial ``i`` draws from its own counter-based stream derived from
    ``(seed, i)`` so results do not depend on chunking.
    """
    check_analysable(sys)
    if n_trials < 2:
        raise InputError(f"n_trials must be >= 2, got {n_trials}")
    if not (T > 0 and h > 0):
        raise InputError("T and h must be positive")
    n_steps = int(round(T / h))
    if n_steps < 1 or abs(n_steps * h - T) > 1e-9 * T:
        raise InputError(f"step {h:g} does not divide exposure {T:g}")
    h = T / n_steps

    n_x, n_p = sys.n_x, sys.n_p
    P = state_covariance(sys)
    disc = van_loan_discretize(sys, h)
    L0 = _sqrt_psd(P)
    Lq = _sqrt_psd(disc.Qd)
    t = np.arange(n_steps + 1) * h
    w = np.full(n_steps + 1, h)
    w[0] = w[-1] = h / 2
    centered = t - T / 2

    per_trial = {k: np.empty((n_trials, n_p, n_p)) for k in "ADSJ"}
    for start in range(0, n_trials, chunk):
        idx = range(start, min(start + chunk, n_trials))
        m = len(idx)
        noise = np.empty((m, n_steps + 1, n_x))
        for r, i in enumerate(idx):
            noise[r] = _trial_rng(seed, i).standard_normal((n_steps + 1, n_x))
        x = noise[:, 0, :] @ L0.T
        traj = np.empty((m, n_steps + 1, n_p))
        traj[:, 0] = x @ sys.C.T
        for k in range(1, n_steps + 1):
            x = x @ disc.Ad.T + noise[:, k, :] @ Lq.T
            traj[:, k] = x @ sys.C.T

        pbar = np.einsum("k,mkp->mp", w, traj) / T
        sbar = 12.0 / T**2 * np.einsum("k,mkp->mp", w * centered, traj)
        vbar = sbar / T
        psi = traj - pbar[:, None, :] - centered[None, :, None] * vbar[:, None, :]
        sl = slice(start, start + m)
        per_trial["A"][sl] = np.einsum("k,mkp,mkq->mpq", w, traj, traj) / T
        per_trial["D"][sl] = pbar[:, :, None] * pbar[:, None, :]
        per_trial["S"][sl] = sbar[:, :, None] * sbar[:, None, :]
        per_trial["J"][sl] = np.einsum("k,mkp,mkq->mpq", w, psi, psi) / T

    est, se = {}, {}
    for k, samples in per_trial.items():
        mean = _exact_mean(samples)
        var = _exact_mean((samples - mean) ** 2) * n_trials / (n_trials - 1)
        est[k] = mean
        se[k] = np.sqrt(var / n_trials)
    return MonteCarloReport(
        est["A"], est["D"], est["S"], est["J"],
        se["A"], se["D"], se["S"], se["J"],
        n_trials=int(n_trials), seed=int(seed), T=float(T), h=float(h))
