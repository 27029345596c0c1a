"""Accuracy, displacement, smear and jitter covariances of a stationary LTI output.

The output ``p = C x`` of ``x' = A x + B u`` (``u`` unit-intensity white noise)
is integrated twice, ``z1' = p`` and ``z2' = z1``, starting from zero at the
beginning of the exposure. The covariances of ``z1(T)`` and ``z2(T)`` give the
displacement and smear covariances. They obey a Lyapunov differential
equation which, after introducing the auxiliary variables Y and W, becomes
a linear ODE ``X' = M X`` solved by one matrix exponential.

Units follow C: if the output is in microradians, every covariance is in
microradians squared. Nothing here enforces units.
"""

import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import ConsistencyError, FeedthroughError, InputError, ShapeError, StabilityError
from .linalg import eigenvalues, expm, is_hurwitz, solve_lyapunov, symmetrize

log = logging.getLogger(__name__)

DEFAULT_TOL_PSD = 1e-8
DEFAULT_TOL_BALANCE = 1e-8


@dataclass(frozen=True)
class ExposureConfig:
    T: float
    tol_psd: float = DEFAULT_TOL_PSD
    tol_balance: float = DEFAULT_TOL_BALANCE

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T > 0):
            raise InputError(f"exposure time must be positive and finite, got {self.T}")
        if not (self.tol_psd > 0 and self.tol_balance > 0):
            raise InputError("tolerances must be positive")


@dataclass(frozen=True, eq=False)
class PointingCovariances:
    sigma_A: np.ndarray
    sigma_D: np.ndarray
    sigma_S: np.ndarray
    sigma_J: np.ndarray
    T: float
    clipped: float = 0.0  # largest eigenvalue magnitude removed by PSD repair

    @property
    def n_p(self):
        return self.sigma_A.shape[0]

    @property
    def smear12(self):
        return self.sigma_S / 12.0

    @property
    def balance_residual(self):
        """``||S_A - S_D - S_S/12 - S_J|| / ||S_A||`` (Frobenius)."""
        r = self.sigma_A - self.sigma_D - self.sigma_S / 12.0 - self.sigma_J
        scale = np.linalg.norm(self.sigma_A)
        return float(np.linalg.norm(r) / scale) if scale > 0 else float(np.linalg.norm(r))

    def normalized(self, P):
        """Covariances divided by a scalar reference variance ``P``."""
        return PointingCovariances(self.sigma_A / P, self.sigma_D / P, self.sigma_S / P,
                                   self.sigma_J / P, self.T, self.clipped / P)


@dataclass(frozen=True, eq=False)
class AugmentedSolution:
    """Blocks of the augmented covariance at the end of the exposure.

    ``Y_*`` and ``W_z1z2`` are the auxiliary variables of the block ODE; they
    satisfy ``P_z1z1 = Y_z1z1 + Y_z1z1^T``, ``P_z2z2 = Y_z2z2 + Y_z2z2^T`` and
    ``P_z1z2 = Y_z1z2 + Y_z1z2^T + W_z1z2``.
    """

    P: np.ndarray
    P_xz1: np.ndarray
    P_xz2: np.ndarray
    P_z1z1: np.ndarray
    P_z1z2: np.ndarray
    P_z2z2: np.ndarray
    Y_z1z1: np.ndarray = field(default=None)
    Y_z1z2: np.ndarray = field(default=None)
    W_z1z2: np.ndarray = field(default=None)
    Y_z2z2: np.ndarray = field(default=None)

    def z_covariance(self):
        """Joint covariance of ``[z1; z2]``."""
        return np.block([[self.P_z1z1, self.P_z1z2], [self.P_z1z2.T, self.P_z2z2]])


def smear_map(n_p, T):
    """Matrix ``L`` with ``s = L [z1; z2]``."""
    ident = np.eye(n_p)
    return np.hstack([(6.0 / T) * ident, (-12.0 / T**2) * ident])


def check_analysable(sys):
    """Raise unless ``sys`` is Hurwitz with zero feedthrough."""
    if np.any(sys.D != 0.0):
        raise FeedthroughError(
            "white noise reaches the output through D "
            f"(max |D| = {np.abs(sys.D).max():.3g}); the output variance is unbounded")
    if sys.n_x and not is_hurwitz(sys.A):
        lam = eigenvalues(sys.A)
        worst = lam[np.argmax(lam.real)]
        raise StabilityError(f"A is not Hurwitz: eigenvalue {worst:.6g} has real part "
                             f"{worst.real:.6g} >= 0", eigenvalue=worst)


def state_covariance(sys):
    """Stationary state covariance P solving ``A P + P A^T + B B^T = 0``."""
    check_analysable(sys)
    if sys.n_x == 0:
        return np.zeros((0, 0))
    return solve_lyapunov(sys.A, sys.B @ sys.B.T)


def accuracy_covariance(sys):
    P = state_covariance(sys)
    return symmetrize(sys.C @ P @ sys.C.T)


def _offsets(n_x, n_p):
    sizes = [n_p, n_p, n_x, n_p, n_p, n_x, n_p]
    edges = np.concatenate([[0], np.cumsum(sizes)])
    names = ("Y_z2z2", "W_z1z2", "P_xz2", "Y_z1z2", "Y_z1z1", "P_xz1", "F")
    return {name: slice(int(a), int(b)) for name, a, b in zip(names, edges[:-1], edges[1:])}


def build_block_M(sys, P):
    """Block matrix of ``X' = M X`` with X = [Y_z2z2; W_z1z2; P_xz2; Y_z1z2; Y_z1z1; P_xz1; F]."""
    n_x, n_p = sys.n_x, sys.n_p
    P = np.asarray(P, dtype=float)
    if P.shape != (n_x, n_x):
        raise ShapeError(f"P must be {n_x}x{n_x}, got {P.shape}")
    o = _offsets(n_x, n_p)
    n = 5 * n_p + 2 * n_x
    M = np.zeros((n, n))
    I_p = np.eye(n_p)
    M[o["Y_z2z2"], o["W_z1z2"]] = I_p
    M[o["Y_z2z2"], o["Y_z1z2"]] = 2.0 * I_p
    M[o["W_z1z2"], o["P_xz2"]] = sys.C
    M[o["P_xz2"], o["P_xz2"]] = sys.A
    M[o["P_xz2"], o["P_xz1"]] = np.eye(n_x)
    M[o["Y_z1z2"], o["Y_z1z1"]] = I_p
    M[o["Y_z1z1"], o["P_xz1"]] = sys.C
    M[o["P_xz1"], o["P_xz1"]] = sys.A
    M[o["P_xz1"], o["F"]] = P @ sys.C.T
    return M


def reduced_block_M(sys, P):
    """Lower-right corner of M acting on [Y_z1z1; P_xz1; F]; enough for displacement."""
    n_x, n_p = sys.n_x, sys.n_p
    n = 2 * n_p + n_x
    M = np.zeros((n, n))
    M[:n_p, n_p:n_p + n_x] = sys.C
    M[n_p:n_p + n_x, n_p:n_p + n_x] = sys.A
    M[n_p:n_p + n_x, n_p + n_x:] = P @ sys.C.T
    return M


def augmented_solution(sys, P, T):
    """Solve the block ODE over ``[0, T]`` and rebuild the covariance blocks."""
    o = _offsets(sys.n_x, sys.n_p)
    X = expm(build_block_M(sys, P), T)[:, o["F"]]
    Y11, Y12, W, Y22 = X[o["Y_z1z1"]], X[o["Y_z1z2"]], X[o["W_z1z2"]], X[o["Y_z2z2"]]
    return AugmentedSolution(
        P=P, P_xz1=X[o["P_xz1"]], P_xz2=X[o["P_xz2"]],
        P_z1z1=Y11 + Y11.T, P_z1z2=Y12 + Y12.T + W, P_z2z2=Y22 + Y22.T,
        Y_z1z1=Y11, Y_z1z2=Y12, W_z1z2=W, Y_z2z2=Y22)


def _psd_repair(S, floor, what):
    """Symmetrize and clip eigenvalues in ``(-floor, 0)``; returns (matrix, clipped)."""
    S = symmetrize(S)
    if S.size == 0:
        return S, 0.0
    w, V = np.linalg.eigh(S)
    lowest = w.min()
    if lowest >= 0.0:
        return S, 0.0
    if lowest < -floor:
        raise ConsistencyError(
            f"{what} has eigenvalue {lowest:.3e} below the PSD floor -{floor:.3e}")
    w = np.clip(w, 0.0, None)
    return symmetrize((V * w) @ V.T), float(-lowest)


def covariances_from_blocks(sigma_A, P_z1z1, P_z1z2, P_z2z2, cfg):
    """Displacement, smear and jitter covariances from the z-blocks at ``cfg.T``."""
    T = cfg.T
    n_p = sigma_A.shape[0]
    Z = np.block([[P_z1z1, P_z1z2], [P_z1z2.T, P_z2z2]])
    L = smear_map(n_p, T)
    floor = cfg.tol_psd * max(float(np.trace(sigma_A)), 0.0)

    sigma_D, c_d = _psd_repair(P_z1z1 / T**2, floor, "displacement covariance")
    sigma_S, c_s = _psd_repair(L @ Z @ L.T, 12.0 * floor, "smear covariance")
    sigma_J, c_j = _psd_repair(sigma_A - sigma_D - sigma_S / 12.0, floor, "jitter covariance")

    pc = PointingCovariances(sigma_A, sigma_D, sigma_S, sigma_J, T,
                             clipped=max(c_d, c_s / 12.0, c_j))
    if pc.balance_residual > cfg.tol_balance:
        raise ConsistencyError(
            f"balance residual {pc.balance_residual:.3e} exceeds {cfg.tol_balance:.1e} at T={T:g}")
    return pc


def _as_config(cfg):
    return cfg if isinstance(cfg, ExposureConfig) else ExposureConfig(float(cfg))


def pointing_covariances(sys, cfg, P=None):
    """Accuracy, displacement, smear and jitter covariances for one exposure.

    Parameters
    ----------
    sys : StateSpaceModel
        Hurwitz model with ``D = 0``; its input is unit-intensity white noise.
    cfg : ExposureConfig or float
        Exposure configuration (a bare number is taken as T).
    P : ndarray, optional
        Precomputed stationary state covariance.

    Returns
    -------
    (PointingCovariances, AugmentedSolution)
    """
    cfg = _as_config(cfg)
    if P is None:
        P = state_covariance(sys)
    else:
        check_analysable(sys)
    sigma_A = symmetrize(sys.C @ P @ sys.C.T)
    aug = augmented_solution(sys, P, cfg.T)
    pc = covariances_from_blocks(sigma_A, aug.P_z1z1, aug.P_z1z2, aug.P_z2z2, cfg)
    if pc.clipped:
        log.debug("PSD repair removed %.3e at T=%g", pc.clipped, cfg.T)
    return pc, aug


def displacement_covariance_fast(sys, cfg, P=None):
    """Displacement covariance alone, from the smaller ``(2 n_p + n_x)`` exponential."""
    cfg = _as_config(cfg)
    if P is None:
        P = state_covariance(sys)
    else:
        check_analysable(sys)
    n_p = sys.n_p
    X = expm(reduced_block_M(sys, P), cfg.T)[:, -n_p:]
    Y11 = X[:n_p]
    return symmetrize(Y11 + Y11.T) / cfg.T**2


def smitter_covariance(pc):
    """Jitter plus scaled smear, which equals accuracy minus displacement."""
    return pc.sigma_J + pc.sigma_S / 12.0


def exposure_sweep(sys, T_list, tol_psd=DEFAULT_TOL_PSD, tol_balance=DEFAULT_TOL_BALANCE):
    """``pointing_covariances`` over several exposure times, sharing one Lyapunov solve."""
    configs = [ExposureConfig(float(T), tol_psd, tol_balance) for T in T_list]
    P = state_covariance(sys)
    return [pointing_covariances(sys, cfg, P=P)[0] for cfg in configs]


def first_order_closed_form(a, b, T):
    """Closed-form covariances of ``x' = a x + b u``, ``p = x``.

    Evaluated in 50-digit arithmetic: the bracketed terms cancel to
    ``O((aT)^5)`` for short exposures.
    """
    if not a < 0:
        raise StabilityError(f"first-order process needs a < 0, got a = {a}", eigenvalue=a)
    if not T > 0:
        raise InputError(f"exposure time must be positive, got {T}")
    with mpmath.workdps(50):
        a_, b_, T_ = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(T)
        P = -b_**2 / (2 * a_)
        x = a_ * T_
        e = mpmath.exp(x)
        sd = 2 * P / x**2 * (e - 1 - x)
        ss = 24 * P / x**4 * (12 * (x * e + 1 - e) - 3 * x**2 * (1 + e) - x**3)
        sj = P / x**4 * (24 * (e - 1 - x * e) + 4 * x**2 * (2 + e) + 4 * x**3 + x**4)
        vals = [float(v) for v in (P, sd, ss, sj)]
    return PointingCovariances(*(np.array([[v]]) for v in vals), T=float(T))
