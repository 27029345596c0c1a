"""Dense linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` objects. The helpers here validate
shape and finiteness at the boundary and otherwise stay out of the way.
"""

import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (
    ConvergenceError,
    InputError,
    NumericRangeError,
    ShapeError,
    SingularityError,
    SolvabilityError,
)

DEFAULT_TOL = 1e-10

# Wider accumulator for residuals and squarings. On x86 this is the 80-bit
# format (64-bit mantissa); where long double is plain double the extended
# paths still run, they just gain nothing.
EXT = np.longdouble

# Pade degree -> (max 1-norm, numerator coefficients), Higham (2005) Table 2.1
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


def as_matrix(x, name="matrix", dtype=float, allow_empty=False):
    """Coerce ``x`` to a finite 2-D array.

    Scalars become 1x1 matrices. Raises ShapeError for ragged/higher-rank
    input and NumericRangeError for NaN/Inf entries.
    """
    try:
        m = np.array(x, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise ShapeError(f"{name}: cannot convert to a {np.dtype(dtype).name} matrix ({exc})")
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeError(f"{name}: expected a 2-D matrix, got ndim={m.ndim}")
    if not allow_empty and 0 in m.shape:
        raise ShapeError(f"{name}: empty matrix {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericRangeError(f"{name}: contains non-finite entries")
    return m


def _square(x, name):
    m = as_matrix(x, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name}: expected a square matrix, got {m.shape}")
    return m


def symmetrize(X):
    return 0.5 * (X + X.T)


def expm(M, t=1.0, extended=True):
    """Matrix exponential ``e^{M t}`` by scaling and squaring.

    Uses the Pade approximant of lowest degree in {3, 5, 7, 9, 13} whose
    backward-error bound covers ``||M t||_1``; for larger norms the
    argument is scaled by ``2^-s`` and the result squared ``s`` times.

    With ``extended=True`` the matrix products and squarings are carried out
    in ``EXT`` precision and the Pade solve is refined against an ``EXT``
    residual. For strongly non-normal arguments with large norm (many
    squarings) this removes most of the rounding growth of the squaring
    phase; the result is returned in double precision.
    """
    M = _square(M, "M")
    t = float(t)
    if not math.isfinite(t):
        raise InputError(f"t must be finite, got {t}")
    dtype = EXT if extended else float
    X = M.astype(dtype) * dtype(t)
    n = X.shape[0]
    ident = np.eye(n, dtype=dtype)
    norm1 = float(np.linalg.norm((M * t), 1))
    if norm1 == 0.0:
        return np.eye(n)

    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _PADE_THETA[m]:
            degree = m
            break
    else:
        degree = 13
        s = max(0, int(math.ceil(math.log2(norm1 / _PADE_THETA[13]))))
        X = X / dtype(2.0) ** s

    with np.errstate(over="ignore", invalid="ignore"):
        U, V = _pade_uv(X, degree, ident)
        R = _solve_refined(V - U, V + U)
        for _ in range(s):
            R = R @ R
    with np.errstate(over="ignore", invalid="ignore"):
        R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise NumericRangeError(
            f"matrix exponential overflowed (||M t||_1 = {norm1:.3e})")
    return R


def _solve_refined(A, B, steps=2):
    """``A^-1 B`` by double-precision LU, refined with residuals in ``A.dtype``."""
    try:
        lu = lu_factor(np.asarray(A, dtype=float), check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericRangeError(f"Pade denominator singular: {exc}")
    if not np.all(np.isfinite(lu[0])) or np.any(np.diag(lu[0]) == 0):
        raise NumericRangeError("Pade denominator singular")
    X = lu_solve(lu, np.asarray(B, dtype=float)).astype(A.dtype)
    if A.dtype != np.float64:
        for _ in range(steps):
            X = X + lu_solve(lu, np.asarray(B - A @ X, dtype=float))
    return X


def _pade_uv(X, m, ident):
    b = _PADE_COEFFS[m]
    X2 = X @ X
    if m == 13:
        X4 = X2 @ X2
        X6 = X4 @ X2
        U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
                 + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
        V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
             + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident)
        return U, V
    powers = [ident, X2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ X2)
    U = X @ sum(b[2 * k + 1] * powers[k] for k in range(m // 2 + 1))
    V = sum(b[2 * k] * powers[k] for k in range(m // 2 + 1))
    return U, V


def eigenvalues(A):
    """All eigenvalues of a square real matrix (LAPACK Hessenberg-QR)."""
    A = _square(A, "A")
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}")


def stability_margin(A):
    """Threshold below which ``max Re(lambda)`` must lie for A to count as Hurwitz."""
    return 1e-9 * max(1.0, np.linalg.norm(A, "fro"))


def is_hurwitz(A):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return True
    return bool(eigenvalues(A).real.max() < -stability_margin(A))


def solve_lyapunov(A, Q, tol=DEFAULT_TOL, max_refine=4):
    """Solve ``A P + P A^T + Q = 0`` through the vectorized Kronecker system.

    With column-major vec, ``vec(A P + P A^T) = (I kron A + A kron I) vec(P)``.
    The n^2 x n^2 system is factored once by dense LU; the solution is then
    refined with residuals ``A P + P A^T + Q`` formed in ``EXT`` precision
    (up to ``max_refine`` steps) and symmetrized.
    """
    A = _square(A, "A")
    Q = _square(Q, "Q")
    n = A.shape[0]
    if Q.shape != A.shape:
        raise ShapeError(f"Q must be {A.shape}, got {Q.shape}")
    qscale = max(1.0, np.abs(Q).max())
    if np.abs(Q - Q.T).max() > tol * qscale:
        raise InputError("Q is not symmetric")

    lam = eigenvalues(A)
    sums = np.abs(lam[:, None] + lam[None, :])
    i, j = np.unravel_index(np.argmin(sums), sums.shape)
    if sums[i, j] <= 1e-12 * max(1.0, np.linalg.norm(A, "fro")):
        raise SolvabilityError(
            f"Lyapunov operator singular: eigenvalue sum {lam[i] + lam[j]:.3e} "
            f"(lambda_i={lam[i]:.6g}, lambda_j={lam[j]:.6g})")

    ident = np.eye(n)
    K = np.kron(ident, A) + np.kron(A, ident)
    try:
        lu = lu_factor(K, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolvabilityError(f"vectorized Lyapunov system singular: {exc}")
    if np.any(np.diag(lu[0]) == 0):
        raise SolvabilityError("vectorized Lyapunov system singular")
    Ae, Qe = A.astype(EXT), Q.astype(EXT)
    P = lu_solve(lu, -Q.reshape(-1, order="F")).reshape(n, n, order="F").astype(EXT)
    # refinement against residuals accumulated in EXT precision
    for _ in range(max_refine):
        R = -(Ae @ P + P @ Ae.T + Qe)
        delta = lu_solve(lu, np.asarray(R, dtype=float).reshape(-1, order="F"))
        P = P + delta.reshape(n, n, order="F")
        if np.abs(delta).max() <= 4 * np.finfo(float).eps * np.abs(P).max():
            break
    P = symmetrize(np.asarray(P, dtype=float))
    if not np.all(np.isfinite(P)):
        raise NumericRangeError("Lyapunov solution is not finite")
    return P


def lyapunov_residual(A, P, Q):
    """Relative residual ``||AP + PA^T + Q|| / (||A|| ||P|| + ||Q||)``."""
    r = A @ P + P @ A.T + Q
    denom = np.linalg.norm(A) * np.linalg.norm(P) + np.linalg.norm(Q)
    return np.linalg.norm(r) / denom if denom else 0.0


def solve_complex_linear(A, B):
    """Solve ``A X = B`` for complex (or real) matrices."""
    A = as_matrix(A, "A", dtype=complex)
    B = as_matrix(B, "B", dtype=complex)
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ShapeError(f"B has {B.shape[0]} rows, A is {A.shape}")
    if np.linalg.cond(A) > 1.0 / np.finfo(float).eps:
        raise SingularityError("A is numerically singular")
    return np.linalg.solve(A, B)
