"""Continuous-time LTI state-space models and their interconnection.

All transfer-function constructors return controllable-canonical
realizations. Interconnections stack the constituent states in the order
the arguments are given, so state counts add up.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .errors import InputError, ShapeError, SingularityError, WellPosednessError
from .linalg import as_matrix, eigenvalues, solve_complex_linear

WELL_POSED_TOL = 1e-12


def _mat(x, name, rows=None, cols=None):
    m = as_matrix(x, name, allow_empty=True)
    if rows is not None and m.shape[0] != rows or cols is not None and m.shape[1] != cols:
        raise ShapeError(f"{name}: expected shape ({rows}, {cols}), got {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Realization ``x' = A x + B u``, ``y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = None
    input_labels: tuple = field(default=None)
    output_labels: tuple = field(default=None)

    def __post_init__(self):
        A = _mat(self.A, "A")
        if A.shape[0] != A.shape[1]:
            raise ShapeError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        if n == 0:
            # static gain: B and C shapes only carry the I/O dimensions
            if self.D is None:
                raise ShapeError("a model without states needs D")
            D = _mat(self.D, "D")
            B = np.zeros((0, D.shape[1]))
            C = np.zeros((D.shape[0], 0))
        else:
            B = _mat(self.B, "B", rows=n)
            C = _mat(self.C, "C", cols=n)
            D = np.zeros((C.shape[0], B.shape[1])) if self.D is None else \
                _mat(self.D, "D", rows=C.shape[0], cols=B.shape[1])
        for name, labels, size in (("input_labels", self.input_labels, D.shape[1]),
                                   ("output_labels", self.output_labels, D.shape[0])):
            if labels is not None:
                labels = tuple(str(x) for x in labels)
                if len(labels) != size:
                    raise ShapeError(f"{name} has {len(labels)} names for {size} channels")
                object.__setattr__(self, name, labels)
        for name, val in zip("ABCD", (A, B, C, D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.D.shape[1]

    @property
    def n_p(self):
        return self.D.shape[0]

    @property
    def shape(self):
        return self.n_p, self.n_u

    def __repr__(self):
        return f"StateSpaceModel(n_x={self.n_x}, n_u={self.n_u}, n_p={self.n_p})"


@dataclass(frozen=True)
class FrequencyResponse:
    frequencies: np.ndarray
    gains: np.ndarray  # (n_freq, n_p, n_u) complex

    def magnitude_db(self):
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.gains))


def static_gain(K):
    K = as_matrix(K, "K")
    return StateSpaceModel(np.zeros((0, 0)), None, None, K)


def identity(n):
    return static_gain(np.eye(n))


def second_order_siso(k, wn, zeta):
    """``k wn^2 / (s^2 + 2 zeta wn s + wn^2)``."""
    if not wn > 0:
        raise InputError(f"natural frequency must be positive, got {wn}")
    if zeta < 0:
        raise InputError(f"damping ratio must be non-negative, got {zeta}")
    return StateSpaceModel([[0.0, 1.0], [-wn * wn, -2.0 * zeta * wn]],
                           [[0.0], [1.0]], [[k * wn * wn, 0.0]], [[0.0]])


def first_order_siso(k, wc):
    """``k wc / (s + wc)``."""
    if not wc > 0:
        raise InputError(f"corner frequency must be positive, got {wc}")
    return StateSpaceModel([[-wc]], [[1.0]], [[k * wc]], [[0.0]])


def biquad_siso(num, den):
    """``(b2 s^2 + b1 s + b0) / (s^2 + a1 s + a0)`` with ``den = (1, a1, a0)``."""
    b2, b1, b0 = (float(v) for v in num)
    d2, a1, a0 = (float(v) for v in den)
    if d2 != 1.0:
        raise InputError(f"denominator must be monic, got leading coefficient {d2}")
    return StateSpaceModel([[0.0, 1.0], [-a0, -a1]], [[0.0], [1.0]],
                           [[b0 - b2 * a0, b1 - b2 * a1]], [[b2]])


def pd_controller(kp, kd, tk):
    """Proportional plus filtered derivative ``kp + kd s / (tk s + 1)``."""
    if not tk > 0:
        raise InputError(f"derivative time constant must be positive, got {tk}")
    return StateSpaceModel([[-1.0 / tk]], [[1.0]], [[-kd / tk**2]], [[kp + kd / tk]])


def mimo_from_blocks(blocks):
    """Assemble a MIMO model whose (i, j) entry is the SISO model ``blocks[i][j]``.

    ``None`` entries are zero blocks without states.
    """
    n_out = len(blocks)
    if n_out == 0 or any(len(row) != len(blocks[0]) for row in blocks) or not blocks[0]:
        raise ShapeError("block grid must be non-empty and rectangular")
    n_in = len(blocks[0])
    As, Bs, Cs = [], [], []
    D = np.zeros((n_out, n_in))
    for i, row in enumerate(blocks):
        for j, blk in enumerate(row):
            if blk is None:
                continue
            if blk.shape != (1, 1):
                raise ShapeError(f"block ({i}, {j}) is not SISO: shape {blk.shape}")
            As.append(blk.A)
            b = np.zeros((blk.n_x, n_in))
            b[:, j] = blk.B[:, 0]
            c = np.zeros((n_out, blk.n_x))
            c[i, :] = blk.C[0, :]
            Bs.append(b)
            Cs.append(c)
            D[i, j] = blk.D[0, 0]
    if not As:
        return static_gain(D)
    return StateSpaceModel(block_diag(*As), np.vstack(Bs), np.hstack(Cs), D)


def diagonal(*models):
    """Block-diagonal (parallel, decoupled) stacking of models."""
    n_x = sum(m.n_x for m in models)
    A = block_diag(*[m.A for m in models]) if n_x else np.zeros((0, 0))
    B = _block_diag_rect([m.B for m in models])
    C = _block_diag_rect([m.C for m in models])
    D = _block_diag_rect([m.D for m in models])
    return StateSpaceModel(A, B, C, D)


def _block_diag_rect(mats):
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def series(first, second):
    """Cascade: the output of ``first`` drives the input of ``second``."""
    if first.n_p != second.n_u:
        raise ShapeError(
            f"series: first has {first.n_p} outputs, second has {second.n_u} inputs")
    n1, n2 = first.n_x, second.n_x
    A = np.block([[first.A, np.zeros((n1, n2))],
                  [second.B @ first.C, second.A]])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpaceModel(A, B, C, D, first.input_labels, second.output_labels)


def chain(*models):
    """``series`` applied left to right along the signal path."""
    out = models[0]
    for m in models[1:]:
        out = series(out, m)
    return out


def feedback(plant, sensor_controller, sign=-1, inputs=None, outputs=None):
    """Close a loop around ``plant`` through ``sensor_controller``.

    The controller reads plant outputs ``outputs`` (default: all) and its
    output is added, multiplied by ``sign``, to plant inputs ``inputs``
    (default: all). The closed loop keeps every plant input as an external
    input and every plant output as an output.
    """
    if sign not in (1, -1):
        raise InputError(f"sign must be +1 or -1, got {sign}")
    inputs = list(range(plant.n_u)) if inputs is None else list(inputs)
    outputs = list(range(plant.n_p)) if outputs is None else list(outputs)
    H = sensor_controller
    if H.n_u != len(outputs) or H.n_p != len(inputs):
        raise ShapeError(
            f"feedback: controller is {H.n_p}x{H.n_u}, loop needs "
            f"{len(inputs)}x{len(outputs)}")
    _check_indices(inputs, plant.n_u, "inputs")
    _check_indices(outputs, plant.n_p, "outputs")
    E_in = np.eye(plant.n_u)[:, inputs]
    E_out = np.eye(plant.n_p)[outputs, :]
    B2, C2, D2 = H.B @ E_out, E_in @ H.C, E_in @ H.D @ E_out
    A1, B1, C1, D1 = plant.A, plant.B, plant.C, plant.D

    loop = np.eye(plant.n_u) - sign * D2 @ D1
    det = np.linalg.det(loop)
    if abs(det) <= WELL_POSED_TOL:
        raise WellPosednessError(
            f"algebraic loop is singular: det(I - sign*D_fb*D_plant) = {det:.3e}")
    E = np.linalg.inv(loop)
    # e = E (r + sign*D2*C1*x1 + sign*C2*x2)
    F1 = sign * E @ D2 @ C1
    F2 = sign * E @ C2
    A = np.block([[A1 + B1 @ F1, B1 @ F2],
                  [B2 @ (C1 + D1 @ F1), H.A + B2 @ D1 @ F2]])
    B = np.vstack([B1 @ E, B2 @ D1 @ E])
    C = np.hstack([C1 + D1 @ F1, D1 @ F2])
    D = D1 @ E
    return StateSpaceModel(A, B, C, D, plant.input_labels, plant.output_labels)


def feedback_determinant(plant, sensor_controller, sign=-1, inputs=None, outputs=None):
    """``det(I - sign D_fb D_plant)`` for a prospective ``feedback`` call."""
    inputs = list(range(plant.n_u)) if inputs is None else list(inputs)
    outputs = list(range(plant.n_p)) if outputs is None else list(outputs)
    E_in = np.eye(plant.n_u)[:, inputs]
    E_out = np.eye(plant.n_p)[outputs, :]
    D2 = E_in @ sensor_controller.D @ E_out
    return float(np.linalg.det(np.eye(plant.n_u) - sign * D2 @ plant.D))


def _check_indices(indices, size, what):
    for i in indices:
        if not 0 <= i < size:
            raise ShapeError(f"{what} index {i} out of range for {size} channels")


def select_outputs(model, indices):
    indices = list(indices)
    _check_indices(indices, model.n_p, "output")
    labels = None if model.output_labels is None else [model.output_labels[i] for i in indices]
    return StateSpaceModel(model.A, model.B, model.C[indices, :], model.D[indices, :],
                           model.input_labels, labels)


def select_inputs(model, indices):
    indices = list(indices)
    _check_indices(indices, model.n_u, "input")
    labels = None if model.input_labels is None else [model.input_labels[i] for i in indices]
    return StateSpaceModel(model.A, model.B[:, indices], model.C, model.D[:, indices],
                           labels, model.output_labels)


def append_inputs(model, n_new):
    """Add ``n_new`` inputs that do not influence the model."""
    if n_new < 0:
        raise InputError("n_new must be non-negative")
    B = np.hstack([model.B, np.zeros((model.n_x, n_new))])
    D = np.hstack([model.D, np.zeros((model.n_p, n_new))])
    return StateSpaceModel(model.A, B, model.C, D)


def sum_at_output(model, disturbance):
    """Add the output of ``disturbance`` to the output of ``model``.

    The result takes inputs ``[u; d]`` and returns ``G u + G_d d``.
    """
    if disturbance.n_p != model.n_p:
        raise ShapeError(
            f"disturbance has {disturbance.n_p} outputs, model has {model.n_p}")
    A = _block_diag_rect([model.A, disturbance.A])
    B = _block_diag_rect([model.B, disturbance.B])
    C = np.hstack([model.C, disturbance.C])
    D = np.hstack([model.D, disturbance.D])
    return StateSpaceModel(A, B, C, D, None, model.output_labels)


def freq_response(model, omegas):
    """Evaluate ``C (j w I - A)^{-1} B + D`` at each frequency in ``omegas`` (rad/s)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    gains = np.empty((omegas.size, model.n_p, model.n_u), dtype=complex)
    n = model.n_x
    lam = eigenvalues(model.A) if n else np.zeros(0)
    scale = max(1.0, np.linalg.norm(model.A, "fro")) if n else 1.0
    for k, w in enumerate(omegas):
        if n == 0:
            gains[k] = model.D
            continue
        if np.min(np.abs(1j * w - lam)) <= 1e-12 * scale:
            raise SingularityError(f"j*omega - A is singular at omega = {w:g} rad/s")
        try:
            X = solve_complex_linear(1j * w * np.eye(n) - model.A, model.B)
        except SingularityError:
            raise SingularityError(f"j*omega - A is singular at omega = {w:g} rad/s")
        gains[k] = model.C @ X + model.D
    return FrequencyResponse(omegas, gains)


def dc_gain(model):
    return freq_response(model, [0.0]).gains[0]


def similarity_transform(model, T):
    """Change of state coordinates ``x_new = T x``."""
    T = as_matrix(T, "T")
    if T.shape != (model.n_x, model.n_x):
        raise ShapeError(f"T must be {model.n_x}x{model.n_x}, got {T.shape}")
    if np.linalg.cond(T) > 1.0 / np.finfo(float).eps:
        raise SingularityError("similarity transform is singular")
    Ti = np.linalg.inv(T)
    return StateSpaceModel(T @ model.A @ Ti, T @ model.B, model.C @ Ti, model.D,
                           model.input_labels, model.output_labels)
