"""Bundled example systems built directly in Python.

The same systems ship as JSON model files under ``covkit/data``; the tests
check that both routes produce identical realizations.
"""

import json
import math

import numpy as np

from . import ss
from .modelio import bundled_path

# (k, wn, zeta) for each entry of the 2x2 example
MIMO_TABLE = (
    ((1.0, 10.0, 0.07), (0.2, 15.0, 1.0)),
    ((0.2, 8.0, 1.0), (1.0, 15.0, 0.04)),
)

# (kp [Nm/rad], kd [Nm s/rad], tk [s]) for the Phi, Theta, Psi channels
SATELLITE_GAINS = ((4.9, 741.0, 1.07), (1.24, 329.0, 0.02), (0.576, 92.34, 0.76))

WHEEL_WN = 628.0
WHEEL_ZETA = 0.7
STAR_TRACKER_BW = 50.0
LOWPASS_BW = 1260.0
PEAK_NUM = (1.0, 0.6736, 1.21)
PEAK_DEN = (1.0, 0.1123, 1.21)
PEAK_FREQ = 1.1


def first_order_model(a=-1.0, b=math.sqrt(2.0)):
    return ss.StateSpaceModel([[a]], [[b]], [[1.0]])


def mimo_model():
    return ss.mimo_from_blocks([[ss.second_order_siso(*p) for p in row] for row in MIMO_TABLE])


def satellite_plant():
    """18-state rigid + flexible rotational dynamics from torque to [Phi, Theta, Psi]."""
    data = json.loads(bundled_path("satellite/plant_data.json").read_text())
    m = {k: np.array(v, dtype=float) for k, v in data.items() if not k.startswith("_")}
    A = np.block([[m["A_r"], m["A_rf"]], [np.zeros((12, 6)), m["A_f"]]])
    B = np.vstack([m["B_r"], m["B_f"]])
    C = np.hstack([m["C_r"], np.zeros((3, 12))])
    return ss.StateSpaceModel(A, B, C, None, ("tau_x", "tau_y", "tau_z"), ("Phi", "Theta", "Psi"))


def pd_gains(bandwidth_scale=1.0):
    """PD gains scaled to ``bandwidth_scale`` times the nominal tracking bandwidth.

    For a rigid-body plant ``1/(J s^2)`` the loop ``C(s)/(J s^2)`` is
    frequency-scaled by ``alpha`` when ``kp -> alpha^2 kp``,
    ``kd -> alpha kd`` and ``tk -> tk / alpha``.
    """
    a = bandwidth_scale
    return tuple((kp * a * a, kd * a, tk / a) for kp, kd, tk in SATELLITE_GAINS)


def _diag(make):
    return ss.diagonal(*[make(i) for i in range(3)])


def satellite_blocks(bandwidth_scale=1.0, shaping="F1"):
    gains = pd_gains(bandwidth_scale)
    lowpass = _diag(lambda i: ss.first_order_siso(1.0, LOWPASS_BW))
    if shaping == "F1":
        filt = lowpass
    elif shaping == "F2":
        filt = ss.series(_diag(lambda i: ss.biquad_siso(PEAK_NUM, PEAK_DEN)), lowpass)
    else:
        raise ValueError(f"shaping must be 'F1' or 'F2', got {shaping!r}")
    return {
        "plant": satellite_plant(),
        "wheels": _diag(lambda i: ss.second_order_siso(1.0, WHEEL_WN, WHEEL_ZETA)),
        "star_tracker": _diag(lambda i: ss.first_order_siso(1.0, STAR_TRACKER_BW)),
        "controller": _diag(lambda i: ss.pd_controller(*gains[i])),
        "shaping": filt,
    }


def satellite_closed_loop(bandwidth_scale=1.0, shaping="F1"):
    """Closed loop from white disturbance ``d`` to pointing ``p = [Phi, Psi]``.

    ``d`` is coloured by the shaping filter and added to the attitude
    output; the star tracker measures the sum and feeds the PD controllers
    with a minus sign; the reference is zero and is not an input.
    """
    b = satellite_blocks(bandwidth_scale, shaping)
    forward = ss.chain(b["controller"], b["wheels"], b["plant"])
    disturbed = ss.sum_at_output(forward, b["shaping"])
    closed = ss.feedback(disturbed, b["star_tracker"], -1, inputs=[0, 1, 2])
    return ss.select_outputs(ss.select_inputs(closed, [3, 4, 5]), [0, 2])


def satellite_input_sensitivity(bandwidth_scale=1.0):
    """``(I + C G_STS G_SC G_RW)^-1`` with the loop broken at the controller output."""
    b = satellite_blocks(bandwidth_scale)
    loop = ss.chain(b["wheels"], b["plant"], b["star_tracker"], b["controller"])
    return ss.feedback(ss.identity(3), loop, -1)
