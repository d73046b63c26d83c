"""Continuous-variable teleportation of collective atomic-spin states.

Closed-form Gaussian moment propagation (:mod:`spinteleport.protocol`), the
readout physics it rests on (:mod:`spinteleport.readout`) and a
stochastic-trajectory Monte Carlo oracle (:mod:`spinteleport.montecarlo`).
"""
from .protocol import (
    MagneticCalibration,
    TeleportReport,
    calibrate_magnetic_field,
    entanglement_swap,
    equivalent_input_noise,
    fidelity_coherent_input,
    teleport_joint,
    teleport_moments,
    vq_criterion,
)
from .readout import (
    CouplingCoefficients,
    FeedbackGain,
    coupling_coefficients,
    filtered_noise_weight,
    gain_from_raw,
    raw_from_gain,
    readout_noise_variance,
)
from .states import (
    GaussianSpinState,
    JointGaussianState,
    ProtocolParams,
    inseparability,
    make_coherent_state,
    make_epr_pair,
    make_squeezed_state,
    validate_small_tilt,
)

__version__ = "0.1.0"
