"""Closed-form moment propagation for atomic-ensemble teleportation.

After the joint readout of ensembles 1 and 2 and the magnetic feedback on
ensemble 3, the reconstructed quadratures are

    x3_out = g x1 - g x2 + x3 + noise_x
    y3_out = g y1 + g y2 + y3 + noise_y

with noise variance 2 g^2 (1 - eta^2)/eta^2 per quadrature (shot-noise units).
Everything below follows from this linear map applied to Gaussian moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .readout import CouplingCoefficients, coupling_coefficients, readout_noise_variance
from .states import (
    GaussianSpinState,
    JointGaussianState,
    ProtocolParams,
    epr_covariance,
    inseparability,
)


@dataclass(frozen=True)
class TeleportReport:
    params: ProtocolParams
    input_state: GaussianSpinState
    coeffs: CouplingCoefficients
    output_state: GaussianSpinState
    n_x: float
    n_y: float
    v_q: float
    fidelity_coherent: Optional[float] = None
    input_excess_noise: float = 0.0

    @property
    def eta(self) -> float:
        return self.coeffs.eta


@dataclass(frozen=True)
class MagneticCalibration:
    larmor_omega: float  # rad/s
    rotation_theta: float  # rad
    b_amplitude: float  # gauss
    gyromagnetic: float  # Hz/gauss
    gamma0: float  # rad/s

    @property
    def b_milligauss(self) -> float:
        return 1e3 * self.b_amplitude

    @property
    def larmor_hz(self) -> float:
        return self.larmor_omega / (2 * math.pi)


def epr_excess(r: float, g: float) -> float:
    """Var(x3 - g x2) for the symmetric EPR pair: (1+g^2) cosh 2r - 2 g sinh 2r.

    Evaluated as ((1-g)^2 e^{2r} + (1+g)^2 e^{-2r}) / 2, which is exact at
    unity gain and accepts ``r = inf`` there.
    """
    if g == 1:
        return 2.0 * math.exp(-2.0 * r)
    return 0.5 * ((1 - g) ** 2 * math.exp(2 * r) + (1 + g) ** 2 * math.exp(-2 * r))


def _added_noise(g: float, coeffs: CouplingCoefficients) -> float:
    if g == 0:
        return 0.0
    if coeffs.eta == 0:
        raise ValueError("eta = 0 (C = 0): a nonzero gain cannot be realized")
    return readout_noise_variance(g, coeffs.eta)


def params_coefficients(params: ProtocolParams) -> CouplingCoefficients:
    return coupling_coefficients(params.cooperativity, params.gamma0, params.n_atoms)


def equivalent_input_noise(params: ProtocolParams) -> tuple[float, float]:
    """Equivalent input noises (n_x, n_y) = V_out - g^2 V_in.

    Independent of the input state; at unity gain this is
    2 e^{-2r} + 2 (1 - eta^2)/eta^2 on both quadratures.
    """
    coeffs = params_coefficients(params)
    g = params.gain_g
    n = epr_excess(params.squeezing_r, g) + _added_noise(g, coeffs)
    return n, n


def vq_criterion(n_x: float, n_y: float) -> float:
    if n_x < 0 or n_y < 0:
        raise ValueError(f"equivalent input noises must be >= 0, got ({n_x}, {n_y})")
    return math.sqrt(n_x * n_y)


def fidelity_coherent_input(n_x: float, n_y: float, gain: float = 1.0) -> float:
    """Overlap of a coherent input with its unity-gain teleported copy."""
    if gain != 1:
        raise ValueError(f"fidelity is only defined at unity gain, got g = {gain}")
    if n_x < 0 or n_y < 0:
        raise ValueError(f"equivalent input noises must be >= 0, got ({n_x}, {n_y})")
    return 2.0 / math.sqrt((2.0 + n_x) * (2.0 + n_y))


def teleport_moments(params: ProtocolParams, input_state: GaussianSpinState,
                     input_excess_noise: float = 0.0) -> TeleportReport:
    """Output state of ensemble 3 and the teleportation figures of merit.

    ``input_excess_noise`` inflates both input variances before the protocol
    runs (imperfect preparation); equivalent input noises are still referred
    to the nominal input, so the excess shows up in ``n_x``/``n_y``.
    """
    if input_excess_noise < 0:
        raise ValueError("input_excess_noise must be >= 0")
    coeffs = params_coefficients(params)
    g = params.gain_g
    g2 = g * g
    base = epr_excess(params.squeezing_r, g) + _added_noise(g, coeffs)

    var_x = g2 * (input_state.var_x + input_excess_noise) + base
    var_y = g2 * (input_state.var_y + input_excess_noise) + base
    out = GaussianSpinState(
        mean_x=g * input_state.mean_x,
        mean_y=g * input_state.mean_y,
        var_x=var_x,
        var_y=var_y,
        cov_xy=g2 * input_state.cov_xy,
    )
    n_x = var_x - g2 * input_state.var_x
    n_y = var_y - g2 * input_state.var_y
    fid = None
    if g == 1 and input_state.is_coherent():
        fid = fidelity_coherent_input(n_x, n_y)
    return TeleportReport(
        params=params,
        input_state=input_state,
        coeffs=coeffs,
        output_state=out,
        n_x=n_x,
        n_y=n_y,
        v_q=vq_criterion(n_x, n_y),
        fidelity_coherent=fid,
        input_excess_noise=input_excess_noise,
    )


def teleport_joint(joint: JointGaussianState, g: float, eta: float,
                   source=1, sender=2, receiver=3) -> JointGaussianState:
    """Apply the teleportation map to a joint Gaussian state.

    ``source`` and ``sender`` are measured and dropped; ``receiver`` is
    replaced by its reconstructed quadratures.  Any other ensembles (e.g. an
    entanglement partner of ``source``) are carried along unchanged, so their
    correlations with the receiver come out of the propagation directly.
    """
    if eta == 0 and g != 0:
        raise ValueError("eta = 0 (C = 0): a nonzero gain cannot be realized")
    d = len(joint.means)
    i1, i2, i3 = (2 * joint.index(k) for k in (source, sender, receiver))
    M = np.eye(d)
    M[i3, i1] = g
    M[i3, i2] = -g
    M[i3 + 1, i1 + 1] = g
    M[i3 + 1, i2 + 1] = g
    means = M @ joint.means
    cov = M @ joint.cov @ M.T
    noise = 0.0 if g == 0 else readout_noise_variance(g, eta)
    cov[i3, i3] += noise
    cov[i3 + 1, i3 + 1] += noise

    keep = [k for k, lab in enumerate(joint.labels) if lab not in (source, sender)]
    idx = np.array([2 * k + q for k in keep for q in (0, 1)])
    return JointGaussianState(
        tuple(joint.labels[k] for k in keep),
        means[idx],
        cov[np.ix_(idx, idx)],
    )


def entanglement_swap(r01: float, r23: float, eta: float, g: float = 1.0) -> float:
    """Inseparability of ensembles 0 and 3 after teleporting 1 (entangled with 0).

    At unity gain this is 2 e^{-2 r01} + 2 e^{-2 r23} + 2 (1 - eta^2)/eta^2;
    other gains go through covariance propagation of the four-ensemble state.
    """
    if r01 < 0 or r23 < 0:
        raise ValueError("squeezing parameters must be >= 0")
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if eta == 0 and g != 0:
        raise ValueError("eta = 0 (C = 0): a nonzero gain cannot be realized")
    if g == 1:
        return 2 * math.exp(-2 * r01) + 2 * math.exp(-2 * r23) + readout_noise_variance(1.0, eta)
    joint = swap_resource_state(r01, r23)
    return inseparability(teleport_joint(joint, g, eta), (0, 3))


def swap_resource_state(r01: float, r23: float) -> JointGaussianState:
    cov = np.zeros((8, 8))
    cov[:4, :4] = epr_covariance(r01)
    cov[4:, 4:] = epr_covariance(r23)
    return JointGaussianState((0, 1, 2, 3), np.zeros(8), cov)


def calibrate_magnetic_field(n_atoms: float, gamma0: float,
                             gyromagnetic: float) -> MagneticCalibration:
    """Field amplitude for unity gain.

    Spin 3 must rotate by 1/sqrt(N) in a time 1/(2 gamma0), i.e.
    omega_L = 2 gamma0 / sqrt(N); ``gyromagnetic`` is in Hz per gauss.
    """
    if not n_atoms >= 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be > 0, got {gamma0}")
    if not gyromagnetic > 0:
        raise ValueError(f"gyromagnetic ratio must be > 0, got {gyromagnetic}")
    theta = 1.0 / math.sqrt(n_atoms)
    omega = 2.0 * gamma0 * theta
    b = omega / (2 * math.pi) / gyromagnetic
    return MagneticCalibration(larmor_omega=omega, rotation_theta=theta, b_amplitude=b,
                               gyromagnetic=gyromagnetic, gamma0=gamma0)
