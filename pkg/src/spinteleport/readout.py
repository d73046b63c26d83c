"""Cavity readout coefficients, matched-filter noise integrals and feedback gain.

The outgoing amplitude quadrature of cavity ``i`` after the control field is
switched on is

    X_out(t) = X_in(t) - alpha * Jx(0) * exp(-gamma0 t)
               - 2 eta^2 [X_in(t) - gamma0 * (exp(-gamma0 t) * X_in)(t)]
               + beta    [X_v(t)  - gamma0 * (exp(-gamma0 t) * X_v)(t)]

with ``*`` a causal convolution and unit-spectral-density white noises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CouplingCoefficients:
    eta: float
    alpha: float
    beta: float
    gamma0: float

    @property
    def eta2(self) -> float:
        return self.eta**2

    @property
    def loss_ratio(self) -> float:
        """(1 - eta^2) / eta^2, the per-unit-gain added noise in vacuum units / 2."""
        if self.eta == 0:
            return math.inf
        return (1.0 - self.eta2) / self.eta2


@dataclass(frozen=True)
class FeedbackGain:
    g: float
    G_raw: float


def eta_squared(C: float) -> float:
    if not C >= 0:
        raise ValueError(f"cooperativity must be >= 0, got {C}")
    # 1 - 1/(1+2C) == 2C/(1+2C), but stays finite for C = inf
    return 1.0 - 1.0 / (1.0 + 2.0 * C)


def coupling_coefficients(C: float, gamma0: float, n_atoms: float) -> CouplingCoefficients:
    """Readout constants eta, alpha, beta for cooperativity ``C``."""
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be > 0, got {gamma0}")
    if not n_atoms >= 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    eta = math.sqrt(eta_squared(C))
    alpha = eta * math.sqrt(8.0 * gamma0 / n_atoms)
    beta = 2.0 * eta / math.sqrt(1.0 + 2.0 * C)
    return CouplingCoefficients(eta=eta, alpha=alpha, beta=beta, gamma0=gamma0)


def filtered_noise_weight(c_direct: float, c_conv: float, gamma0: float) -> float:
    """Variance of a white-noise channel seen through the exponential gain profile.

    Computes Var[ int_0^inf e^{-g t} (c_direct W(t) + c_conv g int_0^t e^{-g(t-s)} W(s) ds) dt ]
    for unit white noise ``W`` and ``g = gamma0``.  Exchanging the order of
    integration turns the kernel into ``(c_direct + c_conv/2) e^{-g s}``, so the
    result is ``(c_direct + c_conv/2)**2 / (2 gamma0)``.
    """
    if not gamma0 > 0:
        raise ValueError(f"gamma0 must be > 0, got {gamma0}")
    return (c_direct + 0.5 * c_conv) ** 2 / (2.0 * gamma0)


def channel_weights(eta: float, beta: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """(direct, convolution) coefficients of the vacuum-field and atomic-noise terms."""
    e2 = eta * eta
    return (1.0 - 2.0 * e2, 2.0 * e2), (beta, -beta)


def gain_from_raw(G_raw: float, coeffs: CouplingCoefficients, n_atoms: float) -> FeedbackGain:
    g = -G_raw * coeffs.eta / math.sqrt(n_atoms * coeffs.gamma0)
    return FeedbackGain(g=g, G_raw=G_raw)


def raw_from_gain(g: float, coeffs: CouplingCoefficients, n_atoms: float) -> FeedbackGain:
    """Electronic gain amplitude realizing normalized gain ``g``."""
    if coeffs.eta == 0:
        raise ValueError("eta = 0: no feedback gain can realize a nonzero teleportation gain")
    G_raw = -g * math.sqrt(n_atoms * coeffs.gamma0) / coeffs.eta
    return FeedbackGain(g=g, G_raw=G_raw)


def readout_noise_variance(g: float, eta: float) -> float:
    """Added noise on the reconstructed quadrature, 2 g^2 (1 - eta^2) / eta^2 (shot-noise units)."""
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return 2.0 * g * g * (1.0 - eta * eta) / (eta * eta)


def readout_noise_from_kernels(g: float, coeffs: CouplingCoefficients, n_atoms: float) -> float:
    """Same quantity as :func:`readout_noise_variance`, assembled channel by channel.

    X_- = (X_1 - X_2)/sqrt(2) carries both cavities' vacuum and atomic noise
    with weight 1/2 each; the feedback ``dJx3/dt = G e^{-gamma0 t} X_-`` is
    converted to shot-noise units by the factor 4/N.
    """
    G = raw_from_gain(g, coeffs, n_atoms).G_raw
    field, atomic = channel_weights(coeffs.eta, coeffs.beta)
    per_cavity = (filtered_noise_weight(*field, coeffs.gamma0)
                  + filtered_noise_weight(*atomic, coeffs.gamma0))
    raw_var = G * G * 0.5 * (2 * per_cavity)
    return raw_var * 4.0 / n_atoms
