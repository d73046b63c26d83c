"""Gaussian collective-spin states in shot-noise units.

Every transverse spin component is stored as ``x = Jx / sqrt(N/4)`` so that a
coherent spin state has unit variance on both quadratures.  Joint states order
their quadratures ``(x, y)`` per ensemble, following ``labels``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PSD_TOL = 1e-12
TILT_FRACTION = 0.1


@dataclass(frozen=True)
class GaussianSpinState:
    """Mean transverse displacement and 2x2 covariance of one ensemble."""

    mean_x: float = 0.0
    mean_y: float = 0.0
    var_x: float = 1.0
    var_y: float = 1.0
    cov_xy: float = 0.0

    def __post_init__(self):
        if not (self.var_x > 0 and self.var_y > 0):
            raise ValueError(f"variances must be positive, got ({self.var_x}, {self.var_y})")
        det = self.var_x * self.var_y - self.cov_xy**2
        if det < 1.0 - 1e-12 * max(1.0, self.var_x * self.var_y):
            raise ValueError(f"state violates the uncertainty relation: det = {det!r} < 1")

    @property
    def means(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_y])

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.var_x, self.cov_xy], [self.cov_xy, self.var_y]])

    def uncertainty_product(self) -> float:
        return self.var_x * self.var_y - self.cov_xy**2

    def is_coherent(self, tol: float = 1e-12) -> bool:
        return abs(self.var_x - 1) <= tol and abs(self.var_y - 1) <= tol and abs(self.cov_xy) <= tol

    def to_raw(self, n_atoms: float) -> dict[str, float]:
        """Return moments in spin units (means scaled by sqrt(N/4), variances by N/4)."""
        s = n_atoms / 4.0
        return {
            "mean_x": self.mean_x * math.sqrt(s),
            "mean_y": self.mean_y * math.sqrt(s),
            "var_x": self.var_x * s,
            "var_y": self.var_y * s,
            "cov_xy": self.cov_xy * s,
        }


@dataclass(frozen=True)
class ProtocolParams:
    """Physical parameters of one teleportation run.

    ``gamma0`` is an angular rate in rad/s.  ``cooperativity`` may be ``inf``,
    which stands for lossless transfer (eta = 1).
    """

    n_atoms: float = 1e6
    cooperativity: float = 100.0
    gamma0: float = 2 * math.pi * 225e3
    squeezing_r: float = 1.0
    gain_g: float = 1.0

    def __post_init__(self):
        if not self.n_atoms >= 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not self.cooperativity >= 0:
            raise ValueError(f"cooperativity must be >= 0, got {self.cooperativity}")
        if not (self.gamma0 > 0 and math.isfinite(self.gamma0)):
            raise ValueError(f"gamma0 must be positive and finite, got {self.gamma0}")
        if not (self.squeezing_r >= 0 and math.isfinite(self.squeezing_r)):
            raise ValueError(f"squeezing_r must be finite and >= 0, got {self.squeezing_r}")
        if not math.isfinite(self.gain_g):
            raise ValueError(f"gain_g must be finite, got {self.gain_g}")


@dataclass(frozen=True, eq=False)
class JointGaussianState:
    """Means and covariance over several ensembles' (x, y) quadratures."""

    labels: tuple
    means: np.ndarray
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in {labels}")
        means = np.asarray(self.means, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        d = 2 * len(labels)
        if means.shape != (d,) or cov.shape != (d, d):
            raise ValueError(f"expected means ({d},) and cov ({d}, {d}), got {means.shape} and {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0, atol=PSD_TOL * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance matrix is not symmetric")
        if min_eigenvalue(cov) < -PSD_TOL * max(1.0, np.abs(cov).max()):
            raise ValueError("covariance matrix is not positive semidefinite")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "cov", cov)

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown ensemble label {label!r}; have {self.labels}") from None

    def marginal(self, label) -> GaussianSpinState:
        i = 2 * self.index(label)
        c = self.cov
        return GaussianSpinState(self.means[i], self.means[i + 1], c[i, i], c[i + 1, i + 1], c[i, i + 1])

    def quadrature_variance(self, weights: dict) -> float:
        """Variance of a linear combination; ``weights`` maps ``(label, 'x'|'y')`` to a coefficient."""
        v = np.zeros(len(self.means))
        for (label, quad), w in weights.items():
            v[2 * self.index(label) + {"x": 0, "y": 1}[quad]] += w
        return float(v @ self.cov @ v)


def min_eigenvalue(cov: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(np.asarray(cov, dtype=float)).min())


def product_state(states: dict) -> JointGaussianState:
    """Uncorrelated joint state from a mapping ``label -> GaussianSpinState``."""
    labels = tuple(states)
    d = 2 * len(labels)
    means = np.zeros(d)
    cov = np.zeros((d, d))
    for k, label in enumerate(labels):
        s = states[label]
        means[2 * k:2 * k + 2] = s.means
        cov[2 * k:2 * k + 2, 2 * k:2 * k + 2] = s.cov
    return JointGaussianState(labels, means, cov)


def make_coherent_state(mean_x: float = 0.0, mean_y: float = 0.0) -> GaussianSpinState:
    return GaussianSpinState(mean_x, mean_y, 1.0, 1.0, 0.0)


def make_squeezed_state(s: float, mean_x: float = 0.0, mean_y: float = 0.0) -> GaussianSpinState:
    """Minimum-uncertainty state with var_x = exp(-2s), var_y = exp(2s)."""
    return GaussianSpinState(mean_x, mean_y, math.exp(-2 * s), math.exp(2 * s), 0.0)


def epr_covariance(r: float) -> np.ndarray:
    """4x4 covariance of the symmetric EPR pair, ordered (x_a, y_a, x_b, y_b).

    x quadratures are correlated and y quadratures anti-correlated.
    """
    if not r >= 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return np.array([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ])


def make_epr_pair(r: float, labels: Sequence = (2, 3)) -> JointGaussianState:
    return JointGaussianState(tuple(labels), np.zeros(4), epr_covariance(r))


def inseparability(joint: JointGaussianState, pair: Sequence) -> float:
    """Half the sum of the EPR variances Var(x_a - x_b) + Var(y_a + y_b).

    Equals 2 for two uncorrelated coherent states; values below 2 certify
    entanglement.
    """
    a, b = pair
    if a == b:
        raise ValueError("inseparability needs two distinct ensembles")
    vx = joint.quadrature_variance({(a, "x"): 1.0, (b, "x"): -1.0})
    vy = joint.quadrature_variance({(a, "y"): 1.0, (b, "y"): 1.0})
    return 0.5 * (vx + vy)


def is_entangled(value: float) -> bool:
    return value < 2.0


def validate_small_tilt(state: GaussianSpinState, n_atoms: float,
                        fraction: float = TILT_FRACTION, warn: bool = False) -> list[str]:
    """Flag mean displacements too large for the near-pole Gaussian picture.

    The mean is converted to spin units (``mean * sqrt(N/4)``) and compared
    with ``fraction * N/2``.  Returns the list of messages; with ``warn=True``
    they are also emitted through :mod:`warnings`.
    """
    if not n_atoms >= 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    limit = fraction * n_atoms / 2
    scale = math.sqrt(n_atoms / 4)
    out = []
    for name, m in (("x", state.mean_x), ("y", state.mean_y)):
        raw = abs(m) * scale
        if raw > limit:
            out.append(f"|<J{name}>| = {raw:.4g} exceeds {fraction:g} * N/2 = {limit:.4g}; "
                       "small-tilt approximation is questionable")
    if warn:
        for msg in out:
            warnings.warn(msg, stacklevel=2)
    return out
