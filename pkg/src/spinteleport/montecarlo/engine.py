"""Monte Carlo estimation of the teleported moments.

Every state and map in the protocol is Gaussian and linear, so sampling the
symmetric-ordered quadratures as classical Gaussian variables and pushing
them through the readout/feedback equations reproduces the quantum moments
exactly, up to sampling error and time discretization.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..protocol import TeleportReport, params_coefficients, teleport_moments
from ..readout import channel_weights
from ..states import GaussianSpinState, ProtocolParams
from ._jit import DEFAULT_BACKEND
from .kernels import N_INIT, run_block, step_weights

COLUMNS = ("x0", "y0", "x1", "y1", "x2", "y2", "x3", "y3", "x3_out", "y3_out")
MAX_INVALID_FRACTION = 1e-3
DEFAULT_BIAS_ALLOWANCE = 0.02


class MonteCarloError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrajectoryConfig:
    """Discretization and seeding; ``dt`` and ``t_max`` are in units of 1/gamma0."""

    dt: float = 0.01
    t_max: float = 10.0
    n_traj: int = 100_000
    seed: int = 12345

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if self.t_max < self.dt:
            raise ValueError("t_max must be at least one time step")
        if int(self.n_traj) != self.n_traj or self.n_traj < 2:
            raise ValueError(f"n_traj must be an integer >= 2, got {self.n_traj}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.t_max < 5:
            warnings.warn(f"t_max = {self.t_max} < 5/gamma0 truncates the readout pulse "
                          f"(relative error ~ {math.exp(-2 * self.t_max):.1e})", stacklevel=3)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))


@dataclass(frozen=True, eq=False)
class MomentEstimates:
    params: ProtocolParams
    input_state: GaussianSpinState
    cfg: TrajectoryConfig
    n_traj: int
    n_invalid: int
    mean_x3: float
    mean_y3: float
    var_x3: float
    var_y3: float
    se_mean_x3: float
    se_mean_y3: float
    se_var_x3: float
    se_var_y3: float
    cov_x3_x1: float
    cov_y3_y1: float
    n_x: float
    n_y: float
    se_n_x: float
    se_n_y: float
    samples: np.ndarray = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, COLUMNS.index(name)]


@dataclass(frozen=True)
class MomentComparison:
    name: str
    estimate: float
    se: float
    analytic: float
    allowance: float
    z: float
    z_adjusted: float

    @property
    def ok(self) -> bool:
        return abs(self.z_adjusted) <= 3.0


@dataclass(frozen=True)
class ComparisonRecord:
    rows: tuple
    passed: bool

    def __getitem__(self, name: str) -> MomentComparison:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


@dataclass(frozen=True)
class Regression:
    """OLS fit ``out = c0 + c1*a + c2*b + c3*c`` with standard errors."""

    coef: np.ndarray
    se: np.ndarray
    residual_var: float
    se_residual_var: float


def _spin_factor(state: GaussianSpinState) -> np.ndarray:
    try:
        return np.linalg.cholesky(state.cov)
    except np.linalg.LinAlgError:
        raise ValueError("input covariance is not positive definite") from None


def _epr_factor(r: float) -> np.ndarray:
    """Square root S (S S^T = EPR covariance) in the (x_a, y_a, x_b, y_b) ordering.

    Built from the two-mode squeezer rather than a Cholesky decomposition so
    it stays well conditioned for large ``r``.
    """
    if not r >= 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    p, m = math.exp(r) * math.sqrt(0.5), math.exp(-r) * math.sqrt(0.5)
    return np.array([
        [p, 0.0, m, 0.0],
        [0.0, m, 0.0, p],
        [p, 0.0, -m, 0.0],
        [0.0, m, 0.0, -p],
    ])


def initial_factor(input_state: Optional[GaussianSpinState], r: float,
                   r01: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Means and square-root factor of the initial (x0 .. y3) distribution.

    Without ``r01`` ensemble 0 is absent (identically zero) and ensemble 1
    follows ``input_state``; with ``r01`` ensembles 0 and 1 form an EPR pair.
    """
    means = np.zeros(N_INIT)
    factor = np.zeros((N_INIT, N_INIT))
    if r01 is None:
        means[2:4] = input_state.means
        factor[2:4, 2:4] = _spin_factor(input_state)
    else:
        factor[0:4, 0:4] = _epr_factor(r01)
    factor[4:8, 4:8] = _epr_factor(r)
    return means, factor


def sample_initial_spins(input_state: Optional[GaussianSpinState], r: float, n_traj: int,
                         seed: int, r01: Optional[float] = None, start: int = 0) -> np.ndarray:
    """Initial quadrature samples, shape (n_traj, 8), columns x0, y0, ..., x3, y3.

    Uses the same per-trajectory streams as :func:`run_ensemble`, so for equal
    seeds these are exactly the samples the trajectories start from.
    """
    from .kernels import INIT_PAIRS
    from .rng import normal_pair_array, trajectory_keys

    means, factor = initial_factor(input_state, r, r01)
    keys = trajectory_keys(seed, np.arange(start, start + n_traj))
    z = np.empty((n_traj, N_INIT))
    for p in range(INIT_PAIRS):
        z[:, 2 * p], z[:, 2 * p + 1] = normal_pair_array(keys, p)
    s = np.empty_like(z)
    for row in range(N_INIT):
        acc = np.full(n_traj, means[row])
        for c in range(N_INIT):
            acc = acc + factor[row, c] * z[:, c]
        s[:, row] = acc
    return s


def _kernel_constants(params: ProtocolParams):
    coeffs = params_coefficients(params)
    g = params.gain_g
    if g != 0 and coeffs.eta == 0:
        raise ValueError("eta = 0 (C = 0): a nonzero gain cannot be realized")
    K = 0.0 if g == 0 else -2.0 * g / coeffs.eta
    (cfd, cfc), (cad, cac) = channel_weights(coeffs.eta, coeffs.beta)
    return np.array([cfd, cfc, cad, cac]), K, coeffs.eta


def simulate_block(params: ProtocolParams, means: np.ndarray, factor: np.ndarray,
                   cfg: TrajectoryConfig, *, noise: bool = True, start: int = 0,
                   n: Optional[int] = None, backend: Optional[str] = None) -> np.ndarray:
    """Raw (n, 10) trajectory table for trajectories ``start .. start+n-1``."""
    coefs, K, eta = _kernel_constants(params)
    w, sw = step_weights(cfg.dt, cfg.n_steps)
    n = cfg.n_traj if n is None else n
    return run_block(backend or DEFAULT_BACKEND, cfg.seed, start, n, means, factor,
                     w, sw, cfg.dt, coefs, K, eta, noise)


def simulate_trajectory(params: ProtocolParams, spins, cfg: TrajectoryConfig, index: int = 0,
                        *, noise: bool = True, backend: Optional[str] = None) -> tuple[float, float]:
    """Run one trajectory from the given initial (x0, y0, ..., x3, y3) values.

    White noise comes from stream ``index`` of ``cfg.seed``; ``noise=False``
    forces every noise sample to zero.
    """
    spins = np.asarray(spins, dtype=float)
    if spins.shape == (6,):
        spins = np.concatenate([[0.0, 0.0], spins])
    if spins.shape != (N_INIT,):
        raise ValueError("spins must hold (x1, y1, x2, y2, x3, y3) or (x0, y0, ..., y3)")
    row = simulate_block(params, spins, np.zeros((N_INIT, N_INIT)), cfg,
                         noise=noise, start=index, n=1, backend=backend)[0]
    return float(row[8]), float(row[9])


def _check_invalid(samples: np.ndarray) -> tuple[np.ndarray, int]:
    ok = np.isfinite(samples).all(axis=1)
    n_bad = int((~ok).sum())
    if n_bad > MAX_INVALID_FRACTION * len(samples):
        raise MonteCarloError(f"{n_bad} of {len(samples)} trajectories overflowed "
                              f"(limit {MAX_INVALID_FRACTION:.1%})")
    if n_bad:
        warnings.warn(f"{n_bad} invalid trajectories excluded from the moments", stacklevel=3)
    return samples[ok], n_bad


def _var_se(v: float, n: int) -> float:
    return v * math.sqrt(2.0 / (n - 1))


def estimate_moments(params: ProtocolParams, input_state: GaussianSpinState,
                     cfg: TrajectoryConfig, samples: np.ndarray) -> MomentEstimates:
    good, n_bad = _check_invalid(samples)
    n = len(good)
    g = params.gain_g
    x1, y1 = good[:, 2], good[:, 3]
    x3o, y3o = good[:, 8], good[:, 9]
    vx, vy = float(np.var(x3o, ddof=1)), float(np.var(y3o, ddof=1))
    nx = float(np.var(x3o - g * x1, ddof=1))
    ny = float(np.var(y3o - g * y1, ddof=1))
    return MomentEstimates(
        params=params, input_state=input_state, cfg=cfg, n_traj=n, n_invalid=n_bad,
        mean_x3=float(np.mean(x3o)), mean_y3=float(np.mean(y3o)),
        var_x3=vx, var_y3=vy,
        se_mean_x3=math.sqrt(vx / n), se_mean_y3=math.sqrt(vy / n),
        se_var_x3=_var_se(vx, n), se_var_y3=_var_se(vy, n),
        cov_x3_x1=float(np.cov(x3o, x1)[0, 1]), cov_y3_y1=float(np.cov(y3o, y1)[0, 1]),
        n_x=nx, n_y=ny, se_n_x=_var_se(nx, n), se_n_y=_var_se(ny, n),
        samples=samples,
    )


def run_ensemble(params: ProtocolParams, input_state: GaussianSpinState, cfg: TrajectoryConfig,
                 *, noise: bool = True, zero_initial: bool = False,
                 backend: Optional[str] = None) -> MomentEstimates:
    """Simulate ``cfg.n_traj`` trajectories and estimate the output moments of spin 3.

    ``zero_initial`` pins every initial spin sample to zero, leaving only the
    readout noise (isolates the added-noise term).  Results depend only on
    (seed, cfg, params, input); trajectory ``i`` always uses stream ``i``.
    """
    means, factor = initial_factor(input_state, params.squeezing_r)
    if zero_initial:
        means, factor = np.zeros_like(means), np.zeros_like(factor)
    samples = simulate_block(params, means, factor, cfg, noise=noise, backend=backend)
    return estimate_moments(params, input_state, cfg, samples)


@dataclass(frozen=True)
class SwapEstimate:
    inseparability: float
    se: float
    n_traj: int
    samples: np.ndarray = field(repr=False)


def sample_inseparability(xa, ya, xb, yb) -> tuple[float, float]:
    """Sample estimate of (Var(xa - xb) + Var(ya + yb)) / 2 and its standard error."""
    n = len(xa)
    vx = float(np.var(np.asarray(xa) - xb, ddof=1))
    vy = float(np.var(np.asarray(ya) + yb, ddof=1))
    se = 0.5 * math.sqrt(2.0 * (vx * vx + vy * vy) / (n - 1))
    return 0.5 * (vx + vy), se


def run_swap_ensemble(params: ProtocolParams, r01: float, cfg: TrajectoryConfig,
                      *, backend: Optional[str] = None) -> SwapEstimate:
    """Teleport half of an EPR pair (0, 1) and estimate the inseparability of (0, 3)."""
    means, factor = initial_factor(None, params.squeezing_r, r01=r01)
    samples = simulate_block(params, means, factor, cfg, backend=backend)
    good, _ = _check_invalid(samples)
    val, se = sample_inseparability(good[:, 0], good[:, 1], good[:, 8], good[:, 9])
    return SwapEstimate(val, se, len(good), samples)


def regress_output(est: MomentEstimates, quadrature: str = "x") -> Regression:
    """Regress x3_out (or y3_out) on the initial samples of ensembles 1, 2, 3.

    The teleportation map predicts coefficients (g, -g, 1) for x and
    (g, g, 1) for y, with residual variance equal to the added readout noise.
    """
    q = {"x": 0, "y": 1}[quadrature]
    good = est.samples[np.isfinite(est.samples).all(axis=1)]
    X = np.column_stack([np.ones(len(good)), good[:, 2 + q], good[:, 4 + q], good[:, 6 + q]])
    yv = good[:, 8 + q]
    coef, *_ = np.linalg.lstsq(X, yv, rcond=None)
    resid = yv - X @ coef
    dof = len(yv) - X.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return Regression(coef=coef, se=np.sqrt(np.diag(cov)), residual_var=s2,
                      se_residual_var=s2 * math.sqrt(2.0 / dof))


def _z(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def compare_to_analytic(est: MomentEstimates, report: TeleportReport,
                        bias_allowance: float = DEFAULT_BIAS_ALLOWANCE) -> ComparisonRecord:
    """z-scores of the Monte Carlo moments against the closed-form report.

    Variance-like moments get a relative discretization allowance
    ``bias_allowance * |analytic|`` subtracted from |estimate - analytic|
    before dividing by the standard error; means get none.  Passes when every
    adjusted |z| <= 3.
    """
    if est.params != report.params or est.input_state != report.input_state:
        raise ValueError("estimates and report were computed for different parameters")
    if report.input_excess_noise != 0:
        raise ValueError("Monte Carlo runs do not model input excess noise")
    out = report.output_state
    targets = (
        ("mean_x3", est.mean_x3, est.se_mean_x3, out.mean_x, False),
        ("mean_y3", est.mean_y3, est.se_mean_y3, out.mean_y, False),
        ("var_x3", est.var_x3, est.se_var_x3, out.var_x, True),
        ("var_y3", est.var_y3, est.se_var_y3, out.var_y, True),
        ("n_x", est.n_x, est.se_n_x, report.n_x, True),
        ("n_y", est.n_y, est.se_n_y, report.n_y, True),
    )
    rows = []
    for name, value, se, target, biased in targets:
        diff = value - target
        allow = bias_allowance * abs(target) if biased else 0.0
        adj = math.copysign(abs(diff) - allow, diff) if abs(diff) > allow else 0.0
        rows.append(MomentComparison(name, value, se, target, allow, _z(diff, se), _z(adj, se)))
    return ComparisonRecord(tuple(rows), all(r.ok for r in rows))


def compare_run(params: ProtocolParams, input_state: GaussianSpinState, cfg: TrajectoryConfig,
                **kwargs) -> tuple[MomentEstimates, TeleportReport, ComparisonRecord]:
    est = run_ensemble(params, input_state, cfg, **kwargs)
    report = teleport_moments(params, input_state)
    return est, report, compare_to_analytic(est, report)


def discrete_noise_variance(g: float, eta: float, beta: float, dt: float, t_max: float) -> float:
    """Added readout noise produced by the discretized scheme itself (no sampling error).

    Follows the same update rules as the kernels but propagates deterministic
    weights, so ``discrete_noise_variance(...) / readout_noise_variance(g, eta) - 1``
    is the pure time-step bias.
    """
    if g == 0:
        return 0.0
    n = max(1, int(round(t_max / dt)))
    w, _ = step_weights(dt, n)
    decay = math.exp(-dt)
    a = -math.expm1(-dt)
    K = -2.0 * g / eta
    # weight of noise sample j in sum_k w_k F_k: a * sum_{k>j} w_k decay^(k-1-j)
    tail = np.zeros(n)
    for j in range(n - 2, -1, -1):
        tail[j] = w[j + 1] + decay * tail[j + 1]
    total = 0.0
    for c_d, c_c in channel_weights(eta, beta):
        coef = K * (c_d * w + c_c * a * tail)
        # (n1 - n2)/sqrt(2) of two independent cavities has single-cavity variance
        total += float(coef @ coef) / dt
    return total


def write_trajectory_csv(samples: np.ndarray, path, start: int = 0) -> None:
    """Dump one row per trajectory: index, initial samples of 1..3, outputs."""
    cols = ["x1", "y1", "x2", "y2", "x3", "y3", "x3_out", "y3_out"]
    idx = [COLUMNS.index(c) for c in cols]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["trajectory"] + cols)
        for i, row in enumerate(samples):
            wr.writerow([start + i] + [format(float(row[k]), ".12g") for k in idx])
