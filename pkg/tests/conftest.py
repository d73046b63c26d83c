import math

import pytest

from spinteleport.montecarlo import TrajectoryConfig, run_ensemble, run_swap_ensemble
from spinteleport.states import ProtocolParams, make_coherent_state

ACCEPTANCE_LINES = []


def mc_params(g=1.0, r=1.0, C=100.0):
    return ProtocolParams(n_atoms=1e6, cooperativity=C, gamma0=2 * math.pi * 225e3, squeezing_r=r, gain_g=g)


class MCCache:
    """Full-size (1e5 trajectory) runs shared between test modules."""

    def __init__(self):
        self._runs = {}

    def run(self, g=1.0, r=1.0, C=100.0, state=None, n_traj=100_000, seed=12345, **kw):
        state = state or make_coherent_state()
        key = (g, r, C, state, n_traj, seed, tuple(sorted(kw.items())))
        if key not in self._runs:
            cfg = TrajectoryConfig(n_traj=n_traj, seed=seed)
            self._runs[key] = run_ensemble(mc_params(g, r, C), state, cfg, **kw)
        return self._runs[key]

    def swap(self, r01=1.0, r23=1.0, C=100.0, g=1.0, n_traj=100_000, seed=777):
        key = ("swap", r01, r23, C, g, n_traj, seed)
        if key not in self._runs:
            cfg = TrajectoryConfig(n_traj=n_traj, seed=seed)
            self._runs[key] = run_swap_ensemble(mc_params(g, r23, C), r01, cfg)
        return self._runs[key]


@pytest.fixture(scope="session")
def mc():
    return MCCache()


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
