"""Discrete-time Wiener phase-noise trajectories for CLO / SLO receivers.

The composite phase at antenna m and symbol k is the sum of a transmitter
random walk (always shared) and a receiver random walk that is either one
common process (CLO) or M independent processes (SLO). Phases are stored
unwrapped; wrapping happens only where phases are compared or consumed.
"""

import enum
from dataclasses import dataclass

import numpy as np


class OscMode(str, enum.Enum):
    CLO = "clo"
    SLO = "slo"


@dataclass(frozen=True)
class PhaseNoiseConfig:
    """Innovation variances (rad^2) of the two oscillators plus the
    receiver oscillator topology."""

    var_tx: float
    var_rx: float
    osc_mode: OscMode = OscMode.SLO

    def __post_init__(self):
        if self.var_tx < 0 or self.var_rx < 0:
            raise ValueError("innovation variances must be nonnegative")
        object.__setattr__(self, "osc_mode", OscMode(self.osc_mode))


@dataclass(frozen=True)
class PhaseTrajectory:
    """Realized composite phases theta[m, k], unwrapped, M x n."""

    theta: np.ndarray

    @property
    def m_antennas(self) -> int:
        return self.theta.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.theta.shape[1]


def _walk(rng: np.random.Generator, n: int, var: float, theta0) -> np.ndarray:
    """Random walk(s) of length n with N(0, var) increments.

    theta0 may be scalar (one walk) or a vector (independent walks,
    stacked as rows).
    """
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    rows = theta0.shape[0]
    steps = np.zeros((rows, n))
    if n > 1 and var > 0:
        steps[:, 1:] = rng.normal(0.0, np.sqrt(var), size=(rows, n - 1))
    return theta0[:, None] + np.cumsum(steps, axis=1)


def _uniform_phase(rng: np.random.Generator, size=None):
    # (-pi, pi]: negate the half-open uniform [-pi, pi)
    return -rng.uniform(-np.pi, np.pi, size=size)


def sample_trajectory(
    config: PhaseNoiseConfig,
    m_antennas: int,
    n_symbols: int,
    rng: np.random.Generator,
) -> PhaseTrajectory:
    """Draw one composite phase trajectory of shape (m_antennas, n_symbols).

    Initial phases are uniform on (-pi, pi]. In CLO mode all antenna rows
    are identical; in SLO mode the transmitter walk is shared while the
    receiver walks are independent per antenna.
    """
    if m_antennas < 1 or n_symbols < 1:
        raise ValueError("need m_antennas >= 1 and n_symbols >= 1")
    tx = _walk(rng, n_symbols, config.var_tx, _uniform_phase(rng))[0]
    if config.osc_mode is OscMode.CLO:
        rx = _walk(rng, n_symbols, config.var_rx, _uniform_phase(rng))[0]
        row = tx + rx
        theta = np.repeat(row[None, :], m_antennas, axis=0)
    else:
        rx = _walk(rng, n_symbols, config.var_rx, _uniform_phase(rng, m_antennas))
        theta = tx[None, :] + rx
    return PhaseTrajectory(theta)


def process_covariance(config: PhaseNoiseConfig, m_antennas: int) -> np.ndarray:
    """M x M covariance of the composite per-symbol phase increment vector.

    SLO: var_tx on the off-diagonal (shared transmitter walk), plus var_rx
    on the diagonal. CLO: every entry var_tx + var_rx (one fully
    correlated increment).
    """
    if config.osc_mode is OscMode.CLO:
        return np.full((m_antennas, m_antennas), config.var_tx + config.var_rx)
    sig = np.full((m_antennas, m_antennas), config.var_tx)
    sig[np.diag_indices(m_antennas)] += config.var_rx
    return sig
