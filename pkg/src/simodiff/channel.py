"""SIMO phase-noise channel: quasi-static fading, phase rotation, AWGN.

Conventions pinned here and used everywhere else:
  * AWGN per receive antenna and symbol is CN(0, 2): variance 1 per real
    component.
  * The reported SNR axis is E/2 where E is the average constellation
    energy before any 1/M power scaling, so E = 2 * 10^(snr_db/10).
  * With `hold_receive_snr`, the transmitted energy is E/M so the average
    receive SNR stays constant as the antenna count grows.
"""

from dataclasses import dataclass

import numpy as np

from .phase_noise import PhaseTrajectory

_DEGENERATE_REL = 1e-9


@dataclass(frozen=True)
class ChannelRealization:
    """Path-loss vector, fixed per trial and known to the receiver."""

    h: np.ndarray
    redraws: int = 0

    @property
    def m_antennas(self) -> int:
        return len(self.h)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.h) ** 2))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.h))


@dataclass(frozen=True)
class ReceivedBlock:
    """Received samples y[m, k], M x n."""

    y: np.ndarray

    @property
    def m_antennas(self) -> int:
        return self.y.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.y.shape[1]


def draw_fading(
    m_antennas: int,
    rng: np.random.Generator,
    fixed_ones: bool = False,
) -> ChannelRealization:
    """Draw h with iid CN(0,1) entries (or all-ones in the test mode).

    Draws with ||h||^2 < 1e-9 * M are redrawn; the analysis formulas
    divide by |h_m|^2 and a degenerate vector would poison them. Redraws
    are counted on the returned realization.
    """
    if fixed_ones:
        return ChannelRealization(np.ones(m_antennas, dtype=complex))
    redraws = 0
    while True:
        h = (rng.standard_normal(m_antennas) + 1j * rng.standard_normal(m_antennas)) / np.sqrt(2.0)
        if np.sum(np.abs(h) ** 2) >= _DEGENERATE_REL * m_antennas:
            return ChannelRealization(h, redraws)
        redraws += 1


def transmit(
    x: np.ndarray,
    traj: PhaseTrajectory,
    chan: ChannelRealization,
    rng: np.random.Generator,
    noise_off: bool = False,
) -> ReceivedBlock:
    """Apply the channel: y[m,k] = exp(j theta[m,k]) h_m x_k + w[m,k].

    w is iid CN(0,2) unless noise_off (a test-only mode) is set.
    """
    x = np.asarray(x)
    m, n = traj.theta.shape
    if chan.m_antennas != m or len(x) != n:
        raise ValueError(
            f"dimension mismatch: x has {len(x)} symbols, trajectory is {m}x{n}, "
            f"channel has {chan.m_antennas} antennas"
        )
    y = np.exp(1j * traj.theta) * chan.h[:, None] * x[None, :]
    if not noise_off:
        y = y + rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return ReceivedBlock(y)


def symbol_energy_for_snr(
    snr_db: float,
    m_antennas: int = 1,
    hold_receive_snr: bool = False,
) -> float:
    """Transmit constellation energy for a target SNR-per-symbol in dB.

    With noise variance 2 the axis convention E/2 gives E = 2*10^(snr/10);
    holding the receive SNR divides the transmitted energy by M.
    """
    e = 2.0 * 10.0 ** (snr_db / 10.0)
    if hold_receive_snr:
        e /= m_antennas
    return e
