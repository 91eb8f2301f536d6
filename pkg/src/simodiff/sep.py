"""Closed-form symbol-error machinery: differential-statistic variance,
pairwise phase-error probabilities, the high-SNR union bound, and the
large-M error floors.

The bound assumes the high-SNR regime where amplitude decisions are error
free, so only same-amplitude-class pairs contribute. It is documented as
applicable from roughly 30 dB upward.

Past-symbol convention: the variance formula needs the previous symbol's
amplitude. The default mode substitutes the average symbol *energy* E for
r_{k-1} (the literal convention of the source analysis, which mixes
amplitude and energy units); mode "sqrt_energy" uses sqrt(E) instead,
which is dimensionally consistent. Acceptance runs report both.
"""

from dataclasses import dataclass

import numpy as np

from .angles import wrap_phase
from .channel import ChannelRealization, symbol_energy_for_snr
from .constellation import Constellation
from .phase_noise import OscMode, PhaseNoiseConfig
from .specfun import q_function

PAST_AMPLITUDE_MODES = ("energy", "sqrt_energy")


@dataclass(frozen=True)
class AnalysisPoint:
    m_antennas: int
    snr_db: float
    pn_config: PhaseNoiseConfig
    sep_bound: float  # unclamped; clamp to [0, 1] only when reporting
    floor: float


def sigma_psi_sq(
    pn_config: PhaseNoiseConfig,
    m_antennas: int,
    chan: ChannelRealization,
    r_k: float,
    r_km1: float,
) -> float:
    """Variance of the differential phase statistic for one channel draw.

    Oscillator part: var_tx + var_rx (CLO) or var_tx + var_rx/M (SLO).
    AWGN part: (1/M^2) * sum_m |h_m|^-2 * (r_k^-2 + r_{k-1}^-2).
    """
    if r_k <= 0 or r_km1 <= 0:
        raise ValueError("amplitudes must be positive")
    m = m_antennas
    harmonic = float(np.sum(1.0 / np.abs(chan.h) ** 2))
    awgn = harmonic / m**2 * (1.0 / r_k**2 + 1.0 / r_km1**2)
    if pn_config.osc_mode is OscMode.CLO:
        osc = pn_config.var_tx + pn_config.var_rx
    else:
        osc = pn_config.var_tx + pn_config.var_rx / m
    return osc + awgn


def pairwise_phase_error(phi_i: float, phi_j: float, sigma_psi: float) -> float:
    """Q(|wrap(phi_i - phi_j)| / (2 sigma_psi)); 0 in the sigma -> 0 limit."""
    d = abs(wrap_phase(phi_i - phi_j))
    if sigma_psi == 0.0:
        return 0.0
    if sigma_psi < 0:
        raise ValueError("sigma_psi must be nonnegative")
    return q_function(d / (2.0 * sigma_psi))


def _union_sum(constellation: Constellation, sigma_for_class) -> float:
    """(1/N) sum over ordered same-class pairs of the pairwise Q term.

    sigma_for_class maps an AmplitudeClass to the sigma_psi used for
    symbols transmitted from that class (cross-class pairs contribute 0).
    """
    n = constellation.order
    total = 0.0
    for cl in constellation.classes:
        sigma = sigma_for_class(cl)
        if sigma == 0.0:
            continue
        d = np.abs(wrap_phase(cl.phases[:, None] - cl.phases[None, :]))
        q = q_function(d / (2.0 * sigma))
        np.fill_diagonal(q, 0.0)
        total += float(q.sum())
    return total / n


def union_bound_for_constellation(
    constellation: Constellation,
    pn_config: PhaseNoiseConfig,
    m_antennas: int,
    chan: ChannelRealization,
    past_amplitude_mode: str = "energy",
) -> float:
    """High-SNR union bound with the constellation already at its
    transmitted energy scale."""
    if past_amplitude_mode not in PAST_AMPLITUDE_MODES:
        raise ValueError(f"unknown past_amplitude_mode {past_amplitude_mode!r}")
    e = constellation.avg_energy
    r_km1 = e if past_amplitude_mode == "energy" else float(np.sqrt(e))

    def sigma_for_class(cl):
        return float(
            np.sqrt(sigma_psi_sq(pn_config, m_antennas, chan, cl.amplitude, r_km1))
        )

    return _union_sum(constellation, sigma_for_class)


def union_bound_sep(
    constellation: Constellation,
    pn_config: PhaseNoiseConfig,
    m_antennas: int,
    snr_db: float,
    chan: ChannelRealization,
    hold_receive_snr: bool = True,
    past_amplitude_mode: str = "energy",
) -> float:
    """High-SNR union bound on the SEP at a given SNR point.

    The constellation argument fixes the shape; its amplitudes are
    rescaled internally to the transmit energy implied by snr_db (and the
    1/M power scaling when hold_receive_snr is set). The realized channel
    draw supplies the 1/|h_m|^2 terms; averaging over fading is the
    caller's job (the harness averages over its trial draws).
    """
    e_t = symbol_energy_for_snr(snr_db, m_antennas, hold_receive_snr)
    return union_bound_for_constellation(
        constellation.scaled(e_t), pn_config, m_antennas, chan, past_amplitude_mode
    )


def error_floor(constellation: Constellation, pn_config: PhaseNoiseConfig) -> float:
    """SEP limit as SNR -> infinity and M -> infinity.

    The limiting statistic variance is var_tx + var_rx (CLO) or var_tx
    alone (SLO); the AWGN term vanishes. Energy-scale independent.
    """
    if pn_config.osc_mode is OscMode.CLO:
        var = pn_config.var_tx + pn_config.var_rx
    else:
        var = pn_config.var_tx
    sigma = float(np.sqrt(var))
    return _union_sum(constellation, lambda cl: sigma)


def clamp_probability(p: float) -> float:
    """Clamp a union bound to [0, 1] for reporting."""
    return min(max(p, 0.0), 1.0)
