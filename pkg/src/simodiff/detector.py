"""Two-stage receiver: MAP amplitude detection, differential phase
statistic, ML phase detection, and the CLO coherent-combining reduction.

The differential reference is always the previously *received* vector,
never a re-encoded estimate, so there is no decision feedback and no error
propagation path through past amplitude decisions.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import wrap_phase
from .channel import ChannelRealization, ReceivedBlock
from .constellation import AmplitudeClass, Constellation
from .phase_noise import OscMode
from .specfun import log_ncx2_pdf


@dataclass(frozen=True)
class DetectorContext:
    constellation: Constellation
    chan: ChannelRealization
    osc_mode: OscMode = OscMode.SLO


@dataclass(frozen=True)
class DetectionResult:
    """Per-symbol decisions for one block (reference index excluded)."""

    point_index: np.ndarray
    amplitude_hat: np.ndarray
    phase_hat: np.ndarray
    excluded_antennas: int = 0


def _class_scores(t, ctx: DetectorContext) -> np.ndarray:
    """Log-posterior (up to a constant) of each amplitude class given t."""
    m = ctx.chan.m_antennas
    hsq = ctx.chan.norm_sq
    t = np.atleast_1d(np.asarray(t, dtype=float))
    scores = np.empty((len(ctx.constellation.classes), len(t)))
    for i, cl in enumerate(ctx.constellation.classes):
        scores[i] = log_ncx2_pdf(t, m, cl.amplitude**2 * hsq) + math.log(cl.prior)
    return scores


def amplitude_map(y_k: np.ndarray, ctx: DetectorContext) -> float:
    """MAP amplitude from the received energy t = ||y_k||^2.

    Ties break toward the smaller amplitude (classes are sorted ascending
    and argmax takes the first maximum).
    """
    if ctx.chan.norm_sq <= 0:
        raise ValueError("channel norm must be positive")
    t = float(np.sum(np.abs(np.asarray(y_k)) ** 2))
    i = int(np.argmax(_class_scores(t, ctx)[:, 0]))
    return ctx.constellation.classes[i].amplitude


def phase_statistic(y_k: np.ndarray, y_km1: np.ndarray) -> float:
    """Antenna-averaged wrapped difference of consecutive received phases.

    Zero-magnitude samples (probability-zero events) are excluded from the
    average rather than failing.
    """
    y_k = np.asarray(y_k)
    y_km1 = np.asarray(y_km1)
    if y_k.shape != y_km1.shape:
        raise ValueError("vectors must have the same length")
    valid = (np.abs(y_k) > 0) & (np.abs(y_km1) > 0)
    if not np.any(valid):
        return 0.0
    d = wrap_phase(np.angle(y_k[valid]) - np.angle(y_km1[valid]))
    return float(np.mean(d))


def phase_ml(psi_k: float, amp_class: AmplitudeClass) -> float:
    """Class phase with minimal circular distance to psi_k.

    Ties break toward the smaller phase (phases sorted ascending, argmin
    takes the first minimum).
    """
    d = np.abs(wrap_phase(psi_k - amp_class.phases))
    return float(amp_class.phases[int(np.argmin(d))])


def _aligned_differences(y: np.ndarray):
    """Per-antenna wrapped phase differences, branch-aligned per instant.

    Plain wrapping maps each difference independently to (-pi, pi]; when
    the true symbol phase sits near +-pi, antennas land on opposite sides
    of the cut and an arithmetic mean is corrupted by 2*pi/M per straddling
    antenna. Re-expressing every difference on the branch nearest the
    circular mean direction removes that failure mode while leaving the
    statistic bit-identical whenever the differences already cluster away
    from the cut (wrap(d - c) is then exactly d - c).
    """
    ang = np.angle(y)
    d = wrap_phase(ang[:, 1:] - ang[:, :-1])
    center = np.angle(np.exp(1j * d).sum(axis=0))
    return center[None, :] + wrap_phase(d - center[None, :])


def clo_combine(block: ReceivedBlock, chan: ChannelRealization):
    """Coherently combine: project y_k on h/||h||, giving an M=1 block.

    Returns the combined block together with the effective single-antenna
    channel (real gain ||h||). The projection is unitary, so the combined
    noise stays CN(0,2).
    """
    g = chan.norm
    if g <= 0:
        raise ValueError("channel norm must be positive")
    z = (np.conj(chan.h)[None, :] @ block.y) / g
    return ReceivedBlock(z), ChannelRealization(np.array([g + 0j]))


def detect_block(block: ReceivedBlock, ctx: DetectorContext) -> DetectionResult:
    """Run the two-stage detector over a block that starts with the
    reference symbol at index 0; returns decisions for indices 1..n.

    Amplitude uses only t_k; phase uses the differential statistic against
    the previous received vector. Fully vectorized over time (there is no
    decision feedback).
    """
    y = block.y
    if ctx.chan.m_antennas != block.m_antennas:
        raise ValueError("channel / block antenna count mismatch")
    mag2 = np.abs(y) ** 2
    t = mag2.sum(axis=0)

    # differential statistic, zero-magnitude guard per antenna/instant
    valid = (mag2[:, 1:] > 0) & (mag2[:, :-1] > 0)
    d = _aligned_differences(y)
    counts = valid.sum(axis=0)
    safe = np.maximum(counts, 1)
    psi = (d * valid).sum(axis=0) / safe
    excluded = int(valid.size - valid.sum())

    cls_idx = np.argmax(_class_scores(t[1:], ctx), axis=0)

    n = block.n_symbols - 1
    point_index = np.empty(n, dtype=np.int64)
    amplitude_hat = np.empty(n)
    phase_hat = np.empty(n)
    for i, cl in enumerate(ctx.constellation.classes):
        mask = cls_idx == i
        if not np.any(mask):
            continue
        dist = np.abs(wrap_phase(psi[mask, None] - cl.phases[None, :]))
        j = np.argmin(dist, axis=1)
        point_index[mask] = cl.point_indices[j]
        amplitude_hat[mask] = cl.amplitude
        phase_hat[mask] = cl.phases[j]
    return DetectionResult(point_index, amplitude_hat, phase_hat, excluded)
