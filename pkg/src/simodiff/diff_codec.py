"""Differential phase accumulation at the transmitter.

Each transmitted phase is the wrapped running sum of all information
phases so far; amplitudes pass through unaltered. Wrapped differences of
consecutive transmit phases therefore recover the information phases,
which is what the receiver's differential statistic exploits.
"""

from dataclasses import dataclass

import numpy as np

from .angles import wrap_phase


@dataclass(frozen=True)
class ReferenceSymbol:
    """The single known symbol that starts each differential block."""

    amplitude: float
    phase: float = 0.0


@dataclass(frozen=True)
class EncodedSequence:
    x: np.ndarray
    cumulative_phase: np.ndarray


def first_symbol_policy(avg_energy: float) -> ReferenceSymbol:
    """Phase reference prefixed to every block: amplitude sqrt(E), phase 0.

    Exactly one non-information symbol per block; the receiver excludes
    index 0 from SEP scoring. It is not counted as a pilot (one symbol per
    block of thousands).
    """
    return ReferenceSymbol(amplitude=float(np.sqrt(avg_energy)), phase=0.0)


def encode(amplitudes, phases) -> EncodedSequence:
    """Accumulate phases: x_k = r_k * exp(j * wrap(sum_{l<=k} phi_l)).

    The accumulator is kept wrapped so precision does not degrade over
    long blocks.
    """
    r = np.asarray(amplitudes, dtype=float)
    phi = np.asarray(phases, dtype=float)
    if r.shape != phi.shape:
        raise ValueError("amplitudes and phases must have the same length")
    # chunked cumsum with a wrapped carry: vectorized, yet the accumulator
    # magnitude stays bounded so precision holds over arbitrarily long blocks
    acc = np.empty_like(phi)
    carry = 0.0
    step = 4096
    for lo in range(0, len(phi), step):
        hi = min(lo + step, len(phi))
        chunk = wrap_phase(carry + np.cumsum(phi[lo:hi]))
        acc[lo:hi] = chunk
        carry = chunk[-1]
    return EncodedSequence(x=r * np.exp(1j * acc), cumulative_phase=acc)


def encode_block(amplitudes, phases, avg_energy: float) -> EncodedSequence:
    """Encode one block with the reference symbol prepended at index 0."""
    ref = first_symbol_policy(avg_energy)
    enc = encode(amplitudes, phases)
    x = np.concatenate(([ref.amplitude * np.exp(1j * ref.phase)], enc.x))
    cum = np.concatenate(([ref.phase], enc.cumulative_phase))
    return EncodedSequence(x=x, cumulative_phase=cum)
