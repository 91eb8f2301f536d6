"""Pilot-aided extended Kalman filter baseline.

Tracks the per-antenna phase-noise vector with an identity state
transition and the fully/partially correlated increment covariance, then
de-rotates, coherently combines, and detects by Euclidean distance.
Detected symbols feed back into the update step; this decision feedback is
deliberate and reproduces the baseline's documented sensitivity to
detection errors.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ReceivedBlock
from .constellation import Constellation


@dataclass(frozen=True)
class EkfState:
    theta_hat: np.ndarray
    P: np.ndarray


@dataclass(frozen=True)
class PilotSchedule:
    """Pilot every `period` symbols, starting at `offset`."""

    period: int
    offset: int = 0

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("pilot period must be >= 1")

    def is_pilot(self, k: int) -> bool:
        return (k - self.offset) % self.period == 0

    def pilot_mask(self, n: int) -> np.ndarray:
        ks = np.arange(n)
        return (ks - self.offset) % self.period == 0


@dataclass(frozen=True)
class EkfResult:
    point_index: np.ndarray  # -1 at pilot positions
    pilot_mask: np.ndarray
    skipped_updates: int = 0


def predict(state: EkfState, sigma: np.ndarray) -> EkfState:
    """Time update: identity transition, P grows by the process covariance."""
    return EkfState(state.theta_hat, state.P + sigma)


def update(
    state: EkfState,
    y_k: np.ndarray,
    x_known: complex,
    chan: ChannelRealization,
) -> EkfState:
    """Measurement update against a known (pilot or detected) symbol.

    The measurement is the stacked real/imaginary parts of y_k, with noise
    covariance I (variance 1 per real component, CN(0,2) noise). The
    covariance update uses the Joseph form and is re-symmetrized.
    Non-finite innovations skip the update.
    """
    theta = np.asarray(state.theta_hat, dtype=float)
    m = len(theta)
    mu = chan.h * x_known * np.exp(1j * theta)  # predicted complex measurement
    nu = np.asarray(y_k) - mu
    if not np.all(np.isfinite(nu.view(float))):
        return state

    # Jacobian of [Re mu; Im mu] wrt theta: block-diagonal row pairs
    H = np.zeros((2 * m, m))
    H[0::2, :][np.diag_indices(m)] = -mu.imag
    H[1::2, :][np.diag_indices(m)] = mu.real

    P = state.P
    S = H @ P @ H.T + np.eye(2 * m)
    K = P @ H.T @ np.linalg.inv(S)
    z = np.empty(2 * m)
    z[0::2] = nu.real
    z[1::2] = nu.imag
    theta_new = theta + K @ z
    ikh = np.eye(m) - K @ H
    P_new = ikh @ P @ ikh.T + K @ K.T
    P_new = 0.5 * (P_new + P_new.T)
    return EkfState(theta_new, P_new)


def derotate_combine(y_k: np.ndarray, theta_hat: np.ndarray, chan: ChannelRealization) -> complex:
    """De-rotate each antenna by the predicted phase and combine:
    sum_m conj(h_m) y_mk e^{-j theta_m} / ||h||^2."""
    return complex(
        np.sum(np.conj(chan.h) * np.asarray(y_k) * np.exp(-1j * np.asarray(theta_hat)))
        / chan.norm_sq
    )


def _run_scalar(y, h, points, pilots, pilot_mask, theta0, sig) -> EkfResult:
    """M = 1 fast path with plain floats (used for the combined CLO case)."""
    n = len(y)
    th = float(theta0)
    p = 0.0
    habs2 = (h.real * h.real + h.imag * h.imag)
    hconj = h.conjugate()
    out = np.full(n, -1, dtype=np.int64)
    skipped = 0
    for k in range(n):
        p += sig
        rot = complex(np.cos(th), np.sin(th))
        if pilot_mask[k]:
            x = pilots[k]
        else:
            z = hconj * y[k] / habs2 * rot.conjugate()
            idx = int(np.argmin(np.abs(points - z)))
            out[k] = idx
            x = points[idx]
        mu = h * x * rot
        nu = y[k] - mu
        if not (np.isfinite(nu.real) and np.isfinite(nu.imag)):
            skipped += 1
            continue
        mabs2 = mu.real * mu.real + mu.imag * mu.imag
        denom = 1.0 + p * mabs2
        # scalar Kalman gain applied to Im(conj(mu) * nu)
        th = th + p * (mu.real * nu.imag - mu.imag * nu.real) / denom
        p = p / denom
    return EkfResult(out, np.asarray(pilot_mask), skipped)


def run_ekf_block(
    block: ReceivedBlock,
    chan: ChannelRealization,
    schedule: PilotSchedule,
    constellation: Constellation,
    pilots,
    theta0,
    process_cov: np.ndarray,
) -> EkfResult:
    """Filter one block: per symbol predict, then pilot update or
    de-rotate + detect + decision-feedback update.

    `pilots` is the known pilot symbol value (scalar) or a length-n array
    giving the transmitted value at each pilot position; `theta0` is the
    true initial phase vector (the block-leading training convention),
    with P_0 equal to one process covariance step.
    """
    y = block.y
    m, n = y.shape
    pilot_mask = schedule.pilot_mask(n)
    pilots_arr = np.broadcast_to(np.asarray(pilots, dtype=complex), (n,))
    points = constellation.points

    if m == 1:
        sig = float(np.asarray(process_cov).reshape(-1)[0])
        theta0_s = float(np.asarray(theta0).reshape(-1)[0])
        return _run_scalar(y[0], complex(chan.h[0]), points, pilots_arr, pilot_mask, theta0_s, sig)

    state = EkfState(np.asarray(theta0, dtype=float).copy(), np.zeros((m, m)))
    out = np.full(n, -1, dtype=np.int64)
    skipped = 0
    for k in range(n):
        state = predict(state, process_cov)
        if pilot_mask[k]:
            x = complex(pilots_arr[k])
        else:
            z = derotate_combine(y[:, k], state.theta_hat, chan)
            idx = int(np.argmin(np.abs(points - z)))
            out[k] = idx
            x = complex(points[idx])
        new_state = update(state, y[:, k], x, chan)
        if new_state is state:
            skipped += 1
        state = new_state
    return EkfResult(out, pilot_mask, skipped)
