"""Phase wrapping helpers.

All phases in this package live on (-pi, pi]; this is the single wrap
convention used everywhere (constellation phases, differential statistics,
circular distances).
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_phase(x):
    """Wrap angle(s) to the half-open interval (-pi, pi].

    Works on scalars and arrays. Values exactly at -pi map to +pi.
    """
    out = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)
    if np.ndim(x) == 0:
        return float(out)
    return out
