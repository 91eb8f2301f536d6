"""Square QAM constellations in polar form.

Constellations are decomposed into amplitude classes: groups of points that
share the same magnitude. The two-stage detector first picks an amplitude
class (from received energy) and then a phase within that class, so the
class decomposition is the central data structure here.
"""

from dataclasses import dataclass, field

import numpy as np

from .angles import wrap_phase

_REL_TOL = 1e-9


class ConstellationError(ValueError):
    """Unsupported constellation configuration."""


class PolarLookupError(LookupError):
    """No constellation point / class matches the requested polar value."""


@dataclass(frozen=True)
class AmplitudeClass:
    """One magnitude ring of a constellation.

    phases are sorted strictly ascending in (-pi, pi]; point_indices[i] is
    the index (into Constellation.points) of the point with phase phases[i].
    """

    amplitude: float
    prior: float
    phases: np.ndarray
    point_indices: np.ndarray


@dataclass(frozen=True)
class Constellation:
    """Complex constellation points plus their amplitude-class split.

    classes are sorted by ascending amplitude. Immutable after
    construction; safe to share across parallel trial workers.
    """

    points: np.ndarray
    avg_energy: float
    classes: tuple = field(default=())

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.points)

    @property
    def phases(self) -> np.ndarray:
        return wrap_phase(np.angle(self.points))

    def scaled(self, avg_energy: float) -> "Constellation":
        """Same shape rescaled to a new average energy."""
        if avg_energy <= 0:
            raise ConstellationError("avg_energy must be positive")
        c = np.sqrt(avg_energy / self.avg_energy)
        classes = tuple(
            AmplitudeClass(cl.amplitude * c, cl.prior, cl.phases, cl.point_indices)
            for cl in self.classes
        )
        return Constellation(self.points * c, avg_energy, classes)


def build_qam(order: int, avg_energy: float = 1.0) -> Constellation:
    """Build a standard square QAM grid with the given average energy.

    Supported orders are 4, 16 and 64. Points are scaled so the
    uniform-prior average energy equals avg_energy; amplitude classes are
    formed by grouping equal magnitudes (1e-9 relative tolerance).
    """
    if order not in (4, 16, 64):
        raise ConstellationError(f"unsupported QAM order {order}")
    if avg_energy <= 0:
        raise ConstellationError("avg_energy must be positive")
    side = int(round(np.sqrt(order)))
    levels = 2.0 * np.arange(side) - (side - 1)
    re, im = np.meshgrid(levels, levels)
    points = (re + 1j * im).ravel()
    points = points * np.sqrt(avg_energy / np.mean(np.abs(points) ** 2))

    mags = np.abs(points)
    classes = []
    assigned = np.zeros(order, dtype=bool)
    for i in np.argsort(mags):
        if assigned[i]:
            continue
        members = np.flatnonzero(np.abs(mags - mags[i]) <= _REL_TOL * mags[i])
        assigned[members] = True
        amp = float(np.mean(mags[members]))
        ph = wrap_phase(np.angle(points[members]))
        sort = np.argsort(ph)
        classes.append(
            AmplitudeClass(
                amplitude=amp,
                prior=len(members) / order,
                phases=ph[sort],
                point_indices=members[sort],
            )
        )
    classes.sort(key=lambda c: c.amplitude)
    return Constellation(points, float(avg_energy), tuple(classes))


def class_of(constellation: Constellation, amplitude: float) -> AmplitudeClass:
    """Return the amplitude class matching `amplitude` (1e-9 relative)."""
    for cl in constellation.classes:
        if abs(cl.amplitude - amplitude) <= _REL_TOL * max(cl.amplitude, abs(amplitude)):
            return cl
    raise PolarLookupError(f"no amplitude class at {amplitude!r}")


def symbol_from_polar(constellation: Constellation, amplitude: float, phase: float) -> int:
    """Index of the constellation point at the given polar coordinates.

    Amplitude is matched to 1e-9 relative, phase to 1e-9 rad absolute
    (after wrapping both sides to (-pi, pi]).
    """
    cl = class_of(constellation, amplitude)
    d = np.abs(wrap_phase(np.asarray(cl.phases) - wrap_phase(phase)))
    j = int(np.argmin(d))
    if d[j] > 1e-9:
        raise PolarLookupError(f"no point at amplitude {amplitude!r}, phase {phase!r}")
    return int(cl.point_indices[j])
