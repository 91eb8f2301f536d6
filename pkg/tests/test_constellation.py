import math

import numpy as np
import pytest

from simodiff.constellation import (
    ConstellationError,
    PolarLookupError,
    build_qam,
    class_of,
    symbol_from_polar,
)


def test_16qam_amplitude_classes():
    c = build_qam(16, 1.0)
    amps = [cl.amplitude for cl in c.classes]
    np.testing.assert_allclose(
        amps, [math.sqrt(1 / 5), 1.0, 3 * math.sqrt(1 / 5)], rtol=1e-12
    )


def test_16qam_priors():
    c = build_qam(16, 1.0)
    assert [cl.prior for cl in c.classes] == [0.25, 0.5, 0.25]
    assert [len(cl.phases) for cl in c.classes] == [4, 8, 4]


def test_qpsk_single_class():
    c = build_qam(4, 1.0)
    assert len(c.classes) == 1
    cl = c.classes[0]
    assert cl.amplitude == pytest.approx(1.0)
    assert cl.prior == 1.0
    np.testing.assert_allclose(
        cl.phases, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4]
    )


@pytest.mark.parametrize("order", [4, 16, 64])
@pytest.mark.parametrize("energy", [1.0, 5.0])
def test_energy_and_structure(order, energy):
    c = build_qam(order, energy)
    assert c.order == order
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(energy, rel=1e-12)
    assert sum(cl.prior for cl in c.classes) == pytest.approx(1.0)
    # classes sorted ascending, phases sorted ascending, indices consistent
    amps = [cl.amplitude for cl in c.classes]
    assert amps == sorted(amps)
    seen = []
    for cl in c.classes:
        assert list(cl.phases) == sorted(cl.phases)
        for ph, idx in zip(cl.phases, cl.point_indices):
            p = c.points[idx]
            assert abs(p) == pytest.approx(cl.amplitude, rel=1e-9)
            assert np.angle(p) == pytest.approx(ph, abs=1e-12)
        seen.extend(cl.point_indices)
    assert sorted(seen) == list(range(order))


def test_64qam_class_count():
    # 64-QAM magnitudes: 9 distinct |a+jb| with a,b in odd levels 1..7
    c = build_qam(64, 1.0)
    assert len(c.classes) == 9


def test_scaled_preserves_shape():
    c = build_qam(16, 1.0)
    s = c.scaled(4.0)
    assert s.avg_energy == pytest.approx(4.0)
    np.testing.assert_allclose(s.points, 2.0 * c.points, rtol=1e-12)
    for cl, scl in zip(c.classes, s.classes):
        assert scl.amplitude == pytest.approx(2.0 * cl.amplitude, rel=1e-12)
        np.testing.assert_array_equal(scl.phases, cl.phases)
        np.testing.assert_array_equal(scl.point_indices, cl.point_indices)
    with pytest.raises(ConstellationError):
        c.scaled(0.0)


def test_build_errors():
    with pytest.raises(ConstellationError):
        build_qam(8, 1.0)
    with pytest.raises(ConstellationError):
        build_qam(16, -1.0)


def test_class_of():
    c = build_qam(16, 1.0)
    assert len(class_of(c, 1.0).phases) == 8
    c5 = build_qam(16, 5.0)
    assert class_of(c5, 3.0).amplitude == pytest.approx(3.0, rel=1e-12)
    q = build_qam(4, 1.0)
    assert class_of(q, 1.0) is q.classes[0]
    with pytest.raises(PolarLookupError):
        class_of(c, 0.9)


def test_symbol_from_polar():
    q = build_qam(4, 1.0)
    i = symbol_from_polar(q, 1.0, np.pi / 4)
    assert q.points[i] == pytest.approx((1 + 1j) / math.sqrt(2), rel=1e-12)

    c = build_qam(16, 1.0)
    j = symbol_from_polar(c, math.sqrt(1 / 5), -3 * np.pi / 4)
    p = c.points[j]
    assert p.real < 0 and p.imag < 0
    assert abs(p) == pytest.approx(math.sqrt(1 / 5), rel=1e-9)

    with pytest.raises(PolarLookupError):
        symbol_from_polar(c, 0.9, 0.0)
    with pytest.raises(PolarLookupError):
        symbol_from_polar(c, 1.0, 0.1)  # valid amplitude, invalid phase
