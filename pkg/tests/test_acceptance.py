"""End-to-end acceptance gate.

Each test exercises one headline requirement at its stated operating point
and records a [PASS]/[FAIL] summary line that the shared conftest echoes
into the terminal summary, so the gate status is always visible in the
run log.

The Monte Carlo configurations are fixed-seed and deterministic, so these
tests either pass reproducibly or fail reproducibly.
"""

import time

import numpy as np
import pytest

from simodiff.channel import draw_fading
from simodiff.constellation import build_qam
from simodiff.harness import (
    SimConfig,
    record_to_csv_row,
    run_sweep,
    selftest,
)
from simodiff.phase_noise import PhaseNoiseConfig
from simodiff.sep import clamp_probability, union_bound_for_constellation
from simodiff.channel import symbol_energy_for_snr

SEED = 20260823


def _mean_bound(point, mode):
    """Trial-averaged analytical bound for a simulated grid point,
    recomputed over the same per-trial fading draws."""
    pn = PhaseNoiseConfig(point.var_tx, point.var_rx, point.osc_mode)
    e_t = symbol_energy_for_snr(point.snr_db, point.m_antennas, point.hold_receive_snr)
    const = build_qam(point.qam_order, e_t)
    vals = []
    for t in range(point.trials):
        ss = np.random.SeedSequence(point.master_seed, spawn_key=(point.grid_index, t))
        chan = draw_fading(point.m_antennas, np.random.default_rng(ss))
        vals.append(
            clamp_probability(
                union_bound_for_constellation(const, pn, point.m_antennas, chan, mode)
            )
        )
    return float(np.mean(vals))


# --------------------------------------------------------------------------
# 1. analytical vs simulated SEP within a factor of 2 at high SNR
# --------------------------------------------------------------------------

def test_criterion_1_analytic_matches_simulation(gate):
    cfg = SimConfig(
        method="dif", osc_mode="slo", m_antennas=(10,), snr_db=(35.0, 40.0),
        var_tx=(0.01,), var_rx=(0.01,), qam_order=16,
        symbols_per_trial=10_000, trials=100, master_seed=SEED,
    )
    records = run_sweep(cfg)
    ok = True
    details = []
    for rec in records:
        assert rec.symbols_scored >= 1_000_000
        assert rec.wall_time <= 120.0
        for mode in ("energy", "sqrt_energy"):
            ana = _mean_bound(rec.config, mode)
            ratio = rec.sep / ana
            details.append(f"{rec.config.snr_db:g}dB/{mode}: sim={rec.sep:.3e} "
                           f"bound={ana:.3e} ratio={ratio:.2f}")
            ok &= 0.5 <= ratio <= 2.0
    gate.report("criterion 1 (analytic within factor 2)", ok, "; ".join(details))
    assert ok


# --------------------------------------------------------------------------
# 2. differential detection beats the pilot-aided EKF under strong phase noise
# --------------------------------------------------------------------------

def test_criterion_2_dif_beats_ekf(gate):
    base = dict(
        osc_mode="clo", m_antennas=(10,), snr_db=(10.0, 20.0, 30.0, 40.0),
        var_tx=(0.01,), var_rx=(0.01,), qam_order=16,
        symbols_per_trial=10_000, trials=100, master_seed=SEED,
    )
    dif = run_sweep(SimConfig(method="dif", **base))
    # 2% of EKF symbols are pilots and go unscored; run a few extra trials
    # so at least 10^6 data symbols are scored per point
    ekf = run_sweep(SimConfig(method="ekf", pilot_period=50, **dict(base, trials=105)))
    ok = True
    details = []
    for d, e in zip(dif, ekf):
        assert d.symbols_scored >= 1_000_000 and e.symbols_scored >= 1_000_000
        gap_ok = d.sep < e.sep and d.ci_high < e.ci_low
        details.append(f"{d.config.snr_db:g}dB: dif={d.sep:.3e} ekf={e.sep:.3e}")
        ok &= gap_ok
    gate.report("criterion 2 (DIF < EKF, disjoint CIs)", ok, "; ".join(details))
    assert ok


# --------------------------------------------------------------------------
# 3. oscillator configuration ordering flips between low and high SNR
# --------------------------------------------------------------------------

def test_criterion_3_slo_clo_ordering(gate):
    base = dict(
        method="dif", m_antennas=(10,), snr_db=(10.0, 40.0),
        var_tx=(0.01,), var_rx=(0.01,), qam_order=16,
        symbols_per_trial=10_000, trials=100, master_seed=SEED,
    )
    slo = run_sweep(SimConfig(osc_mode="slo", **base))
    clo = run_sweep(SimConfig(osc_mode="clo", **base))
    slo_low, slo_high = slo
    clo_low, clo_high = clo
    high_ok = slo_high.ci_high < clo_high.ci_low
    low_ok = clo_low.ci_high < slo_low.ci_low
    ok = high_ok and low_ok
    gate.report(
        "criterion 3 (SLO<CLO at 40dB, CLO<SLO at 10dB)", ok,
        f"40dB: slo={slo_high.sep:.3e} clo={clo_high.sep:.3e}; "
        f"10dB: slo={slo_low.sep:.3e} clo={clo_low.sep:.3e}",
    )
    assert ok


# --------------------------------------------------------------------------
# 4. error floor behaviour over the antenna grid
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def floor_sweeps():
    sweeps = {}
    for vt in (0.006, 0.008, 0.01):
        cfg = SimConfig(
            method="dif", osc_mode="slo", m_antennas=(1, 2, 5, 10, 20, 50, 100),
            snr_db=(40.0,), var_tx=(vt,), var_rx=(0.01,), qam_order=16,
            symbols_per_trial=5_000, trials=200, master_seed=SEED,
        )
        sweeps[vt] = run_sweep(cfg)
    return sweeps


def test_criterion_4_monotone_and_floor_ordering(floor_sweeps, gate):
    ok = True
    details = []
    for vt, recs in floor_sweeps.items():
        seps = [r.sep for r in recs]
        # nonincreasing, read statistically: no significant increase
        # between consecutive antenna counts
        mono = all(b.ci_low <= a.ci_high for a, b in zip(recs, recs[1:]))
        ok &= mono
        details.append(f"vt={vt:g}: seps={['%.1e' % s for s in seps]} mono={mono}")
    floors = [floor_sweeps[vt][0].floor for vt in (0.006, 0.008, 0.01)]
    ordered = floors[0] < floors[1] < floors[2]
    ok &= ordered

    # floor invariance to the receiver innovation variance: rerun the
    # M=100 point with a different var_rx only
    alt = run_sweep(
        SimConfig(
            method="dif", osc_mode="slo", m_antennas=(100,), snr_db=(40.0,),
            var_tx=(0.01,), var_rx=(0.02,), qam_order=16,
            symbols_per_trial=5_000, trials=200, master_seed=SEED,
        )
    )[0]
    ref = floor_sweeps[0.01][-1]
    invariant = alt.floor == ref.floor and not (
        alt.ci_low > ref.ci_high or alt.ci_high < ref.ci_low
    )
    ok &= invariant
    details.append(f"floors={['%.2e' % f for f in floors]} ordered={ordered} "
                   f"var_rx-invariant={invariant}")
    gate.report("criterion 4a (floor approach: monotone, ordered, rx-invariant)",
            ok, "; ".join(details))
    assert ok


def test_criterion_4_floor_proximity_at_m100(floor_sweeps, gate):
    # Known limitation, kept as an honest failure: with transmit power
    # scaled down by M, the thermal contribution to the differential
    # statistic variance does not vanish as M grows, so at 40 dB the
    # M=100 SEP settles a factor ~1.7-5 above the M -> infinity floor
    # instead of within 25%.
    ok = True
    details = []
    for vt, recs in floor_sweeps.items():
        rec = recs[-1]
        rel = abs(rec.sep - rec.floor) / rec.floor
        details.append(f"vt={vt:g}: sep={rec.sep:.3e} floor={rec.floor:.3e} "
                       f"rel={rel:.2f}")
        ok &= rel <= 0.25
    gate.report("criterion 4b (M=100 within 25% of floor)", ok, "; ".join(details))
    assert ok


# --------------------------------------------------------------------------
# 5. numerical self-test battery
# --------------------------------------------------------------------------

def test_criterion_5_selftest(gate):
    t0 = time.perf_counter()
    results = selftest()
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in results) and elapsed <= 60.0
    gate.report(
        "criterion 5 (selftest battery)", ok,
        f"{sum(r.passed for r in results)}/{len(results)} checks in {elapsed:.1f}s",
    )
    assert ok


# --------------------------------------------------------------------------
# 6. exact-chain identity with noise and phase noise disabled
# --------------------------------------------------------------------------

def test_criterion_6_exact_chain_identity(gate):
    ok = True
    details = []
    for qam in (4, 16):
        for m in (1, 8):
            for osc in ("clo", "slo"):
                cfg = SimConfig(
                    method="dif", osc_mode=osc, m_antennas=(m,), snr_db=(20.0,),
                    var_tx=(0.0,), var_rx=(0.0,), qam_order=qam,
                    symbols_per_trial=10_000, trials=10, master_seed=SEED,
                    noise_off=True,
                )
                recs = run_sweep(cfg, workers=1)
                errors = recs[0].errors_counted
                assert recs[0].symbols_scored == 100_000
                ok &= errors == 0
                details.append(f"{qam}qam/M{m}/{osc}:{errors}")
    gate.report("criterion 6 (noise-off chain identity)", ok,
            "errors " + " ".join(details))
    assert ok


# --------------------------------------------------------------------------
# 7. bit-identical output across worker counts
# --------------------------------------------------------------------------

def test_criterion_7_worker_count_reproducibility(gate):
    cfg = SimConfig(
        method="dif", osc_mode="slo", m_antennas=(2, 4), snr_db=(15.0, 30.0),
        var_tx=(0.01,), var_rx=(0.01,), qam_order=16,
        symbols_per_trial=1_000, trials=3, master_seed=77,
    )
    outputs = []
    for w in (1, 2, 4):
        rows = [record_to_csv_row(r) for r in run_sweep(cfg, workers=w)]
        outputs.append("\n".join(rows))
    ok = outputs[0] == outputs[1] == outputs[2]
    gate.report("criterion 7 (bit-identical CSV across worker counts)", ok,
            f"{len(outputs[0].splitlines())} rows compared across workers 1/2/4")
    assert ok
