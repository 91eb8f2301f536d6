"""Monte Carlo experiment engine: seeded parallel trials, SEP estimation
with Wilson intervals, sweeps over parameter grids, and the numerical
self-test battery.

Reproducibility: each trial derives its RNG stream from
SeedSequence(master_seed, spawn_key=(grid_index, trial_index)), so results
are bit-identical regardless of worker count or scheduling. Aggregation
walks trials in index order.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import sep as sep_analysis
from .channel import draw_fading, symbol_energy_for_snr, transmit
from .constellation import build_qam
from .detector import DetectorContext, clo_combine, detect_block
from .diff_codec import encode_block
from .ekf import PilotSchedule, run_ekf_block
from .phase_noise import OscMode, PhaseNoiseConfig, process_covariance, sample_trajectory
from .specfun import log_bessel_i, log_ncx2_pdf, q_function

METHODS = ("dif", "ekf")
_Z95 = 1.959963984540054  # two-sided 95% normal quantile


class UsageError(ValueError):
    """Inconsistent or unsupported experiment configuration."""


def _as_tuple(v) -> tuple:
    if isinstance(v, (list, tuple, np.ndarray)):
        return tuple(v)
    return (v,)


@dataclass(frozen=True)
class SimConfig:
    """One experiment description; grid axes may hold several values."""

    method: str
    osc_mode: OscMode
    m_antennas: tuple = (10,)
    snr_db: tuple = (40.0,)
    var_tx: tuple = (0.01,)
    var_rx: tuple = (0.01,)
    qam_order: int = 16
    symbols_per_trial: int = 10_000
    trials: int = 100
    pilot_period: Optional[int] = None
    master_seed: int = 0
    hold_receive_snr: bool = True
    noise_off: bool = False
    fixed_channel: bool = False
    past_amplitude_mode: str = "energy"

    def __post_init__(self):
        object.__setattr__(self, "m_antennas", _as_tuple(self.m_antennas))
        object.__setattr__(self, "snr_db", _as_tuple(self.snr_db))
        object.__setattr__(self, "var_tx", _as_tuple(self.var_tx))
        object.__setattr__(self, "var_rx", _as_tuple(self.var_rx))
        object.__setattr__(self, "osc_mode", OscMode(self.osc_mode))
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        if self.method == "ekf" and not self.pilot_period:
            raise UsageError("EKF requires a pilot_period")
        if self.method == "dif" and self.pilot_period:
            raise UsageError("pilot_period only applies to the EKF method")
        if self.symbols_per_trial < 1000:
            raise UsageError("symbols_per_trial must be >= 1000")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")
        for name in ("m_antennas", "snr_db", "var_tx", "var_rx"):
            if not getattr(self, name):
                raise UsageError(f"grid {name} must be nonempty")


@dataclass(frozen=True)
class PointSpec:
    """A single fully resolved grid point."""

    method: str
    osc_mode: OscMode
    m_antennas: int
    snr_db: float
    var_tx: float
    var_rx: float
    qam_order: int
    symbols_per_trial: int
    trials: int
    pilot_period: Optional[int]
    master_seed: int
    hold_receive_snr: bool
    noise_off: bool
    fixed_channel: bool
    past_amplitude_mode: str
    grid_index: int


@dataclass(frozen=True)
class ResultRecord:
    config: PointSpec
    sep: float
    ci_low: float
    ci_high: float
    errors_counted: int
    symbols_scored: int
    analytical_sep: Optional[float]
    floor: Optional[float]
    wall_time: float


def expand_points(config: SimConfig) -> list:
    """Deterministic grid order: var_tx, then var_rx, then antennas, then SNR."""
    points = []
    idx = 0
    for vt in config.var_tx:
        for vr in config.var_rx:
            for m in config.m_antennas:
                for snr in config.snr_db:
                    points.append(
                        PointSpec(
                            method=config.method,
                            osc_mode=config.osc_mode,
                            m_antennas=int(m),
                            snr_db=float(snr),
                            var_tx=float(vt),
                            var_rx=float(vr),
                            qam_order=config.qam_order,
                            symbols_per_trial=config.symbols_per_trial,
                            trials=config.trials,
                            pilot_period=config.pilot_period,
                            master_seed=config.master_seed,
                            hold_receive_snr=config.hold_receive_snr,
                            noise_off=config.noise_off,
                            fixed_channel=config.fixed_channel,
                            past_amplitude_mode=config.past_amplitude_mode,
                            grid_index=idx,
                        )
                    )
                    idx += 1
    return points


def estimate_sep(errors: int, scored: int):
    """Point estimate and 95% Wilson score interval."""
    if scored < 1:
        raise UsageError("scored symbol count must be >= 1")
    if not 0 <= errors <= scored:
        raise UsageError("errors must lie in [0, scored]")
    p = errors / scored
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / scored
    center = (p + z2 / (2 * scored)) / denom
    half = _Z95 / denom * math.sqrt(p * (1 - p) / scored + z2 / (4 * scored * scored))
    return p, max(center - half, 0.0), min(center + half, 1.0)


def run_trial(point: PointSpec, trial_index: int):
    """One seeded trial; returns (errors, scored, analytical_bound | None)."""
    ss = np.random.SeedSequence(point.master_seed, spawn_key=(point.grid_index, trial_index))
    rng = np.random.default_rng(ss)
    m = point.m_antennas
    e_t = symbol_energy_for_snr(point.snr_db, m, point.hold_receive_snr)
    const = build_qam(point.qam_order, e_t)
    pn = PhaseNoiseConfig(point.var_tx, point.var_rx, point.osc_mode)
    chan = draw_fading(m, rng, fixed_ones=point.fixed_channel)
    n = point.symbols_per_trial
    sym = rng.integers(0, const.order, n)

    if point.method == "dif":
        enc = encode_block(const.amplitudes[sym], const.phases[sym], e_t)
        traj = sample_trajectory(pn, m, n + 1, rng)
        block = transmit(enc.x, traj, chan, rng, point.noise_off)
        det_chan = chan
        if pn.osc_mode is OscMode.CLO:
            block, det_chan = clo_combine(block, chan)
        res = detect_block(block, DetectorContext(const, det_chan, pn.osc_mode))
        errors = int(np.sum(res.point_index != sym))
        scored = n
        analytic = sep_analysis.union_bound_for_constellation(
            const, pn, m, chan, point.past_amplitude_mode
        )
        return errors, scored, analytic

    # EKF baseline: symbols go out unencoded, pilots replace data periodically
    sched = PilotSchedule(point.pilot_period)
    pmask = sched.pilot_mask(n)
    pilot_value = complex(const.points[int(np.argmin(np.abs(const.points - math.sqrt(e_t))))])
    x = const.points[sym].astype(complex)
    x[pmask] = pilot_value
    traj = sample_trajectory(pn, m, n, rng)
    block = transmit(x, traj, chan, rng, point.noise_off)
    if pn.osc_mode is OscMode.CLO:
        block, det_chan = clo_combine(block, chan)
        theta0 = traj.theta[0, 0]
        sigma = np.array([[point.var_tx + point.var_rx]])
    else:
        det_chan = chan
        theta0 = traj.theta[:, 0]
        sigma = process_covariance(pn, m)
    res = run_ekf_block(block, det_chan, sched, const, pilot_value, theta0, sigma)
    data = ~pmask
    errors = int(np.sum(res.point_index[data] != sym[data]))
    scored = int(data.sum())
    return errors, scored, None


def _trial_star(args):
    return run_trial(*args)


def _aggregate(point: PointSpec, outcomes, wall_time: float) -> ResultRecord:
    errors = sum(o[0] for o in outcomes)
    scored = sum(o[1] for o in outcomes)
    sep_hat, lo, hi = estimate_sep(errors, scored)
    analytic = None
    floor = None
    if point.method == "dif":
        analytic = float(
            np.mean([sep_analysis.clamp_probability(o[2]) for o in outcomes])
        )
        pn = PhaseNoiseConfig(point.var_tx, point.var_rx, point.osc_mode)
        floor = sep_analysis.clamp_probability(
            sep_analysis.error_floor(build_qam(point.qam_order, 1.0), pn)
        )
    return ResultRecord(
        config=point,
        sep=sep_hat,
        ci_low=lo,
        ci_high=hi,
        errors_counted=errors,
        symbols_scored=scored,
        analytical_sep=analytic,
        floor=floor,
        wall_time=wall_time,
    )


def run_sweep(config: SimConfig, workers: Optional[int] = None) -> list:
    """Execute the full grid; records come back in deterministic grid order.

    workers=None uses all cores; workers<=1 runs serially. Per-point
    wall_time is apportioned from the overall elapsed time when running
    in parallel.
    """
    points = expand_points(config)
    tasks = [(p, t) for p in points for t in range(p.trials)]
    start = time.perf_counter()
    if workers is not None and workers <= 1:
        outcomes = [run_trial(p, t) for p, t in tasks]
    else:
        nw = workers or (os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=nw) as ex:
            chunk = max(1, len(tasks) // (4 * nw))
            outcomes = list(ex.map(_trial_star, tasks, chunksize=chunk))
    elapsed = time.perf_counter() - start

    records = []
    pos = 0
    for p in points:
        chunk = outcomes[pos : pos + p.trials]
        pos += p.trials
        records.append(_aggregate(p, chunk, elapsed / len(points)))
    return records


def run_point(config: SimConfig, workers: Optional[int] = None) -> ResultRecord:
    """Single-point convenience wrapper; all grid axes must be singletons."""
    if len(expand_points(config)) != 1:
        raise UsageError("run_point requires singleton grids; use run_sweep")
    return run_sweep(config, workers=workers)[0]


def analyze_points(config: SimConfig, fading_draws: int = 100) -> list:
    """Closed-form only: union bound averaged over seeded fading draws,
    plus the error floor. No Monte Carlo detection is run."""
    records = []
    const_shape = build_qam(config.qam_order, 1.0)
    for p in expand_points(config):
        start = time.perf_counter()
        pn = PhaseNoiseConfig(p.var_tx, p.var_rx, p.osc_mode)
        vals = []
        for t in range(fading_draws):
            ss = np.random.SeedSequence(p.master_seed, spawn_key=(p.grid_index, t))
            rng = np.random.default_rng(ss)
            chan = draw_fading(p.m_antennas, rng, fixed_ones=p.fixed_channel)
            vals.append(
                sep_analysis.union_bound_sep(
                    const_shape, pn, p.m_antennas, p.snr_db, chan,
                    p.hold_receive_snr, p.past_amplitude_mode,
                )
            )
        records.append(
            ResultRecord(
                config=p,
                sep=float("nan"),
                ci_low=float("nan"),
                ci_high=float("nan"),
                errors_counted=0,
                symbols_scored=0,
                analytical_sep=sep_analysis.clamp_probability(float(np.mean(vals))),
                floor=sep_analysis.clamp_probability(
                    sep_analysis.error_floor(const_shape, pn)
                ),
                wall_time=time.perf_counter() - start,
            )
        )
    return records


# ---------------------------------------------------------------------------
# numerical self-tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelfTestResult:
    name: str
    passed: bool
    detail: str


def _sample_energy_stat(rng, m, scale, n_samples):
    """Draw t = |scale + w_1|^2 + sum_{m>=2} |w_m|^2 with w ~ CN(0,2)."""
    w = rng.standard_normal((n_samples, m)) + 1j * rng.standard_normal((n_samples, m))
    w[:, 0] += scale
    return np.sum(np.abs(w) ** 2, axis=1)


def _gof_pvalue(samples, log_pdf, n_bins=50):
    """Chi-squared goodness of fit of samples against a log-density.

    The density is integrated numerically per bin (it need not be
    normalized in closed form); bin edges come from sample quantiles.
    """
    edges = np.quantile(samples, np.linspace(0.0, 1.0, n_bins + 1))
    edges[0] = 0.0
    hi = float(np.max(samples)) * 1.5
    grid = np.linspace(0.0, hi, 400_000)
    pdf = np.exp(np.clip(log_pdf(grid), -745.0, 50.0))
    cdf = np.concatenate(([0.0], np.cumsum((pdf[1:] + pdf[:-1]) * 0.5 * np.diff(grid))))
    total = cdf[-1]
    cdf_at = np.interp(edges, grid, cdf)
    probs = np.diff(cdf_at)
    probs[-1] += total - cdf_at[-1]  # fold the tail into the last bin
    probs /= total
    counts, _ = np.histogram(samples, bins=edges)
    counts[-1] += len(samples) - counts.sum()
    expected = probs * len(samples)
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return float(stats.chi2.sf(stat, n_bins - 1))


def selftest(n_samples: int = 1_000_000, seed: int = 12345) -> list:
    """Run the oracle calibrations; returns one result per check."""
    results = []
    rng = np.random.default_rng(seed)

    # (a) energy statistic vs the calibrated noncentral chi-squared density,
    #     plus rejection of the uncalibrated (no 1/2 exponent) variant
    for m in (1, 4, 16):
        r, g = 1.3, 0.9 * math.sqrt(m)
        lam = (r * g) ** 2
        t = _sample_energy_stat(rng, m, r * g, n_samples)
        p = _gof_pvalue(t, lambda x: log_ncx2_pdf(x, m, lam))
        results.append(
            SelfTestResult(
                f"ncx2-gof-M{m}", p > 0.01, f"chi2 p={p:.4f} (need > 0.01)"
            )
        )
        if m == 4:
            def literal(x):
                # alternative normalization with the full (t + lam) exponent
                return log_ncx2_pdf(x, m, lam) - (np.asarray(x) + lam) / 2.0
            p_lit = _gof_pvalue(t, literal)
            results.append(
                SelfTestResult(
                    "ncx2-convention",
                    p_lit < 0.01,
                    f"literal-form chi2 p={p_lit:.2e} (rejected when < 0.01)",
                )
            )

    # (b) Wiener increment covariance vs process_covariance
    pn = PhaseNoiseConfig(0.01, 0.02, OscMode.SLO)
    m, n = 3, 200_000
    traj = sample_trajectory(pn, m, n, rng)
    inc = np.diff(traj.theta, axis=1)
    emp = np.cov(inc)
    target = process_covariance(pn, m)
    se = np.sqrt(
        (np.outer(np.diag(target), np.diag(target)) + target**2) / (n - 1)
    )
    ok = bool(np.all(np.abs(emp - target) <= 5.0 * se))
    results.append(
        SelfTestResult(
            "wiener-increment-cov",
            ok,
            f"max |emp-target|/se = {float(np.max(np.abs(emp - target) / se)):.2f} (need <= 5)",
        )
    )

    # (c) Q-function vs an arbitrary-precision erfc oracle
    import mpmath

    xs = np.linspace(-8.0, 8.0, 161)
    worst = 0.0
    for x in xs:
        ref = float(0.5 * mpmath.erfc(mpmath.mpf(float(x)) / mpmath.sqrt(2)))
        err = abs(q_function(float(x)) - ref) / ref
        worst = max(worst, err)
    results.append(
        SelfTestResult("q-function", worst <= 1e-12, f"max rel err {worst:.2e} (need <= 1e-12)")
    )

    # (d) log Bessel vs an extended-precision series oracle
    mpmath.mp.dps = 50
    worst = 0.0
    for nu in (0, 1, 2, 5, 9, 16, 32, 64):
        for x in (1e-3, 0.5, 1.0, 5.0, 25.0, 50.0, 200.0, 1000.0):
            ref = float(mpmath.log(mpmath.besseli(nu, mpmath.mpf(x))))
            err = abs(log_bessel_i(nu, x) - ref) / max(abs(ref), 1.0)
            worst = max(worst, err)
    results.append(
        SelfTestResult("log-bessel-i", worst <= 1e-8, f"max rel err {worst:.2e} (need <= 1e-8)")
    )
    return results


# ---------------------------------------------------------------------------
# output sinks
# ---------------------------------------------------------------------------

CSV_HEADER = (
    "method,osc,antennas,snr_db,var_tx,var_rx,qam,symbols_scored,errors,"
    "sep,ci_low,ci_high,analytical_sep,floor,seed"
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def record_to_csv_row(rec: ResultRecord) -> str:
    c = rec.config
    fields = [
        c.method,
        c.osc_mode.value,
        c.m_antennas,
        c.snr_db,
        c.var_tx,
        c.var_rx,
        c.qam_order,
        rec.symbols_scored,
        rec.errors_counted,
        rec.sep,
        rec.ci_low,
        rec.ci_high,
        rec.analytical_sep,
        rec.floor,
        c.master_seed,
    ]
    return ",".join(_fmt(f) for f in fields)


def write_csv(records: Sequence[ResultRecord], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for rec in records:
        fh.write(record_to_csv_row(rec) + "\n")


def record_to_dict(rec: ResultRecord) -> dict:
    c = rec.config

    def opt(v):
        return None if (v is None or (isinstance(v, float) and math.isnan(v))) else v

    return {
        "method": c.method,
        "osc": c.osc_mode.value,
        "antennas": c.m_antennas,
        "snr_db": c.snr_db,
        "var_tx": c.var_tx,
        "var_rx": c.var_rx,
        "qam": c.qam_order,
        "symbols_scored": rec.symbols_scored,
        "errors": rec.errors_counted,
        "sep": opt(rec.sep),
        "ci_low": opt(rec.ci_low),
        "ci_high": opt(rec.ci_high),
        "analytical_sep": opt(rec.analytical_sep),
        "floor": opt(rec.floor),
        "seed": c.master_seed,
        "config": {
            "method": c.method,
            "osc_mode": c.osc_mode.value,
            "m_antennas": c.m_antennas,
            "snr_db": c.snr_db,
            "var_tx": c.var_tx,
            "var_rx": c.var_rx,
            "qam_order": c.qam_order,
            "symbols_per_trial": c.symbols_per_trial,
            "trials": c.trials,
            "pilot_period": c.pilot_period,
            "master_seed": c.master_seed,
            "hold_receive_snr": c.hold_receive_snr,
            "grid_index": c.grid_index,
        },
        "wall_time": rec.wall_time,
    }
