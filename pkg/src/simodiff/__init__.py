"""Link-level simulator for 1xM SIMO channels with Wiener phase noise.

Differential transmission with two-stage (amplitude, then phase)
detection, a pilot-aided EKF baseline, closed-form SEP bounds with
large-M error floors, and a reproducible Monte Carlo harness.
"""

from .channel import ChannelRealization, ReceivedBlock, draw_fading, symbol_energy_for_snr, transmit
from .constellation import AmplitudeClass, Constellation, build_qam, class_of, symbol_from_polar
from .detector import DetectorContext, amplitude_map, clo_combine, detect_block, phase_ml, phase_statistic
from .diff_codec import encode, encode_block, first_symbol_policy
from .ekf import EkfState, PilotSchedule, predict, run_ekf_block, update
from .harness import ResultRecord, SimConfig, estimate_sep, run_point, run_sweep, selftest
from .phase_noise import OscMode, PhaseNoiseConfig, PhaseTrajectory, process_covariance, sample_trajectory
from .sep import error_floor, pairwise_phase_error, sigma_psi_sq, union_bound_sep
from .specfun import LOG_ZERO, log_bessel_i, log_ncx2_pdf, q_function

__version__ = "0.1.0"
