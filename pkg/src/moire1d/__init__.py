"""1D anomalous-moire toolkit.

Finite-size interference patterns of two Gaussian-enveloped periodic
constituents: pattern generation, Fourier-peak extraction, plateau and
jump analysis, a Gaussian-wavepacket interferometer simulator, a Wigner
phase-space verifier, and a synthetic data-analysis pipeline.
"""

from .params import ModelParams, SampledSignal, default_grid
from .pattern import generate_pattern, positive_frequency_part, local_phase
from .spectral import (analytic_aft, aft_fixed_dz, solve_km,
                       solve_km_fixed_dz, jump_height, numerical_spectrum)
from .rigidity import (TrajectoryParams, experimental_trajectory,
                       visibility_model, km_surface, plateau_slope,
                       jump_vs_periods)
from .wavepacket import (GaussianWavepacket, evolve_free, evolve_quadratic,
                         apply_rf_pulse)
from .interferometer import (FieldConfig, SequenceConfig, SequenceResult,
                             run_sequence, pair_invariants,
                             conservation_check)
from .wigner import (WignerGrid, wigner_of_superposition,
                     rotate_phase_space, fringe_metrics,
                     verify_rotation_theorem)
from .fitting import (FitError, fit_envelope, fit_fringes,
                      fit_visibility_curve, fit_kappa_curve,
                      make_ccd_image, column_sum)
from .pipeline import AnalysisResult, analyze_run, run_t2_scan

__version__ = "0.1.0"
