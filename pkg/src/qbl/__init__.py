"""Random real quadrics: ensembles, spectra, topology and experiments."""

from ._version import __version__
from .seeding import SeedSpec, as_seed
from .ensembles import (SymMatrix, QuadraticForm, sample_goe, sample_goe_pair,
                        sample_goe_batch, sample_weyl_quadric, form_to_matrix,
                        matrix_to_form, haar_rotation, haar_rotation_batch)
from .spectra import (Spectrum, Inertia, eigenvalues, inertia, count_below,
                      min_abs_eig, jacobi_eigenvalues, default_zero_tol)
from .quadrics import (BettiResult, betti_one_quadric, complex_betti_one_quadric,
                       binary_projective_root_count, crofton_volume_estimate,
                       crofton_resampled_mean)
from .pencils import (Pencil, PencilScan, TwoQuadricBetti, scan_index_function,
                      scan_pencil_fast, scan_pencil, spectral_variety_count_oracle,
                      c_plus_d, rank_d2, betti_two_quadrics, mu_sandwich_check,
                      alexander_count_check, omega_component_counts, rotate_basis)
from .rmt import (EmpiricalSpectralDist, GapEstimate,
                  empirical_spectral_distribution, semicircle_cdf, ks_distance,
                  index_imbalance, gap_probability_mc, c_n_exact,
                  c_n_asymptotic_ratio)
from .integral_geometry import (SubsphereSpec, IGCheckResult, normalized_volume,
                                integral_geometry_check, sphere_volume)
from .experiments import (ExperimentConfig, ExperimentReport, RowStats,
                          run_experiment, scaling_fit, report_to_csv,
                          report_to_json, write_report, KINDS, DEFAULT_SEED)
from .errors import NumericFailure, SampleDiscarded, UnsupportedConfiguration

__all__ = [name for name in dir() if not name.startswith("_")]
