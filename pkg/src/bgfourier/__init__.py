"""bgfourier: continuous Fourier and integral transforms of sampled signals
via learned Gaussian-process covariances, plus classical tapered-DFT
baselines and a benchmark harness."""

import os as _os

# BGF_THREADS caps BLAS/OpenMP parallelism; it must be exported before numpy
# first loads its backing libraries, hence before any submodule import
if "BGF_THREADS" in _os.environ:
    _cap = _os.environ["BGF_THREADS"]
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ[_var] = _cap

__version__ = "0.1.0"

from .bench import (
    BANDS,
    ESTIMATORS,
    StudyConfig,
    StudyResult,
    band_deviation,
    ground_truth_spectrum,
    log_band_deviation,
    run_study,
    save_deviations_csv,
    save_ranks_csv,
    save_result_json,
)
from .conventions import (
    ANALOG_FORWARD_SCALE,
    CONVENTION_ANALOG,
    CONVENTION_DFT_SUM,
    DFT_FORWARD_SCALE,
    MIXTURE_TRANSFORM_SCALE,
)
from .errors import (
    BgfError,
    ConditioningError,
    DataValidationError,
    DegenerateInputError,
    DensityDegeneracyError,
    FitDivergenceError,
    NonUniformGridError,
    NumericalError,
)
from .estimators import BgfSpectrumEstimator
from .gpcore import (
    KERNEL_VARIANTS,
    MAX_SOLVE_POINTS,
    BgfKernel,
    BlKernel,
    GPPosterior,
    RblKernel,
    SeKernel,
    covariance_model_from_density,
    fit_gp,
    gram_matrix,
    kernel_eval,
    kernel_lag,
    load_posterior_json,
    posterior_mean,
    save_posterior_json,
)
from .speclearn import (
    FitOptions,
    SpectralModel,
    default_se_scale,
    density_eval,
    fit_map,
    fit_map_from_periodograms,
    likelihood_gradient,
    load_model_json,
    log_likelihood,
    prior_gradient,
    prior_log_density,
    save_model_json,
)
from .spectra import (
    ComplexSpectrum,
    PowerSpectrum,
    dft_frequencies,
    eigenspectra,
    load_complex_csv,
    load_power_csv,
    multitaper_spectrum,
    normalize_energy,
    save_complex_csv,
    save_power_csv,
    tapered_dft,
)
from .tapers import TaperSet, dpss, hann, square
from .timeseries import (
    AnharmonicParams,
    TimeSeries,
    add_white_noise,
    anharmonic_values,
    detrend_poly,
    generate_anharmonic,
    load_csv,
    save_csv,
)
from .transforms import (
    KernelTransform,
    bgf_fourier,
    bl_fourier_comb,
    default_omega_grid,
    fourier_kernel_transform,
    gp_quadrature,
    integral_transform,
    kernel_fourier_value,
    kernel_transform_by_name,
    mixture_amplitude,
    quadrature_kernel_transform,
    rbl_fourier,
    stationary_fourier,
)

__all__ = [
    "__version__",
    # errors
    "BgfError",
    "ConditioningError",
    "DataValidationError",
    "DegenerateInputError",
    "DensityDegeneracyError",
    "FitDivergenceError",
    "NonUniformGridError",
    "NumericalError",
    # conventions
    "ANALOG_FORWARD_SCALE",
    "CONVENTION_ANALOG",
    "CONVENTION_DFT_SUM",
    "DFT_FORWARD_SCALE",
    "MIXTURE_TRANSFORM_SCALE",
    # time series
    "AnharmonicParams",
    "TimeSeries",
    "add_white_noise",
    "anharmonic_values",
    "detrend_poly",
    "generate_anharmonic",
    "load_csv",
    "save_csv",
    # tapers
    "TaperSet",
    "dpss",
    "hann",
    "square",
    # spectra
    "ComplexSpectrum",
    "PowerSpectrum",
    "dft_frequencies",
    "eigenspectra",
    "load_complex_csv",
    "load_power_csv",
    "multitaper_spectrum",
    "normalize_energy",
    "save_complex_csv",
    "save_power_csv",
    "tapered_dft",
    # density learning
    "FitOptions",
    "SpectralModel",
    "default_se_scale",
    "density_eval",
    "fit_map",
    "fit_map_from_periodograms",
    "likelihood_gradient",
    "load_model_json",
    "log_likelihood",
    "prior_gradient",
    "prior_log_density",
    "save_model_json",
    # GP regression
    "KERNEL_VARIANTS",
    "MAX_SOLVE_POINTS",
    "BgfKernel",
    "BlKernel",
    "GPPosterior",
    "RblKernel",
    "SeKernel",
    "covariance_model_from_density",
    "fit_gp",
    "gram_matrix",
    "kernel_eval",
    "kernel_lag",
    "load_posterior_json",
    "posterior_mean",
    "save_posterior_json",
    # transforms
    "KernelTransform",
    "bgf_fourier",
    "bl_fourier_comb",
    "default_omega_grid",
    "fourier_kernel_transform",
    "gp_quadrature",
    "integral_transform",
    "kernel_fourier_value",
    "kernel_transform_by_name",
    "mixture_amplitude",
    "quadrature_kernel_transform",
    "rbl_fourier",
    "stationary_fourier",
    # benchmark harness
    "BANDS",
    "ESTIMATORS",
    "StudyConfig",
    "StudyResult",
    "band_deviation",
    "ground_truth_spectrum",
    "log_band_deviation",
    "run_study",
    "save_deviations_csv",
    "save_ranks_csv",
    "save_result_json",
    # sklearn-style facade
    "BgfSpectrumEstimator",
]
