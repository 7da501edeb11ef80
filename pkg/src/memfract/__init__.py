"""memfract: memfractance extraction from cyclic-voltammetry sweeps.

Pipeline: parse and average raw sweep runs, fit polynomial models of v(t) and
i(t), take closed-form Riemann-Liouville fractional derivatives of their
antiderivatives, search the (alpha1, alpha2) square for the flattest
singularity-free memfractance, reconstruct the current, classify the device
among the known mem-elements, and analyze current spiking. Reference device
generators close the loop end to end.
"""

__version__ = "0.1.0"

from .bundled import (
    bundled_global_fits,
    bundled_piecewise_fits,
    default_anchors,
    dump_coeff_json,
    load_coeff_json,
)
from .errors import (
    DivergenceError,
    ExcludedPointError,
    FitError,
    InfeasibleSearchError,
    MemfractError,
    ParseError,
    SingularityError,
    ValidationError,
)
from .fractional_calculus import (
    FracOrderPair,
    PowerTerm,
    gamma,
    gamma_ratio,
    gl_derivative_numeric,
    recip_gamma,
    rl_derivative_polysum,
    rl_derivative_power,
)
from .memfractance import (
    DeviceClass,
    MemfractanceCurve,
    SearchConfig,
    SearchResult,
    ZeroLocus,
    build_memfractance_curve,
    classify_device,
    eval_global,
    eval_piecewise,
    find_zeros,
    matched_zero_couples,
    range_objective,
    reconstruct_current,
    search_optimal,
    verify_reconstruction,
    zero_loci,
)
from .polyfit import (
    FitStats,
    PiecewisePolynomial,
    Polynomial,
    estimate_breakpoint,
    fit_piecewise,
    fit_polynomial,
    goodness_of_fit,
    integrate_piecewise,
    integrate_polynomial,
)
from .reference_models import (
    IdealMemristorParams,
    SyntheticDeviceSpec,
    Waveform,
    simulate_ideal_memristor,
    synth_memfractor_sweep,
)
from .spike_analysis import IntervalHistogram, SpikeEvent, detect_spikes, interval_histogram
from .sweep_ingest import (
    SweepConfig,
    SweepRecord,
    SweepSeries,
    average_runs,
    histogram_bin_width,
    parse_sweep_csv,
    serialize_sweep_csv,
)

__all__ = [
    "__version__",
    "MemfractError", "ParseError", "ValidationError", "FitError", "DivergenceError",
    "SingularityError", "ExcludedPointError", "InfeasibleSearchError",
    "SweepRecord", "SweepSeries", "SweepConfig",
    "parse_sweep_csv", "serialize_sweep_csv", "average_runs", "histogram_bin_width",
    "Polynomial", "PiecewisePolynomial", "FitStats",
    "fit_polynomial", "fit_piecewise", "goodness_of_fit", "estimate_breakpoint",
    "integrate_polynomial", "integrate_piecewise",
    "FracOrderPair", "PowerTerm",
    "gamma", "recip_gamma", "gamma_ratio",
    "rl_derivative_power", "rl_derivative_polysum", "gl_derivative_numeric",
    "MemfractanceCurve", "ZeroLocus", "DeviceClass", "SearchConfig", "SearchResult",
    "eval_global", "eval_piecewise", "find_zeros", "zero_loci", "matched_zero_couples",
    "range_objective", "search_optimal", "build_memfractance_curve",
    "reconstruct_current", "verify_reconstruction", "classify_device",
    "SpikeEvent", "IntervalHistogram", "detect_spikes", "interval_histogram",
    "IdealMemristorParams", "Waveform", "SyntheticDeviceSpec",
    "simulate_ideal_memristor", "synth_memfractor_sweep",
    "load_coeff_json", "dump_coeff_json",
    "bundled_global_fits", "bundled_piecewise_fits", "default_anchors",
]
