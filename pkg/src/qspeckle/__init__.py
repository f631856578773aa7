"""Quantum photon statistics of multiply scattered light.

Random scattering-matrix ensembles, exact per-realization photon-number
moments, closed-form disorder averages, a brute-force Fock-space oracle and a
reproducible Monte Carlo driver.
"""

from ._version import __version__
from .analytics import (
    Figure,
    PredictionPoint,
    Quantity,
    figure_sweep,
    predict_mode_moments,
    predict_total_reflection_variance,
    predict_total_transmission_variance,
    predict_two_point_correlation,
)
from .errors import (
    CalibrationError,
    EmptyResultError,
    EnsembleQualityError,
    InvalidDimensionError,
    InvalidParameterError,
    InvalidRealizationError,
    OracleResourceError,
    OutOfValidityError,
    QSpeckleError,
    TruncationError,
    UndefinedCorrelationError,
)
from .montecarlo import (
    EnsembleResult,
    Estimate,
    LeadingOrderEnsembleWarning,
    convergence_report,
    default_probe_pairs,
    measure_c2,
    run_ensemble,
    run_ensembles,
)
from .oracle import OracleConfig, OracleMoments, oracle_coherent, oracle_fock, oracle_thermal
from .scattering import (
    EnsembleKind,
    EnsembleSpec,
    ScatteringMatrix,
    assemble_polar,
    calibrate_slices,
    cascade,
    compose_slices,
    draw_realization,
    haar_unitary,
    sample_transmission_eigenvalues,
    star_product,
    unitarity_defect,
)
from .states import InputState, StateKind, fano
