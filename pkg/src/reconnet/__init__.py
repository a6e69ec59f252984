"""Maximum-entropy reconstruction of directed financial networks.

Fits fitness-driven exponential random graph ensembles from aggregate
exposures (density alone, or density plus global link reciprocity),
samples them, and measures how well the ensembles reproduce structural
and spectral properties of observed networks.
"""

from .ensemble import (
    EnsembleConfig,
    EnsembleSummary,
    derive_subseed,
    expected_metrics,
    generate_ensemble,
    sample_network,
    z_score,
)
from .estimation import (
    SolverConfig,
    SolverReport,
    fit_degree_model,
    fit_fdcm,
    fit_fgrm,
    solve_bounded_least_squares,
)
from .graph import (
    DirectedNetwork,
    StructuralMetrics,
    degrees_strengths,
    density,
    dyad_census,
    reciprocity,
)
from .ingest import (
    AggregationWindow,
    FitnessData,
    TransactionRecord,
    aggregate,
    build_windows,
    fitness_from_strengths,
    parse_transactions,
    synth_fitness,
    synth_transactions,
    trading_calendar,
)
from .models import (
    DyadProbabilities,
    FittedModel,
    ModelKind,
    dcm_prob,
    dyad_probability_arrays,
    dyad_probs,
    fdcm_dyad_probs,
    fdcm_prob,
    fgrm_dyad_probs,
    grm_dyad_probs,
    rcm_dyad_probs,
)
from .spectral import (
    BulkShape,
    Spectrum,
    TauMatrix,
    bulk_shape,
    eigenvalues,
    fgrm_tau,
    leading_eigenvalue,
    rescale_matrix,
    tau_matrix,
)
from .validation import (
    RhoScanResult,
    RocResult,
    cross_entropy,
    extract_rho_landmarks,
    mann_whitney_auc,
    rho,
    roc_auc,
    scan_aggregations,
)

__version__ = "0.1.0"
