"""Wave/particle Bell inequalities for optical modes in truncated Fock space."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConsistencyError,
    CutoffError,
    CVBellError,
    DimensionError,
    GridOverflowError,
    InsufficientSamplesError,
    NumericalError,
)
from .fock import (
    FockTensor,
    ModeOp,
    annihilate,
    apply_loss,
    apply_loss_all,
    create,
    expect,
    min_eigenvalue,
    number,
    partial_trace,
    partial_transpose,
    quadrature,
)
from .inequalities import InequalityReport, eval_first, eval_second, evaluate, evaluate_all
from .npt import PTReport, pt_moment_check, pt_report
from .states import (
    StateSpec,
    build,
    build_epr_network,
    ghz_vacuum,
    multimode_epr,
    random_mixed,
    random_pure,
    random_separable,
    single_photon,
    tmss,
    vacuum,
)
from .sampling import GridPdf, SampleBatch, estimate_ingredients, quadrature_pdf, sample_counts, sample_quadrature
from .experiment import ExperimentConfig, LoopholeReport, run_experiment
