"""Random-exchange money markets: agent gas and kinetic operators on wealth densities."""
from .agents import AgentEnsemble, SimParams, histogram, read_snapshot_csv, run, step, trade, write_snapshot_csv
from .analysis import (
    HTheoremReport,
    IterationTrace,
    MiddleClassReport,
    ScanResult,
    equilibrium_family,
    gas_vs_operator,
    h_theorem_check,
    iterate,
    middle_class_stats,
    monotonicity_scan,
)
from .distribution import (
    Exponential,
    Gamma1,
    Grid,
    GridPdf,
    ParetoLike,
    Rectangular,
    TruncatedExponential,
    entropy,
    l1_distance,
    make_pdf,
    mean,
    norm,
    parse_family,
    rate_for_mean,
    read_pdf_csv,
    self_convolution,
    truncated_exp_mean,
    write_pdf_csv,
)
from .errors import (
    DomainError,
    EnsembleError,
    GridMismatchError,
    InfeasiblePointError,
    ParameterError,
    UnsupportedOrderError,
)
from .operators import (
    KernelCoefficients,
    KernelPositivityWarning,
    OperatorParams,
    apply_operator,
    apply_T,
    apply_T_cap,
    apply_T_kernel,
    apply_T_lambda,
    solve_kernel_coeffs,
    tk_exponential_closed_form,
)
from .specfun import ei

__version__ = "0.1.0"
