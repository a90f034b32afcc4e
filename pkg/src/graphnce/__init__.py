"""Nonlocal continuity equations and conservation laws on finite weighted graphs."""

from .calculus import (
    EdgeField,
    divergence_antisymmetric,
    field_stats,
    nonlocal_divergence,
    nonlocal_gradient,
    tv_distance,
    tv_norm,
    vertex_field,
)
from .diagnostics import DiagnosticsReport, LpConstants, Tolerances, check_positivity, lp_monitor, verify_trajectory
from .errors import (
    ConvergenceError,
    DomainError,
    EvaluationError,
    GraphNCEError,
    NumericalError,
    PreconditionError,
    UndefinedRatioError,
    ValidationError,
)
from .graph_core import EtaSpec, Graph, build_graph, eval_eta, load_graph, save_graph
from .interpolation import (
    AdmissibilityReport,
    InterpolationSpec,
    SamplingBox,
    assemble_flux,
    check_admissibility,
    phi_eval,
)
from .solver import (
    SolverConfig,
    Trajectory,
    apply_solution_map,
    contraction_info,
    explicit_solve,
    measure_contraction,
    picard_solve_window,
    rhs,
    solve_ncl,
    static_velocity,
)
from .velocity import (
    ConstantsReport,
    KernelSpec,
    PotentialSpec,
    TimeModulation,
    VelocitySpec,
    compute_constants,
    convolve_kernel,
    eval_velocity,
)

__version__ = "0.1.0"
