"""Simulation and verification toolkit for inertial synchronization of
unit-norm complex states, with certificate checks, linear stability tools,
and a phase-oscillator reduction."""

from .backend import BACKEND
from .certificates import (
    Condition,
    FrameworkReport,
    GronwallBound,
    InequalityReport,
    check_framework_A,
    check_framework_B,
    check_framework_C,
    framework_envelope,
    gronwall_envelope,
    practical_bound,
    practical_bound_simplified,
    verify_inequality_F26,
)
from .checks import CheckResult, run_checks
from .config import CHECK_NAMES, ScenarioConfig, build_scenario, load_config
from .diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    DiagnosticsSeries,
    aggregation_G,
    aggregation_Gdot,
    bounds_and_rates,
    build_series,
    correlations,
    diameter,
    energy,
    energy_forms,
    order_parameter,
)
from .errors import (
    ConfigError,
    DriftError,
    IntegrationError,
    NonFiniteError,
    SphereSyncError,
    ValidationError,
)
from .integrator import (
    MODELS,
    IntegratorConfig,
    Trajectory,
    default_dt,
    simulate,
    step_rk4,
)
from .linalg import SkewExpFamily, expm_skew, inner, is_skew_hermitian
from .model import (
    EnsembleState,
    KuramotoState,
    ModelParams,
    admissibility_defect,
    gauge_initial_state,
    kuramoto_embed,
    kuramoto_equivalent_params,
    kuramoto_omegas,
    kuramoto_phases,
    project_admissible,
    rhs_first_order,
    rhs_gauge,
    rhs_kuramoto,
    rhs_second_order,
    velocity_v,
)
from .stability import (
    EquilibriumSpec,
    GrowthReport,
    bipolar_growth_rate,
    block_structure_residuals,
    equilibrium_residual,
    jacobian_blocks,
    jacobian_fd,
    make_equilibrium,
    measure_bipolar_growth,
    rhs_stability,
    trace_Ms_analytic,
    trace_Ms_numeric,
)

__version__ = "0.1.0"
