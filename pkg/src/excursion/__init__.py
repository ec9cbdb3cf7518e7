"""Tail asymptotics and Monte Carlo for suprema of Gaussian fields.

The package computes P(sup X > u) ~ K u^rho Psi(u) for fields whose
standard deviation peaks on a submanifold, estimates the universal
window constants entering K, and cross-checks the formulas with exact
path simulation.

Modules: specfun (Gaussian tail, Laplace integrals), model (field data
contract), simulate (exact samplers), constants (window-limit
constants), asymptotics (formula assembly), montecarlo (exceedance
harness), zoo (built-in models), cli (command line).
"""

from .asymptotics import (
    AsymComponent,
    AsymptoticResult,
    asym_general,
    asym_locally_homogeneous,
    asym_stationary_like,
    asym_talagrand,
    asym_transition,
    informative_width,
    maxset_integral,
    trichotomy_1d,
)
from .constants import (
    ConstantEstimate,
    ConstantsPolicy,
    known_constant,
    known_transition_constant,
    pickands_estimate,
    piterbarg_estimate,
    resolve_pickands,
    resolve_transition,
)
from .model import (
    Chart,
    ClassificationError,
    Component,
    CorrelationStructure,
    Domain,
    FieldModel,
    MaxSet,
    ModelError,
    Regime,
    SimulationPlan,
    VarianceProfile,
    build_model,
    classify_regime,
    h1_limit,
    h_eval,
    parse_model_spec,
    serialize_model_spec,
    validate_model,
)
from .montecarlo import (
    McEstimate,
    MeshRuleError,
    compare_table,
    csv_text,
    default_grid,
    mc_exceedance,
    verify_local_lemma,
    write_csv,
)
from .simulate import (
    GridSpec,
    PathBatch,
    bm_increment_paths,
    chol_paths,
    circulant_paths,
    dual_norm_reduction,
    fbm_paths,
    mesh_rule_delta,
    mesh_rule_slack,
)
from .specfun import (
    PowerLawSpec,
    PowerLawTerm,
    gauss_tail,
    laplace_numeric,
    laplace_powerlaw_asym,
    psi,
)
from .zoo import bessel_asym, brownian_sup_exact, list_models

__version__ = "0.1.0"

__all__ = [
    "AsymComponent", "AsymptoticResult", "asym_general",
    "asym_locally_homogeneous", "asym_stationary_like", "asym_talagrand",
    "asym_transition", "informative_width", "maxset_integral", "trichotomy_1d",
    "ConstantEstimate", "ConstantsPolicy", "known_constant",
    "known_transition_constant", "pickands_estimate", "piterbarg_estimate",
    "resolve_pickands", "resolve_transition",
    "Chart", "ClassificationError", "Component", "CorrelationStructure",
    "Domain", "FieldModel", "MaxSet", "ModelError", "Regime",
    "SimulationPlan", "VarianceProfile", "build_model", "classify_regime",
    "h1_limit", "h_eval", "parse_model_spec", "serialize_model_spec",
    "validate_model",
    "McEstimate", "MeshRuleError", "compare_table", "csv_text",
    "default_grid", "mc_exceedance", "verify_local_lemma", "write_csv",
    "GridSpec", "PathBatch", "bm_increment_paths", "chol_paths",
    "circulant_paths", "dual_norm_reduction", "fbm_paths",
    "mesh_rule_delta", "mesh_rule_slack",
    "PowerLawSpec", "PowerLawTerm", "gauss_tail", "laplace_numeric",
    "laplace_powerlaw_asym", "psi",
    "bessel_asym", "brownian_sup_exact", "list_models",
    "__version__",
]
