//! Allocation of heterogeneous machines to virtual network functions,
//! driven by comparative advantage.
//!
//! Each machine i splits its capacity into fractions `u[i][j] >= 0` with
//! `sum_j u[i][j] <= 1`; VNF j then delivers `x_j = sum_i curve(i,j)(u[i][j])`
//! aggregate throughput. The crate finds allocations maximizing either
//! Cobb-Douglas utility `sum_j alpha_j ln(x_j)` or weighted throughput
//! `sum_j w_j x_j`, optionally with per-VNF floors.
//!
//! The interesting structure: optimal allocations specialize machines by
//! comparative (not absolute) advantage — the machine with the lower
//! opportunity cost serves a VNF even when another machine is outright
//! faster at it. For two-column or two-row linear models this yields a
//! threshold form solved in closed form ([`ca::solve_n_by_2`],
//! [`ca::solve_2_by_m`]); general shapes use projected-gradient ascent
//! ([`solver::solve_general`]), linear utility with floors uses a simplex
//! ([`solver::solve_requirements_lp`]), and a grid oracle certifies results
//! ([`solver::brute_force_oracle`]).

pub mod ca;
pub mod error;
pub mod kb;
pub mod model;
pub mod report;
pub mod solver;

pub use ca::{
    baseline_absolute_advantage, baseline_even_split, ca_specialization,
    check_ca_structure, comparative_advantage, solve_2_by_m, solve_2x2, solve_n_by_2,
    sort_by_ca, CaAxis, CaComparison, CaOrdering, StructureCheck, STRUCTURE_EPS,
};
pub use error::{RequirementViolation, SolveError};
pub use kb::{
    build_model, build_model_subset, document_from_model, load_document, query_capacity,
    read_document, to_json, validate_document, KbDocument, KbError,
};
pub use model::{
    evaluate_throughput, evaluate_utility, shadow_prices, validate_allocation,
    Allocation, AllocationViolation, CapacityCurve, CapacityModel, CurveError,
    ModelError, ShadowPrices, ThroughputVector, UtilitySpec, FEASIBILITY_EPS,
};
pub use report::{Diagnostics, SolveReport, Strategy};
pub use solver::{
    brute_force_oracle, compare_strategies, evaluate_fixed, solve_ca, solve_general,
    solve_general_with, solve_requirements_lp, OracleConfig, SolverConfig,
    StrategyOutcome,
};
