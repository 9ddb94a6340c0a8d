//! Solve reports: the allocation a strategy produced plus the evidence
//! needed to judge it (throughput, utility, convergence diagnostics).

use crate::ca::StructureCheck;
use crate::model::{
    evaluate_throughput, evaluate_utility, Allocation, CapacityModel, ShadowPrices,
    ThroughputVector, UtilitySpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Comparative-advantage allocation (threshold solvers, specialization).
    Ca,
    /// Every machine spread evenly over all VNFs.
    EvenSplit,
    /// Every machine on its highest-rate VNF.
    AbsoluteAdvantage,
    /// Projected gradient ascent on the full problem.
    General,
    /// Requirement-constrained linear program.
    RequirementsLp,
    /// Brute-force grid enumeration.
    Oracle,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Self::Ca => "ca",
            Self::EvenSplit => "even",
            Self::AbsoluteAdvantage => "absolute",
            Self::General => "general",
            Self::RequirementsLp => "lp",
            Self::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Everything a solver wants to report beyond the allocation itself.
/// Fields are optional because not every strategy produces them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Candidates scanned, gradient iterations, simplex pivots, or grid
    /// points evaluated, depending on the strategy.
    pub iterations: usize,
    pub converged: bool,
    /// Stationarity residual: relative first-order-condition gap for the
    /// threshold solvers, projected-gradient norm for the general solver.
    pub foc_residual: Option<f64>,
    /// 1-based threshold position in comparative-advantage order.
    pub threshold: Option<usize>,
    /// Split fraction of the threshold machine.
    pub theta: Option<f64>,
    /// True when the threshold split was clamped to a simplex boundary.
    pub boundary: Option<bool>,
    pub shadow_prices: Option<ShadowPrices>,
    pub structure: Option<StructureCheck>,
    /// Machines whose row-sum constraint is tight at the LP optimum.
    pub binding_machines: Option<Vec<usize>>,
    /// VNFs whose throughput floor is tight at the LP optimum.
    pub binding_requirements: Option<Vec<usize>>,
    /// Grid points the oracle enumerated.
    pub grid_points: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub strategy: Strategy,
    pub allocation: Allocation,
    pub throughput: ThroughputVector,
    pub utility: f64,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    /// Builds a report whose throughput and utility are recomputed from the
    /// allocation, so the three fields cannot drift apart.
    pub fn from_allocation(
        strategy: Strategy,
        allocation: Allocation,
        model: &CapacityModel,
        spec: &UtilitySpec,
        diagnostics: Diagnostics,
    ) -> Self {
        let throughput = evaluate_throughput(&allocation, model);
        let utility = evaluate_utility(&throughput, spec);
        Self {
            strategy,
            allocation,
            throughput,
            utility,
            diagnostics,
        }
    }
}
