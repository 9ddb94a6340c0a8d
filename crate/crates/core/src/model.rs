//! Capacity model: machines, VNFs, per-pair capacity curves, allocations
//! over per-machine simplices, and throughput/utility evaluation.

use thiserror::Error;

/// Slack tolerated on the per-machine row-sum constraint.
pub const FEASIBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CurveError {
    #[error("curve needs at least two samples")]
    TooFewSamples,
    #[error("first sample must be (0, 0)")]
    MissingOrigin,
    #[error("last sample must be at fraction 1")]
    MissingFullFraction,
    #[error("sample {index}: fractions must strictly increase")]
    FractionOrder { index: usize },
    #[error("sample {index}: rates must not decrease")]
    RateDecreasing { index: usize },
    #[error("sample {index}: values must be finite and non-negative")]
    BadValue { index: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("model needs at least one machine and one vnf")]
    Empty,
    #[error("machine {machine}: row length differs from the vnf count")]
    Ragged { machine: usize },
    #[error("machine {machine}, vnf {vnf}: {source}")]
    Curve {
        machine: usize,
        vnf: usize,
        source: CurveError,
    },
    #[error("duplicate {kind} name {name:?}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("{kind} name must be non-empty")]
    EmptyName { kind: &'static str },
    #[error(
        "allocation is {got_machines}x{got_vnfs} but the model is {machines}x{vnfs}"
    )]
    DimensionMismatch {
        machines: usize,
        vnfs: usize,
        got_machines: usize,
        got_vnfs: usize,
    },
    #[error("cobb-douglas weight {index} must be finite and positive")]
    BadAlpha { index: usize },
    #[error("cobb-douglas weights sum to {sum}, expected 1")]
    AlphaSum { sum: f64 },
    #[error("linear weight {index} must be finite and non-negative")]
    BadWeight { index: usize },
    #[error("requirement {index} must be finite and non-negative")]
    BadRequirement { index: usize },
    #[error("weight count {got} does not match the vnf count {expected}")]
    WeightCount { expected: usize, got: usize },
    #[error("shadow prices need a cobb-douglas utility")]
    RequiresCobbDouglas,
    #[error("shadow prices undefined: vnf {vnf} has non-positive throughput")]
    NonPositiveThroughput { vnf: usize },
}

/// Machine identity within one model instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineId {
    pub name: String,
    pub index: usize,
}

/// VNF identity within one model instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnfId {
    pub name: String,
    pub index: usize,
}

/// Piecewise-linear map from utilization fraction to processing rate.
///
/// Samples run from (0, 0) to (1, full rate); fractions strictly increase and
/// rates never decrease. Evaluation clamps the fraction to [0, 1]; there is
/// no extrapolation. A curve with exactly two samples is linear: its rate is
/// `fraction * full_rate` with no rounding beyond the one multiply.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    samples: Vec<(f64, f64)>,
}

impl CapacityCurve {
    pub fn linear(rate: f64) -> Result<Self, CurveError> {
        Self::from_samples(vec![(0.0, 0.0), (1.0, rate)])
    }

    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if samples.len() < 2 {
            return Err(CurveError::TooFewSamples);
        }
        for (index, &(f, r)) in samples.iter().enumerate() {
            if !f.is_finite() || !r.is_finite() || f < 0.0 || r < 0.0 {
                return Err(CurveError::BadValue { index });
            }
        }
        if samples[0] != (0.0, 0.0) {
            return Err(CurveError::MissingOrigin);
        }
        if samples[samples.len() - 1].0 != 1.0 {
            return Err(CurveError::MissingFullFraction);
        }
        for index in 1..samples.len() {
            if samples[index].0 <= samples[index - 1].0 {
                return Err(CurveError::FractionOrder { index });
            }
            if samples[index].1 < samples[index - 1].1 {
                return Err(CurveError::RateDecreasing { index });
            }
        }
        Ok(Self { samples })
    }

    /// Rate processed when `fraction` of the machine is assigned here.
    pub fn value_at(&self, fraction: f64) -> f64 {
        let f = fraction.clamp(0.0, 1.0);
        // Index of the first sample with fraction >= f; samples[0].0 == 0.
        let hi = self.samples.partition_point(|&(x, _)| x < f);
        if hi == 0 {
            return self.samples[0].1;
        }
        let (x1, y1) = self.samples[hi];
        if x1 == f {
            return y1;
        }
        let (x0, y0) = self.samples[hi - 1];
        y0 + (y1 - y0) * ((f - x0) / (x1 - x0))
    }

    /// Rate at full utilization (the last sample).
    pub fn full_rate(&self) -> f64 {
        self.samples[self.samples.len() - 1].1
    }

    /// True for the two-sample form (0,0) -> (1, rate).
    pub fn is_linear(&self) -> bool {
        self.samples.len() == 2
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

/// Capacity curves for every (machine, vnf) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityModel {
    machines: Vec<MachineId>,
    vnfs: Vec<VnfId>,
    curves: Vec<Vec<CapacityCurve>>,
}

impl CapacityModel {
    /// Linear model from full-utilization rates; names are generated.
    pub fn from_rates(rates: &[Vec<f64>]) -> Result<Self, ModelError> {
        if rates.is_empty() || rates[0].is_empty() {
            return Err(ModelError::Empty);
        }
        let m = rates[0].len();
        let mut curves = Vec::with_capacity(rates.len());
        for (i, row) in rates.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Ragged { machine: i });
            }
            let mut out = Vec::with_capacity(m);
            for (j, &rate) in row.iter().enumerate() {
                out.push(CapacityCurve::linear(rate).map_err(|source| {
                    ModelError::Curve {
                        machine: i,
                        vnf: j,
                        source,
                    }
                })?);
            }
            curves.push(out);
        }
        let machines = (0..rates.len()).map(|i| format!("m{}", i + 1)).collect();
        let vnfs = (0..m).map(|j| format!("vnf{}", j + 1)).collect();
        Self::from_curves(machines, vnfs, curves)
    }

    pub fn from_curves(
        machines: Vec<String>,
        vnfs: Vec<String>,
        curves: Vec<Vec<CapacityCurve>>,
    ) -> Result<Self, ModelError> {
        if machines.is_empty() || vnfs.is_empty() {
            return Err(ModelError::Empty);
        }
        check_names(&machines, "machine")?;
        check_names(&vnfs, "vnf")?;
        if curves.len() != machines.len() {
            return Err(ModelError::Ragged {
                machine: curves.len().min(machines.len()),
            });
        }
        for (i, row) in curves.iter().enumerate() {
            if row.len() != vnfs.len() {
                return Err(ModelError::Ragged { machine: i });
            }
        }
        Ok(Self {
            machines: machines
                .into_iter()
                .enumerate()
                .map(|(index, name)| MachineId { name, index })
                .collect(),
            vnfs: vnfs
                .into_iter()
                .enumerate()
                .map(|(index, name)| VnfId { name, index })
                .collect(),
            curves,
        })
    }

    pub fn n_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn m_vnfs(&self) -> usize {
        self.vnfs.len()
    }

    pub fn machines(&self) -> &[MachineId] {
        &self.machines
    }

    pub fn vnfs(&self) -> &[VnfId] {
        &self.vnfs
    }

    pub fn curve(&self, machine: usize, vnf: usize) -> &CapacityCurve {
        &self.curves[machine][vnf]
    }

    /// Full-utilization rate of one (machine, vnf) pair.
    pub fn rate(&self, machine: usize, vnf: usize) -> f64 {
        self.curves[machine][vnf].full_rate()
    }

    /// True when every curve is linear, so throughput is `sum b_ij * u_ij`.
    pub fn linear_only(&self) -> bool {
        self.curves
            .iter()
            .all(|row| row.iter().all(CapacityCurve::is_linear))
    }

    /// Upper bound on one vnf's throughput: every machine fully assigned.
    pub fn column_bound(&self, vnf: usize) -> f64 {
        (0..self.n_machines()).map(|i| self.rate(i, vnf)).sum()
    }
}

fn check_names(names: &[String], kind: &'static str) -> Result<(), ModelError> {
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(ModelError::EmptyName { kind });
        }
        if names[..i].contains(name) {
            return Err(ModelError::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

/// Fractions of each machine assigned to each VNF; rows index machines.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    rows: Vec<Vec<f64>>,
}

impl Allocation {
    /// Rows must be rectangular and non-empty; feasibility is checked
    /// separately by [`validate_allocation`].
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty(), "empty allocation");
        let m = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == m), "ragged allocation");
        Self { rows }
    }

    pub fn zeros(n_machines: usize, m_vnfs: usize) -> Self {
        Self::new(vec![vec![0.0; m_vnfs]; n_machines])
    }

    /// Even split: every machine spread uniformly over all VNFs.
    pub fn uniform(n_machines: usize, m_vnfs: usize) -> Self {
        Self::new(vec![vec![1.0 / m_vnfs as f64; m_vnfs]; n_machines])
    }

    pub fn n_machines(&self) -> usize {
        self.rows.len()
    }

    pub fn m_vnfs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn fraction(&self, machine: usize, vnf: usize) -> f64 {
        self.rows[machine][vnf]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, machine: usize) -> &[f64] {
        &self.rows[machine]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AllocationViolation {
    /// Entry is negative beyond the feasibility slack.
    Negative { machine: usize, vnf: usize, value: f64 },
    /// Entry is NaN or infinite.
    NotFinite { machine: usize, vnf: usize },
    /// Row assigns more than the whole machine.
    RowSumExceeded { machine: usize, sum: f64 },
}

impl std::fmt::Display for AllocationViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Negative { machine, vnf, value } => {
                write!(f, "u[{machine}][{vnf}] = {value} is negative")
            }
            Self::NotFinite { machine, vnf } => {
                write!(f, "u[{machine}][{vnf}] is not finite")
            }
            Self::RowSumExceeded { machine, sum } => {
                write!(f, "machine {machine} row sums to {sum} > 1")
            }
        }
    }
}

/// Checks `u >= 0` and per-machine row sums `<= 1` within
/// [`FEASIBILITY_EPS`]. Returns every violation; an empty list means valid.
pub fn validate_allocation(
    u: &Allocation,
    model: &CapacityModel,
) -> Result<Vec<AllocationViolation>, ModelError> {
    if u.n_machines() != model.n_machines() || u.m_vnfs() != model.m_vnfs() {
        return Err(ModelError::DimensionMismatch {
            machines: model.n_machines(),
            vnfs: model.m_vnfs(),
            got_machines: u.n_machines(),
            got_vnfs: u.m_vnfs(),
        });
    }
    let mut violations = Vec::new();
    for (i, row) in u.rows().iter().enumerate() {
        let mut sum = 0.0;
        for (j, &value) in row.iter().enumerate() {
            if !value.is_finite() {
                violations.push(AllocationViolation::NotFinite { machine: i, vnf: j });
            } else if value < -FEASIBILITY_EPS {
                violations.push(AllocationViolation::Negative {
                    machine: i,
                    vnf: j,
                    value,
                });
            }
            sum += value;
        }
        if sum > 1.0 + FEASIBILITY_EPS {
            violations.push(AllocationViolation::RowSumExceeded { machine: i, sum });
        }
    }
    Ok(violations)
}

/// Per-VNF throughput.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputVector(Vec<f64>);

impl ThroughputVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, vnf: usize) -> f64 {
        self.0[vnf]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// x_j = sum_i curve_ij(u_ij). Panics on dimension mismatch; callers
/// validate the allocation first.
pub fn evaluate_throughput(u: &Allocation, model: &CapacityModel) -> ThroughputVector {
    assert_eq!(u.n_machines(), model.n_machines(), "machine count mismatch");
    assert_eq!(u.m_vnfs(), model.m_vnfs(), "vnf count mismatch");
    let mut x = vec![0.0; model.m_vnfs()];
    for i in 0..model.n_machines() {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += model.curve(i, j).value_at(u.fraction(i, j));
        }
    }
    ThroughputVector(x)
}

/// Objective over per-VNF throughput.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilitySpec {
    /// sum_j alpha_j * ln(x_j); alphas are positive and sum to 1. Any zero
    /// throughput drives the value to -inf, so every VNF must get capacity.
    CobbDouglas { alpha: Vec<f64> },
    /// sum_j weights_j * x_j, optionally with per-VNF throughput floors.
    Linear {
        weights: Vec<f64>,
        requirements: Option<Vec<f64>>,
    },
}

impl UtilitySpec {
    pub fn cobb_douglas(alpha: Vec<f64>) -> Result<Self, ModelError> {
        for (index, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 {
                return Err(ModelError::BadAlpha { index });
            }
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > FEASIBILITY_EPS {
            return Err(ModelError::AlphaSum { sum });
        }
        Ok(Self::CobbDouglas { alpha })
    }

    pub fn linear(weights: Vec<f64>) -> Result<Self, ModelError> {
        Self::checked_linear(weights, None)
    }

    pub fn linear_with_requirements(
        weights: Vec<f64>,
        requirements: Vec<f64>,
    ) -> Result<Self, ModelError> {
        Self::checked_linear(weights, Some(requirements))
    }

    fn checked_linear(
        weights: Vec<f64>,
        requirements: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(ModelError::BadWeight { index });
            }
        }
        if let Some(r) = &requirements {
            for (index, &v) in r.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadRequirement { index });
                }
            }
        }
        Ok(Self::Linear {
            weights,
            requirements,
        })
    }

    pub fn vnf_count(&self) -> usize {
        match self {
            Self::CobbDouglas { alpha } => alpha.len(),
            Self::Linear { weights, .. } => weights.len(),
        }
    }

    pub fn is_cobb_douglas(&self) -> bool {
        matches!(self, Self::CobbDouglas { .. })
    }

    pub fn requirements(&self) -> Option<&[f64]> {
        match self {
            Self::Linear {
                requirements: Some(r),
                ..
            } => Some(r),
            _ => None,
        }
    }

    /// Checks the weight vector length against a model's vnf count.
    pub fn check_arity(&self, model: &CapacityModel) -> Result<(), ModelError> {
        let (expected, got) = (model.m_vnfs(), self.vnf_count());
        if expected != got {
            return Err(ModelError::WeightCount { expected, got });
        }
        if let Some(r) = self.requirements() {
            if r.len() != expected {
                return Err(ModelError::WeightCount {
                    expected,
                    got: r.len(),
                });
            }
        }
        Ok(())
    }
}

/// Utility of a throughput vector. Cobb-Douglas returns -inf when any
/// throughput is non-positive. Panics on length mismatch.
pub fn evaluate_utility(x: &ThroughputVector, spec: &UtilitySpec) -> f64 {
    let values = x.values();
    assert_eq!(values.len(), spec.vnf_count(), "vnf count mismatch");
    match spec {
        UtilitySpec::CobbDouglas { alpha } => {
            let mut total = 0.0;
            for (&a, &xj) in alpha.iter().zip(values) {
                if xj <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += a * xj.ln();
            }
            total
        }
        UtilitySpec::Linear { weights, .. } => {
            weights.iter().zip(values).map(|(&w, &xj)| w * xj).sum()
        }
    }
}

/// Marginal utility per unit of VNF throughput, p_j = alpha_j / x_j.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowPrices(Vec<f64>);

impl ShadowPrices {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Defined for Cobb-Douglas with strictly positive throughput.
pub fn shadow_prices(
    x: &ThroughputVector,
    spec: &UtilitySpec,
) -> Result<ShadowPrices, ModelError> {
    let UtilitySpec::CobbDouglas { alpha } = spec else {
        return Err(ModelError::RequiresCobbDouglas);
    };
    assert_eq!(x.values().len(), alpha.len(), "vnf count mismatch");
    let mut prices = Vec::with_capacity(alpha.len());
    for (vnf, (&a, &xj)) in alpha.iter().zip(x.values()).enumerate() {
        if xj <= 0.0 {
            return Err(ModelError::NonPositiveThroughput { vnf });
        }
        prices.push(a / xj);
    }
    Ok(ShadowPrices(prices))
}
