//! Exhaustive grid search over per-machine allocations. Slow by design:
//! it exists to certify the fast solvers on small instances, including
//! models with non-linear capacity curves where no closed form applies.

use crate::error::SolveError;
use crate::model::{Allocation, CapacityModel, UtilitySpec, FEASIBILITY_EPS};
use crate::report::{Diagnostics, SolveReport, Strategy};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Grid resolution; must divide 1 exactly (within 1e-12) and lie in
    /// (0, 0.5].
    pub step: f64,
    /// Refuse grids with more evaluation points than this.
    pub max_points: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            step: 0.05,
            max_points: 10_000_000,
        }
    }
}

/// All vectors of `parts` non-negative integers summing to `total`, in
/// lexicographically ascending order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(current.clone());
            return;
        }
        for c in 0..=remaining {
            current[pos] = c;
            rec(pos + 1, remaining - c, current, out);
        }
    }
    let mut out = Vec::new();
    rec(0, total, &mut vec![0; parts], &mut out);
    out
}

fn composition_count(total: u128, parts: u128) -> Option<u128> {
    // C(total + parts - 1, parts - 1), built multiplicatively.
    let mut result: u128 = 1;
    for i in 1..parts {
        result = result.checked_mul(total + i)?;
        result /= i;
    }
    Some(result)
}

enum Objective<'a> {
    CobbDouglas(&'a [f64]),
    Linear(&'a [f64]),
}

struct Search<'a> {
    tables: &'a [Vec<Vec<f64>>],
    m: usize,
    objective: Objective<'a>,
    requirements: Option<&'a [f64]>,
    partial: Vec<f64>,
    path: Vec<usize>,
    best_utility: f64,
    best_path: Option<Vec<usize>>,
}

impl Search<'_> {
    fn leaf_utility(&self, xs: &[f64], contribution: &[f64]) -> Option<f64> {
        if let Some(requirements) = self.requirements {
            for j in 0..self.m {
                if xs[j] + contribution[j] < requirements[j] - FEASIBILITY_EPS {
                    return None;
                }
            }
        }
        Some(match self.objective {
            Objective::CobbDouglas(alpha) => {
                let mut total = 0.0;
                for j in 0..self.m {
                    let x = xs[j] + contribution[j];
                    if x <= 0.0 {
                        return Some(f64::NEG_INFINITY);
                    }
                    total += alpha[j] * x.ln();
                }
                total
            }
            Objective::Linear(weights) => {
                let mut total = 0.0;
                for j in 0..self.m {
                    total += weights[j] * (xs[j] + contribution[j]);
                }
                total
            }
        })
    }

    fn descend(&mut self, depth: usize) {
        let tables = self.tables;
        let m = self.m;
        let base = depth * m;
        if depth + 1 == tables.len() {
            for (ci, contribution) in tables[depth].iter().enumerate() {
                let xs = &self.partial[base..base + m];
                let Some(value) = self.leaf_utility(xs, contribution) else {
                    continue;
                };
                // Strictly-greater keeps the first maximum found, which is
                // the lexicographically smallest since enumeration ascends.
                if self.best_path.is_none() || value > self.best_utility {
                    self.path[depth] = ci;
                    self.best_utility = value;
                    self.best_path = Some(self.path.clone());
                }
            }
            return;
        }
        for ci in 0..tables[depth].len() {
            for j in 0..m {
                self.partial[base + m + j] = self.partial[base + j] + tables[depth][ci][j];
            }
            self.path[depth] = ci;
            self.descend(depth + 1);
        }
    }
}

/// Evaluates every grid allocation (each machine row sums to exactly 1,
/// entries are multiples of `step`) and returns the best, breaking utility
/// ties toward the lexicographically smallest allocation in row-major
/// order. With linear utility, throughput floors filter the candidates.
pub fn brute_force_oracle(
    model: &CapacityModel,
    spec: &UtilitySpec,
    config: &OracleConfig,
) -> Result<SolveReport, SolveError> {
    spec.check_arity(model)?;
    let step = config.step;
    if !step.is_finite() || step <= 0.0 || step > 0.5 {
        return Err(SolveError::BadGridStep { step });
    }
    let k = (1.0 / step).round();
    if (k * step - 1.0).abs() > 1e-12 {
        return Err(SolveError::BadGridStep { step });
    }
    let k = k as usize;
    let (n, m) = (model.n_machines(), model.m_vnfs());

    let per_machine =
        composition_count(k as u128, m as u128).unwrap_or(u128::MAX);
    let total = per_machine
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if total > u128::from(config.max_points) {
        return Err(SolveError::GridTooLarge {
            points: total,
            max_points: config.max_points,
        });
    }

    let comps = compositions(k, m);
    let fraction = |count: usize| if count == k { 1.0 } else { count as f64 * step };
    let tables: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            comps
                .iter()
                .map(|comp| {
                    (0..m)
                        .map(|j| model.curve(i, j).value_at(fraction(comp[j])))
                        .collect()
                })
                .collect()
        })
        .collect();

    let objective = match spec {
        UtilitySpec::CobbDouglas { alpha } => Objective::CobbDouglas(alpha),
        UtilitySpec::Linear { weights, .. } => Objective::Linear(weights),
    };
    let mut search = Search {
        tables: &tables,
        m,
        objective,
        requirements: spec.requirements(),
        partial: vec![0.0; (n + 1) * m],
        path: vec![0; n],
        best_utility: f64::NEG_INFINITY,
        best_path: None,
    };
    search.descend(0);

    let Some(best_path) = search.best_path else {
        return Err(SolveError::Infeasible(Vec::new()));
    };
    let rows: Vec<Vec<f64>> = best_path
        .iter()
        .map(|&ci| comps[ci].iter().map(|&c| fraction(c)).collect())
        .collect();
    let allocation = Allocation::new(rows);
    let diagnostics = Diagnostics {
        converged: true,
        grid_points: Some(total as u64),
        ..Diagnostics::default()
    };
    Ok(SolveReport::from_allocation(
        Strategy::Oracle,
        allocation,
        model,
        spec,
        diagnostics,
    ))
}
