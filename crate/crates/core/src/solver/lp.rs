//! Linear-utility solver with per-VNF minimum throughput requirements:
//! maximize `sum_j w_j x_j` subject to `x_j >= r_j`, solved as a dense
//! two-phase simplex with Bland's rule (no cycling, deterministic pivots).

use crate::error::{RequirementViolation, SolveError};
use crate::model::{Allocation, CapacityModel, UtilitySpec, FEASIBILITY_EPS};
use crate::report::{Diagnostics, SolveReport, Strategy};

const PIVOT_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;

struct Tableau {
    rows: Vec<Vec<f64>>, // coefficients, last column is the RHS
    basis: Vec<usize>,
    n_cols: usize, // structural columns, RHS excluded
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.n_cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let scale = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= scale;
        }
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..=self.n_cols {
                let delta = factor * self.rows[row][c];
                self.rows[r][c] -= delta;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Maximizes `c . vars` from the current basis. `allowed` masks columns
    /// that may enter. Bland's rule: lowest-index entering column with a
    /// positive reduced cost, ratio ties broken by lowest basis variable.
    fn run(&mut self, c: &[f64], allowed: &[bool]) -> Result<(), SolveError> {
        let iteration_cap = 50_000;
        for _ in 0..iteration_cap {
            let mut entering = None;
            for col in 0..self.n_cols {
                if !allowed[col] {
                    continue;
                }
                let mut reduced = c[col];
                for (r, row) in self.rows.iter().enumerate() {
                    reduced -= c[self.basis[r]] * row[col];
                }
                if reduced > PIVOT_TOL {
                    entering = Some(col);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let coeff = self.rows[r][col];
                if coeff <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r) / coeff;
                let better = match leaving {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < lratio - 1e-12
                            || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                // Unbounded — impossible here: every variable is boxed by
                // its machine row, but fail loudly rather than loop.
                return Err(SolveError::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(SolveError::Unbounded)
    }

    fn value_of(&self, col: usize) -> f64 {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map_or(0.0, |r| self.rhs(r))
    }
}

/// Maximizes linear utility subject to per-VNF minimum throughput. The
/// quick bound `r_j <= sum_i rate(i, j)` is checked first so an impossible
/// requirement is reported with the reachable maximum; interacting
/// requirements that are jointly impossible are caught by phase one.
pub fn solve_requirements_lp(
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let UtilitySpec::Linear { weights, .. } = spec else {
        return Err(SolveError::WrongUtility("linear"));
    };
    spec.check_arity(model)?;
    let (n, m) = (model.n_machines(), model.m_vnfs());
    let requirements: Vec<f64> = spec
        .requirements()
        .map_or_else(|| vec![0.0; m], <[f64]>::to_vec);

    let mut violations = Vec::new();
    for (j, &r) in requirements.iter().enumerate() {
        let bound = model.column_bound(j);
        if r > bound + FEASIBILITY_EPS {
            violations.push(RequirementViolation {
                vnf: model.vnfs()[j].name.clone(),
                required: r,
                reachable: bound,
            });
        }
    }
    if !violations.is_empty() {
        return Err(SolveError::Infeasible(violations));
    }

    // Columns: n*m allocation vars, n machine slacks, one surplus per
    // required VNF, one artificial per required VNF (phase one only).
    let required: Vec<usize> = (0..m).filter(|&j| requirements[j] > 0.0).collect();
    let n_u = n * m;
    let slack0 = n_u;
    let surplus0 = slack0 + n;
    let artificial0 = surplus0 + required.len();
    let n_cols = artificial0 + required.len();

    let mut rows = Vec::with_capacity(n + required.len());
    let mut basis = Vec::with_capacity(n + required.len());
    for i in 0..n {
        let mut row = vec![0.0; n_cols + 1];
        for j in 0..m {
            row[i * m + j] = 1.0;
        }
        row[slack0 + i] = 1.0;
        row[n_cols] = 1.0;
        rows.push(row);
        basis.push(slack0 + i);
    }
    for (k, &j) in required.iter().enumerate() {
        let mut row = vec![0.0; n_cols + 1];
        for i in 0..n {
            row[i * m + j] = model.rate(i, j);
        }
        row[surplus0 + k] = -1.0;
        row[artificial0 + k] = 1.0;
        row[n_cols] = requirements[j];
        rows.push(row);
        basis.push(artificial0 + k);
    }
    let mut tableau = Tableau {
        rows,
        basis,
        n_cols,
        pivots: 0,
    };

    if !required.is_empty() {
        let mut phase1 = vec![0.0; n_cols];
        for k in 0..required.len() {
            phase1[artificial0 + k] = -1.0;
        }
        let allowed = vec![true; n_cols];
        tableau.run(&phase1, &allowed)?;
        let residual: f64 = (0..required.len())
            .map(|k| tableau.value_of(artificial0 + k))
            .sum();
        if residual > PHASE1_TOL {
            let violations: Vec<RequirementViolation> = required
                .iter()
                .enumerate()
                .filter_map(|(k, &j)| {
                    let short = tableau.value_of(artificial0 + k);
                    (short > PHASE1_TOL).then(|| RequirementViolation {
                        vnf: model.vnfs()[j].name.clone(),
                        required: requirements[j],
                        reachable: requirements[j] - short,
                    })
                })
                .collect();
            return Err(SolveError::Infeasible(violations));
        }
    }

    // Phase two: artificials stay in the tableau (possibly in the basis at
    // zero level) but may not re-enter.
    let mut objective = vec![0.0; n_cols];
    for i in 0..n {
        for j in 0..m {
            objective[i * m + j] = weights[j] * model.rate(i, j);
        }
    }
    let mut allowed = vec![true; n_cols];
    for k in 0..required.len() {
        allowed[artificial0 + k] = false;
    }
    tableau.run(&objective, &allowed)?;

    let mut alloc_rows = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            alloc_rows[i][j] = tableau.value_of(i * m + j).max(0.0);
        }
    }
    let allocation = Allocation::new(alloc_rows);

    let binding_machines: Vec<usize> = (0..n)
        .filter(|&i| allocation.row(i).iter().sum::<f64>() >= 1.0 - 1e-9)
        .collect();
    let throughput = crate::model::evaluate_throughput(&allocation, model);
    let binding_requirements: Vec<usize> = required
        .iter()
        .copied()
        .filter(|&j| throughput.get(j) <= requirements[j] + 1e-9)
        .collect();
    let diagnostics = Diagnostics {
        iterations: tableau.pivots,
        converged: true,
        binding_machines: Some(binding_machines),
        binding_requirements: Some(binding_requirements),
        ..Diagnostics::default()
    };
    Ok(SolveReport::from_allocation(
        Strategy::RequirementsLp,
        allocation,
        model,
        spec,
        diagnostics,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids_model() -> CapacityModel {
        CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap()
    }

    #[test]
    fn unconstrained_picks_best_column_per_machine() {
        let spec = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        let report = solve_requirements_lp(&ids_model(), &spec).unwrap();
        assert_eq!(report.utility, 65.0);
        assert_eq!(report.allocation.rows(), &[vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(
            report.diagnostics.binding_requirements.as_deref(),
            Some(&[][..])
        );
    }

    #[test]
    fn requirement_served_by_cheapest_machine() {
        // Meeting x1 >= 19.5 costs least throughput on the machine with
        // comparative advantage in VNF 1.
        let spec =
            UtilitySpec::linear_with_requirements(vec![1.0, 1.0], vec![19.5, 0.0]).unwrap();
        let report = solve_requirements_lp(&ids_model(), &spec).unwrap();
        assert!((report.utility - 52.0).abs() < 1e-9);
        assert!((report.allocation.fraction(0, 0) - 13.0 / 14.0).abs() < 1e-9);
        assert!((report.throughput.get(0) - 19.5).abs() < 1e-9);
        assert_eq!(report.diagnostics.binding_requirements.as_deref(), Some(&[0][..]));
        assert_eq!(
            report.diagnostics.binding_machines.as_deref(),
            Some(&[0, 1][..])
        );
    }

    #[test]
    fn impossible_requirement_reports_reachable_bound() {
        let spec = UtilitySpec::linear_with_requirements(
            vec![1.0, 1.0],
            vec![100.0, 100.0],
        )
        .unwrap();
        let err = solve_requirements_lp(&ids_model(), &spec).unwrap_err();
        let SolveError::Infeasible(violations) = err else {
            panic!("expected infeasibility");
        };
        assert_eq!(violations.len(), 2);
        assert_eq!(violations[0].vnf, "vnf1");
        assert_eq!(violations[0].required, 100.0);
        assert_eq!(violations[0].reachable, 27.0);
        assert_eq!(violations[1].vnf, "vnf2");
        assert_eq!(violations[1].reachable, 65.0);
    }

    #[test]
    fn jointly_impossible_requirements_fail_phase_one() {
        // Each requirement alone fits under its column bound, but one
        // machine cannot serve 0.9 of itself to both VNFs at once.
        let model = CapacityModel::from_rates(&[vec![10.0, 10.0]]).unwrap();
        let spec =
            UtilitySpec::linear_with_requirements(vec![1.0, 1.0], vec![9.0, 9.0]).unwrap();
        let err = solve_requirements_lp(&model, &spec).unwrap_err();
        assert!(matches!(err, SolveError::Infeasible(v) if !v.is_empty()));
    }

    #[test]
    fn zero_weight_objective_still_meets_requirements() {
        let spec =
            UtilitySpec::linear_with_requirements(vec![0.0, 1.0], vec![19.5, 0.0]).unwrap();
        let report = solve_requirements_lp(&ids_model(), &spec).unwrap();
        assert!(report.throughput.get(0) >= 19.5 - 1e-9);
        assert!((report.utility - 32.5).abs() < 1e-9);
    }

    #[test]
    fn tight_requirements_pin_the_whole_allocation() {
        // x1 + x2 = 3*u11 + 3*u22 + 2 <= 8 over the feasible set, so
        // r = (4, 4) admits exactly one point: full specialization.
        let model = CapacityModel::from_rates(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
        let spec =
            UtilitySpec::linear_with_requirements(vec![1.0, 1.0], vec![4.0, 4.0]).unwrap();
        let report = solve_requirements_lp(&model, &spec).unwrap();
        assert!((report.throughput.get(0) - 4.0).abs() < 1e-9);
        assert!((report.throughput.get(1) - 4.0).abs() < 1e-9);
        assert!((report.allocation.fraction(0, 0) - 1.0).abs() < 1e-9);
        assert!((report.allocation.fraction(1, 1) - 1.0).abs() < 1e-9);
        assert_eq!(
            report.diagnostics.binding_requirements.as_deref(),
            Some(&[0, 1][..])
        );
    }

    #[test]
    fn rejects_wrong_utility() {
        let spec = UtilitySpec::cobb_douglas(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            solve_requirements_lp(&ids_model(), &spec).unwrap_err(),
            SolveError::WrongUtility("linear")
        );
    }
}
