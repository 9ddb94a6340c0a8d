//! Numerical solvers for shapes with no closed form: projected-gradient
//! ascent for Cobb-Douglas utility on linear models of any size, a
//! requirements LP for linear utility, a brute-force grid oracle, and the
//! strategy comparison harness.

pub mod lp;
pub mod oracle;

pub use lp::solve_requirements_lp;
pub use oracle::{brute_force_oracle, OracleConfig};

use crate::ca;
use crate::error::{RequirementViolation, SolveError};
use crate::model::{
    evaluate_throughput, shadow_prices, Allocation, CapacityModel, UtilitySpec,
};
use crate::report::{Diagnostics, SolveReport, Strategy};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Multiplier applied to the step on each backtrack.
    pub backtrack: f64,
    /// Sufficient-increase fraction for the line search.
    pub armijo: f64,
    /// Line search gives up below this step.
    pub min_step: f64,
    /// Converged when the unit-step projected gradient is this small.
    pub pg_norm_tol: f64,
    /// A stalled line search still counts as converged below this.
    pub pg_stall_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 100_000,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            min_step: 1e-14,
            pg_norm_tol: 1e-8,
            pg_stall_tol: 1e-6,
        }
    }
}

/// Euclidean projection onto `{ v >= 0, sum(v) <= 1 }`, in place.
/// When the positive part already fits the budget only the clamp applies;
/// otherwise this is projection onto the probability simplex.
pub fn project_row_simplex(row: &mut [f64]) {
    let positive_sum: f64 = row.iter().map(|v| v.max(0.0)).sum();
    if positive_sum <= 1.0 {
        for v in row.iter_mut() {
            *v = v.max(0.0);
        }
        return;
    }
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    for v in row.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}

/// Cobb-Douglas optimum on a linear model of any shape, by projected
/// gradient ascent with Armijo backtracking from the uniform allocation.
pub fn solve_general(
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    solve_general_with(model, spec, &SolverConfig::default(), &mut |_, _| {})
}

/// [`solve_general`] with explicit configuration and a per-accepted-step
/// observer called as `(iteration, utility)`.
pub fn solve_general_with(
    model: &CapacityModel,
    spec: &UtilitySpec,
    config: &SolverConfig,
    observe: &mut dyn FnMut(usize, f64),
) -> Result<SolveReport, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let UtilitySpec::CobbDouglas { alpha } = spec else {
        return Err(SolveError::WrongUtility("cobb-douglas"));
    };
    spec.check_arity(model)?;
    let (n, m) = (model.n_machines(), model.m_vnfs());
    for j in 0..m {
        if model.column_bound(j) == 0.0 {
            return Err(SolveError::ZeroColumn { vnf: j });
        }
    }

    let throughput = |u: &[f64], x: &mut [f64]| {
        x.fill(0.0);
        for i in 0..n {
            for j in 0..m {
                x[j] += model.rate(i, j) * u[i * m + j];
            }
        }
    };
    let utility_of = |x: &[f64]| -> f64 {
        let mut total = 0.0;
        for (a, &xj) in alpha.iter().zip(x) {
            if xj <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += a * xj.ln();
        }
        total
    };

    let mut u = vec![1.0 / m as f64; n * m];
    let mut x = vec![0.0; m];
    throughput(&u, &mut x);
    let mut f = utility_of(&x);

    let mut gradient = vec![0.0; n * m];
    let mut candidate = vec![0.0; n * m];
    let mut pg_norm = f64::INFINITY;
    let mut accepted = 0usize;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        for i in 0..n {
            for j in 0..m {
                gradient[i * m + j] = alpha[j] * model.rate(i, j) / x[j];
            }
        }
        // Unit-step projected gradient: zero exactly at first-order optima.
        for i in 0..n {
            let row = &mut candidate[i * m..(i + 1) * m];
            for j in 0..m {
                row[j] = u[i * m + j] + gradient[i * m + j];
            }
            project_row_simplex(row);
        }
        pg_norm = candidate
            .iter()
            .zip(&u)
            .map(|(c, v)| (c - v) * (c - v))
            .sum::<f64>()
            .sqrt();
        if pg_norm <= config.pg_norm_tol {
            converged = true;
            break;
        }

        let mut step = config.initial_step;
        let mut accepted_step = false;
        while step >= config.min_step {
            for i in 0..n {
                let row = &mut candidate[i * m..(i + 1) * m];
                for j in 0..m {
                    row[j] = u[i * m + j] + step * gradient[i * m + j];
                }
                project_row_simplex(row);
            }
            let along: f64 = gradient
                .iter()
                .zip(candidate.iter().zip(&u))
                .map(|(g, (c, v))| g * (c - v))
                .sum();
            if along <= 0.0 {
                // Not proof of stationarity: near the optimum the true
                // inner product sits below the rounding noise of the
                // projected candidate, and a shorter step can measure
                // cleanly. Keep backtracking instead of giving up.
                step *= config.backtrack;
                continue;
            }
            // Utility change computed from the step difference, not by
            // re-evaluating f: near the optimum the true gain sits below
            // one ulp of f, where direct subtraction rounds to zero or to
            // noise and would freeze the line search short of the
            // convergence tolerance. ln(1 + dx/x) resolves such gains.
            let mut delta_f = 0.0;
            for j in 0..m {
                let mut dx = 0.0;
                for i in 0..n {
                    dx += model.rate(i, j) * (candidate[i * m + j] - u[i * m + j]);
                }
                let ratio = dx / x[j];
                if ratio <= -1.0 {
                    delta_f = f64::NEG_INFINITY;
                    break;
                }
                delta_f += alpha[j] * ratio.ln_1p();
            }
            if delta_f >= config.armijo * along {
                u.copy_from_slice(&candidate);
                throughput(&u, &mut x);
                f += delta_f;
                accepted += 1;
                accepted_step = true;
                observe(accepted, f);
                break;
            }
            step *= config.backtrack;
        }
        if !accepted_step {
            // Line search exhausted: floating-point stationary.
            converged = pg_norm <= config.pg_stall_tol;
            break;
        }
    }

    let rows: Vec<Vec<f64>> = (0..n).map(|i| u[i * m..(i + 1) * m].to_vec()).collect();
    let allocation = Allocation::new(rows);
    let x_final = evaluate_throughput(&allocation, model);
    let prices = shadow_prices(&x_final, spec).ok();
    let diagnostics = Diagnostics {
        iterations: accepted,
        converged,
        foc_residual: Some(pg_norm),
        shadow_prices: prices,
        ..Diagnostics::default()
    };
    Ok(SolveReport::from_allocation(
        Strategy::General,
        allocation,
        model,
        spec,
        diagnostics,
    ))
}

/// One row of a strategy comparison: the strategy and either its report or
/// why it does not apply to this model/utility combination.
#[derive(Debug)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub outcome: Result<SolveReport, SolveError>,
}

fn fixed_allocation_report(
    strategy: Strategy,
    allocation: Allocation,
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    let x = evaluate_throughput(&allocation, model);
    if let Some(requirements) = spec.requirements() {
        let violations: Vec<RequirementViolation> = requirements
            .iter()
            .enumerate()
            .filter(|&(j, &r)| x.get(j) < r - crate::model::FEASIBILITY_EPS)
            .map(|(j, &r)| RequirementViolation {
                vnf: model.vnfs()[j].name.clone(),
                required: r,
                reachable: x.get(j),
            })
            .collect();
        if !violations.is_empty() {
            return Err(SolveError::Infeasible(violations));
        }
    }
    let prices = shadow_prices(&x, spec).ok();
    let diagnostics = Diagnostics {
        converged: true,
        shadow_prices: prices,
        ..Diagnostics::default()
    };
    Ok(SolveReport::from_allocation(
        strategy,
        allocation,
        model,
        spec,
        diagnostics,
    ))
}

/// The comparative-advantage strategy for this model and utility: the
/// shape-appropriate closed form under Cobb-Douglas, full specialization
/// under linear utility.
pub fn solve_ca(model: &CapacityModel, spec: &UtilitySpec) -> Result<SolveReport, SolveError> {
    match spec {
        UtilitySpec::CobbDouglas { .. } => {
            if model.m_vnfs() == 2 {
                ca::solve_n_by_2(model, spec)
            } else if model.n_machines() == 2 {
                ca::solve_2_by_m(model, spec)
            } else {
                Err(SolveError::UnsupportedShape {
                    n: model.n_machines(),
                    m: model.m_vnfs(),
                    expected: "n x 2 or 2 x m",
                })
            }
        }
        UtilitySpec::Linear { .. } => ca::ca_specialization(model)
            .and_then(|u| fixed_allocation_report(Strategy::Ca, u, model, spec)),
    }
}

/// Evaluates a caller-chosen fixed allocation as a report, checking any
/// throughput floors the utility carries.
pub fn evaluate_fixed(
    strategy: Strategy,
    allocation: Allocation,
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    fixed_allocation_report(strategy, allocation, model, spec)
}

/// Runs the comparative-advantage strategy, the even-split and
/// absolute-advantage baselines, and — when its grid fits the budget —
/// the oracle, all on the same model and utility. Rows come back sorted
/// by utility descending; strategies that do not apply (wrong shape,
/// nonlinear model, unmet floors) become error rows at the end rather
/// than aborting the others.
pub fn compare_strategies(
    model: &CapacityModel,
    spec: &UtilitySpec,
    oracle: Option<&OracleConfig>,
) -> Vec<StrategyOutcome> {
    let mut rows = vec![
        StrategyOutcome {
            strategy: Strategy::Ca,
            outcome: solve_ca(model, spec),
        },
        StrategyOutcome {
            strategy: Strategy::EvenSplit,
            outcome: fixed_allocation_report(
                Strategy::EvenSplit,
                ca::baseline_even_split(model),
                model,
                spec,
            ),
        },
        StrategyOutcome {
            strategy: Strategy::AbsoluteAdvantage,
            outcome: ca::baseline_absolute_advantage(model).and_then(|u| {
                fixed_allocation_report(Strategy::AbsoluteAdvantage, u, model, spec)
            }),
        },
    ];

    if let Some(config) = oracle {
        match brute_force_oracle(model, spec, config) {
            // An over-budget grid silently drops the oracle row; it is a
            // scale limit, not a property of the instance.
            Err(SolveError::GridTooLarge { .. }) => {}
            outcome => rows.push(StrategyOutcome {
                strategy: Strategy::Oracle,
                outcome,
            }),
        }
    }

    rows.sort_by(|a, b| match (&a.outcome, &b.outcome) {
        (Ok(ra), Ok(rb)) => rb
            .utility
            .partial_cmp(&ra.utility)
            .unwrap_or(std::cmp::Ordering::Equal),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => std::cmp::Ordering::Equal,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cd(alpha: Vec<f64>) -> UtilitySpec {
        UtilitySpec::cobb_douglas(alpha).unwrap()
    }

    #[test]
    fn single_cell_saturates() {
        let model = CapacityModel::from_rates(&[vec![7.0]]).unwrap();
        let report = solve_general(&model, &cd(vec![1.0])).unwrap();
        assert!(report.diagnostics.converged);
        assert_eq!(report.allocation.rows(), &[vec![1.0]]);
        assert!((report.utility - 1.9459101490553132).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_threshold_solver() {
        let model =
            CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap();
        let spec = cd(vec![0.5, 0.5]);
        let report = solve_general(&model, &spec).unwrap();
        assert!(report.diagnostics.converged);
        assert!((report.utility - 3.2258272774526962).abs() < 1e-9);
        assert!((report.allocation.fraction(0, 0) - 13.0 / 14.0).abs() < 1e-4);
        assert!(report.allocation.fraction(1, 0) < 1e-6);
    }

    #[test]
    fn two_by_three_frozen_optimum() {
        let model =
            CapacityModel::from_rates(&[vec![9.0, 5.0, 1.0], vec![1.0, 5.0, 9.0]]).unwrap();
        let report = solve_general(&model, &cd(vec![1.0 / 3.0; 3])).unwrap();
        assert!(report.diagnostics.converged);
        assert!((report.utility - 1.5958305809273485).abs() < 1e-9);
        assert!((report.throughput.get(0) - 6.0).abs() < 1e-4);
        assert!((report.throughput.get(1) - 10.0 / 3.0).abs() < 1e-4);
        assert!((report.throughput.get(2) - 6.0).abs() < 1e-4);
    }

    #[test]
    fn ascent_is_monotone() {
        let model = CapacityModel::from_rates(&[
            vec![9.0, 5.0, 1.0],
            vec![1.0, 5.0, 9.0],
            vec![4.0, 4.0, 4.0],
        ])
        .unwrap();
        let spec = cd(vec![0.2, 0.3, 0.5]);
        let mut trace = Vec::new();
        let report = solve_general_with(
            &model,
            &spec,
            &SolverConfig::default(),
            &mut |it, f| trace.push((it, f)),
        )
        .unwrap();
        assert!(report.diagnostics.converged);
        assert!(!trace.is_empty());
        for pair in trace.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }
        assert_eq!(trace.last().unwrap().0, report.diagnostics.iterations);
    }

    #[test]
    fn rejects_wrong_inputs() {
        let model = CapacityModel::from_rates(&[vec![1.0, 2.0]]).unwrap();
        let linear = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            solve_general(&model, &linear).unwrap_err(),
            SolveError::WrongUtility("cobb-douglas")
        );
        let zero_col = CapacityModel::from_rates(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            solve_general(&zero_col, &cd(vec![0.5, 0.5])).unwrap_err(),
            SolveError::ZeroColumn { vnf: 1 }
        );
        assert!(matches!(
            solve_general(&model, &cd(vec![1.0])).unwrap_err(),
            SolveError::Model(_)
        ));
    }

    // First-order optimality on random instances: with shadow prices
    // p_j = alpha_j / x_j, every machine concentrates on its highest
    // priced rate, and machines carrying mass on a VNF must be within
    // tolerance of that maximum.
    #[test]
    fn random_instances_satisfy_first_order_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=5);
            let rates: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.5..20.0)).collect())
                .collect();
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..2.0)).collect();
            let total: f64 = raw.iter().sum();
            let alpha: Vec<f64> = raw.iter().map(|a| a / total).collect();
            let model = CapacityModel::from_rates(&rates).unwrap();
            let spec = cd(alpha.clone());
            let report = solve_general(&model, &spec).unwrap();
            assert!(report.diagnostics.converged, "trial {trial} did not converge");
            let prices = report.diagnostics.shadow_prices.as_ref().unwrap();
            for i in 0..n {
                let best = (0..m)
                    .map(|j| prices.values()[j] * rates[i][j])
                    .fold(f64::NEG_INFINITY, f64::max);
                for j in 0..m {
                    let priced = prices.values()[j] * rates[i][j];
                    assert!(priced <= best + 1e-6 * best.abs().max(1.0));
                    if report.allocation.fraction(i, j) > 1e-6 {
                        assert!(
                            priced >= best - 1e-6 * best.abs().max(1.0),
                            "trial {trial}: machine {i} holds mass on a dominated VNF {j}"
                        );
                    }
                }
                let row_sum: f64 = report.allocation.row(i).iter().sum();
                assert!((row_sum - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn comparison_ranks_strategies_by_utility() {
        let model =
            CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap();
        let spec = cd(vec![0.5, 0.5]);
        let rows = compare_strategies(&model, &spec, None);
        let labels: Vec<&str> = rows.iter().map(|r| r.strategy.label()).collect();
        assert_eq!(labels, vec!["ca", "even", "absolute"]);
        assert!(rows.iter().all(|r| r.outcome.is_ok()));
        let utility = |idx: usize| rows[idx].outcome.as_ref().unwrap().utility;
        assert!(utility(0) > utility(1));
        // The absolute baseline starves VNF 1 entirely.
        assert_eq!(utility(2), f64::NEG_INFINITY);
    }

    #[test]
    fn comparison_under_linear_utility_matches_totals() {
        let model =
            CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap();
        let spec = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        let rows = compare_strategies(&model, &spec, None);
        let labels: Vec<&str> = rows.iter().map(|r| r.strategy.label()).collect();
        assert_eq!(labels, vec!["absolute", "ca", "even"]);
        let utility = |idx: usize| rows[idx].outcome.as_ref().unwrap().utility;
        assert_eq!(utility(0), 65.0);
        assert_eq!(utility(1), 51.0);
        assert_eq!(utility(2), 46.0);
    }

    #[test]
    fn symmetric_instances_tie_under_linear_utility() {
        let model = CapacityModel::from_rates(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let spec = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        let rows = compare_strategies(&model, &spec, None);
        for row in &rows {
            assert!((row.outcome.as_ref().unwrap().utility - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn comparison_reports_errors_per_row() {
        let samples = vec![(0.0, 0.0), (0.5, 2.0), (1.0, 10.0)];
        let curve = crate::model::CapacityCurve::from_samples(samples).unwrap();
        let model = CapacityModel::from_curves(
            vec!["m1".into()],
            vec!["v1".into(), "v2".into()],
            vec![vec![curve.clone(), curve]],
        )
        .unwrap();
        let rows = compare_strategies(&model, &cd(vec![0.5, 0.5]), None);
        // Even split evaluates on any curve model; the linear-only
        // strategies come back as error rows after it.
        assert_eq!(rows[0].strategy.label(), "even");
        assert!(rows[0].outcome.is_ok());
        assert!(matches!(rows[1].outcome, Err(SolveError::NonLinearModel)));
        assert!(matches!(rows[2].outcome, Err(SolveError::NonLinearModel)));
    }

    #[test]
    fn oracle_row_is_dropped_when_over_budget() {
        let model =
            CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap();
        let spec = cd(vec![0.5, 0.5]);
        let within = OracleConfig {
            step: 0.5,
            max_points: 1_000,
        };
        let rows = compare_strategies(&model, &spec, Some(&within));
        assert!(rows.iter().any(|r| r.strategy.label() == "oracle"));
        let over = OracleConfig {
            step: 0.01,
            max_points: 1_000,
        };
        let rows = compare_strategies(&model, &spec, Some(&over));
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.strategy.label() != "oracle"));
    }

    #[test]
    fn unmet_requirements_show_as_infeasible_rows() {
        let model =
            CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap();
        let spec =
            UtilitySpec::linear_with_requirements(vec![1.0, 1.0], vec![26.0, 0.0]).unwrap();
        let rows = compare_strategies(&model, &spec, None);
        // x1 = 26 needs both machines on VNF 1 part-time; every fixed
        // strategy misses it (CA specialization reaches only x1 = 21).
        for row in &rows {
            assert!(matches!(row.outcome, Err(SolveError::Infeasible(_))));
        }
        // The LP itself can still meet it: 26 < 27, the column bound.
        let lp = solve_requirements_lp(&model, &spec).unwrap();
        assert!(lp.throughput.get(0) >= 26.0 - 1e-9);
    }

    proptest! {
        #[test]
        fn projection_lands_in_feasible_set(
            v in proptest::collection::vec(-3.0f64..3.0, 1..6)
        ) {
            let mut row = v.clone();
            project_row_simplex(&mut row);
            let sum: f64 = row.iter().sum();
            prop_assert!(sum <= 1.0 + 1e-9);
            for &r in &row {
                prop_assert!(r >= 0.0);
            }
        }

        // Projection is idempotent and dominates every other grid point in
        // distance: spot-check optimality against random feasible points.
        #[test]
        fn projection_is_closest_point(
            v in proptest::collection::vec(-2.0f64..2.0, 2..5),
            probe in proptest::collection::vec(0.0f64..1.0, 2..5),
        ) {
            prop_assume!(v.len() == probe.len());
            let mut projected = v.clone();
            project_row_simplex(&mut projected);
            let total: f64 = probe.iter().sum();
            let feasible: Vec<f64> = if total > 1.0 {
                probe.iter().map(|p| p / total).collect()
            } else {
                probe.clone()
            };
            let dist = |a: &[f64], b: &[f64]| -> f64 {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
            };
            prop_assert!(
                dist(&projected, &v) <= dist(&feasible, &v) + 1e-9
            );
            let mut twice = projected.clone();
            project_row_simplex(&mut twice);
            for (a, b) in twice.iter().zip(&projected) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
