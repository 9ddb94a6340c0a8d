//! Comparative advantage: pairwise tests, advantage orderings, closed-form
//! threshold solvers for the n x 2 and 2 x m shapes, the specialization
//! structure check, and the reference baselines.
//!
//! Ratio comparisons are done by cross-multiplication throughout, never by
//! division, so zero rates cannot produce spurious infinities and exact ties
//! stay exact.

use crate::error::SolveError;
use crate::model::{
    evaluate_throughput, shadow_prices, Allocation, CapacityModel, UtilitySpec,
};
use crate::report::{Diagnostics, SolveReport, Strategy};
use crate::solver;
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Allocation mass below this is treated as zero by the structure check.
pub const STRUCTURE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaComparison {
    /// The first machine holds comparative advantage in the first VNF.
    FirstAdvantage,
    /// The second machine holds comparative advantage in the first VNF.
    SecondAdvantage,
    Tie,
}

/// Compares machine `i1` against `i2` over VNFs `j1`, `j2`:
/// `i1` has comparative advantage in `j1` iff
/// `b[i1][j1] * b[i2][j2] > b[i1][j2] * b[i2][j1]`.
pub fn comparative_advantage(
    model: &CapacityModel,
    i1: usize,
    i2: usize,
    j1: usize,
    j2: usize,
) -> Result<CaComparison, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    if model.rate(i2, j1) == 0.0 && model.rate(i2, j2) == 0.0 {
        return Err(SolveError::UndefinedComparison { machine: i2 });
    }
    let left = model.rate(i1, j1) * model.rate(i2, j2);
    let right = model.rate(i1, j2) * model.rate(i2, j1);
    Ok(match left.partial_cmp(&right).expect("finite rates") {
        Ordering::Greater => CaComparison::FirstAdvantage,
        Ordering::Less => CaComparison::SecondAdvantage,
        Ordering::Equal => CaComparison::Tie,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaAxis {
    /// Sort machines by decreasing `b[i][0] / b[i][1]`; needs exactly 2 VNFs.
    Machines,
    /// Sort VNFs by decreasing `b[0][j] / b[1][j]`; needs exactly 2 machines.
    Vnfs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaOrdering {
    pub axis: CaAxis,
    /// Original indices, strongest comparative advantage first. Exact ratio
    /// ties keep the lower original index first.
    pub order: Vec<usize>,
    /// Advantage ratio along the order, as an f64 for reporting.
    pub ratios: Vec<f64>,
    /// Adjacent positions with exactly equal ratios, as original index pairs.
    pub ties: Vec<(usize, usize)>,
}

pub fn sort_by_ca(model: &CapacityModel, axis: CaAxis) -> Result<CaOrdering, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let count = match axis {
        CaAxis::Machines => {
            if model.m_vnfs() != 2 {
                return Err(SolveError::UnsupportedShape {
                    n: model.n_machines(),
                    m: model.m_vnfs(),
                    expected: "n x 2",
                });
            }
            model.n_machines()
        }
        CaAxis::Vnfs => {
            if model.n_machines() != 2 {
                return Err(SolveError::UnsupportedShape {
                    n: model.n_machines(),
                    m: model.m_vnfs(),
                    expected: "2 x m",
                });
            }
            model.m_vnfs()
        }
    };
    let num = |i: usize| match axis {
        CaAxis::Machines => model.rate(i, 0),
        CaAxis::Vnfs => model.rate(0, i),
    };
    let den = |i: usize| match axis {
        CaAxis::Machines => model.rate(i, 1),
        CaAxis::Vnfs => model.rate(1, i),
    };
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by(|&i, &k| {
        let left = num(i) * den(k);
        let right = num(k) * den(i);
        right
            .partial_cmp(&left)
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&k))
    });
    let ratios = order.iter().map(|&i| num(i) / den(i)).collect();
    let mut ties = Vec::new();
    for w in order.windows(2) {
        if num(w[0]) * den(w[1]) == num(w[1]) * den(w[0]) {
            ties.push((w[0], w[1]));
        }
    }
    Ok(CaOrdering {
        axis,
        order,
        ratios,
        ties,
    })
}

/// Result of testing an allocation against the comparative-advantage
/// specialization pattern: once rows (or columns) are in advantage order,
/// no strictly-less-advantaged position may carry mass on the first side
/// while a strictly-more-advantaged one still carries mass on the second.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureCheck {
    pub holds: bool,
    /// Entries (machine, vnf, value) that break the pattern, in original
    /// indices, sorted.
    pub violations: Vec<(usize, usize, f64)>,
    /// 1-based threshold position in advantage order: the split position
    /// when exactly one exists, otherwise the count of fully-specialized
    /// positions on the first side. None when ambiguous.
    pub threshold: Option<usize>,
    /// Exact ratio ties from the ordering.
    pub ties: Vec<(usize, usize)>,
}

/// Checks the specialization zero-pattern for n x 2 (machine axis) or
/// 2 x m (VNF axis) linear models. Pairs with exactly tied ratios are
/// exempt: any split between tied positions is consistent with advantage.
pub fn check_ca_structure(
    u: &Allocation,
    model: &CapacityModel,
) -> Result<StructureCheck, SolveError> {
    if u.n_machines() != model.n_machines() || u.m_vnfs() != model.m_vnfs() {
        return Err(SolveError::Model(crate::model::ModelError::DimensionMismatch {
            machines: model.n_machines(),
            vnfs: model.m_vnfs(),
            got_machines: u.n_machines(),
            got_vnfs: u.m_vnfs(),
        }));
    }
    let axis = if model.m_vnfs() == 2 {
        CaAxis::Machines
    } else if model.n_machines() == 2 {
        CaAxis::Vnfs
    } else {
        return Err(SolveError::UnsupportedShape {
            n: model.n_machines(),
            m: model.m_vnfs(),
            expected: "n x 2 or 2 x m",
        });
    };
    let ordering = sort_by_ca(model, axis)?;
    let k = ordering.order.len();
    // Mass on the advantaged side / the other side, per sorted position,
    // plus the (machine, vnf) coordinates of those two entries.
    let sides = |pos: usize| {
        let orig = ordering.order[pos];
        match axis {
            CaAxis::Machines => (
                (u.fraction(orig, 0), (orig, 0)),
                (u.fraction(orig, 1), (orig, 1)),
            ),
            CaAxis::Vnfs => (
                (u.fraction(0, orig), (0, orig)),
                (u.fraction(1, orig), (1, orig)),
            ),
        }
    };
    let strictly_ordered = |p: usize, q: usize| {
        let (a, b) = (ordering.order[p], ordering.order[q]);
        let (num, den): (Box<dyn Fn(usize) -> f64>, Box<dyn Fn(usize) -> f64>) = match axis {
            CaAxis::Machines => (
                Box::new(|i| model.rate(i, 0)),
                Box::new(|i| model.rate(i, 1)),
            ),
            CaAxis::Vnfs => (
                Box::new(|j| model.rate(0, j)),
                Box::new(|j| model.rate(1, j)),
            ),
        };
        num(a) * den(b) > num(b) * den(a)
    };
    let mut offenders: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in 0..k {
        let (_, (second_p, second_coord)) = {
            let ((f, _), (s, sc)) = sides(p);
            ((f, ()), (s, sc))
        };
        if second_p <= STRUCTURE_EPS {
            continue;
        }
        for q in p + 1..k {
            let ((first_q, first_coord), _) = sides(q);
            if first_q > STRUCTURE_EPS && strictly_ordered(p, q) {
                offenders.insert(second_coord);
                offenders.insert(first_coord);
            }
        }
    }
    let violations: Vec<(usize, usize, f64)> = offenders
        .into_iter()
        .map(|(i, j)| (i, j, u.fraction(i, j)))
        .collect();
    let mut splitters = Vec::new();
    let mut pure_first = 0usize;
    for pos in 0..k {
        let ((first, _), (second, _)) = sides(pos);
        if first > STRUCTURE_EPS && second > STRUCTURE_EPS {
            splitters.push(pos + 1);
        } else if first > STRUCTURE_EPS {
            pure_first += 1;
        }
    }
    let threshold = match splitters.as_slice() {
        [] => Some(pure_first),
        [one] => Some(*one),
        _ => None,
    };
    Ok(StructureCheck {
        holds: violations.is_empty(),
        violations,
        threshold,
        ties: ordering.ties,
    })
}

/// Gate shared by the threshold solvers: Cobb-Douglas spec of matching
/// arity over a linear model with strictly positive rates. A fully dead
/// VNF column is reported as the objective being -inf everywhere.
fn threshold_preflight<'a>(
    model: &CapacityModel,
    spec: &'a UtilitySpec,
) -> Result<&'a [f64], SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let UtilitySpec::CobbDouglas { alpha } = spec else {
        return Err(SolveError::WrongUtility("cobb-douglas"));
    };
    spec.check_arity(model)?;
    for j in 0..model.m_vnfs() {
        if model.column_bound(j) == 0.0 {
            return Err(SolveError::ZeroColumn { vnf: j });
        }
    }
    for i in 0..model.n_machines() {
        for j in 0..model.m_vnfs() {
            if model.rate(i, j) <= 0.0 {
                return Err(SolveError::NonPositiveRate { machine: i, vnf: j });
            }
        }
    }
    Ok(alpha)
}

fn cd_pair(a1: f64, a2: f64, x1: f64, x2: f64) -> f64 {
    if x1 <= 0.0 || x2 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    a1 * x1.ln() + a2 * x2.ln()
}

/// Closed-form Cobb-Douglas optimum for n machines and 2 VNFs.
///
/// Machines are taken in advantage order; everything before the threshold
/// machine runs VNF 1, everything after runs VNF 2, and the threshold
/// machine splits `theta : 1 - theta`. For each candidate threshold the
/// first-order condition is linear in theta; the scan clamps each candidate
/// split to [0, 1] (the per-candidate objective is concave, so clamping is
/// the constrained maximum) and keeps the best utility, breaking exact ties
/// toward the lower threshold index.
pub fn solve_n_by_2(
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    if model.m_vnfs() != 2 {
        return Err(SolveError::UnsupportedShape {
            n: model.n_machines(),
            m: model.m_vnfs(),
            expected: "n x 2",
        });
    }
    let alpha = threshold_preflight(model, spec)?;
    let (a1, a2) = (alpha[0], alpha[1]);
    let ordering = sort_by_ca(model, CaAxis::Machines)?;
    let n = model.n_machines();
    let b1: Vec<f64> = ordering.order.iter().map(|&i| model.rate(i, 0)).collect();
    let b2: Vec<f64> = ordering.order.iter().map(|&i| model.rate(i, 1)).collect();

    struct Candidate {
        position: usize,
        theta: f64,
        clamped: bool,
        utility: f64,
        x1: f64,
        x2: f64,
    }

    let mut best: Option<Candidate> = None;
    let mut ahead = 0.0; // sum of b1 before the threshold
    for p in 0..n {
        let behind: f64 = b2[p + 1..].iter().sum();
        // alpha1 * b1 / x1 = alpha2 * b2 / x2, linear in theta.
        let raw = a1 + a1 * behind / b2[p] - a2 * ahead / b1[p];
        let theta = raw.clamp(0.0, 1.0);
        let x1 = ahead + theta * b1[p];
        let x2 = (1.0 - theta) * b2[p] + behind;
        let utility = cd_pair(a1, a2, x1, x2);
        if best.as_ref().map_or(true, |b| utility > b.utility) {
            best = Some(Candidate {
                position: p + 1,
                theta,
                clamped: raw != theta,
                utility,
                x1,
                x2,
            });
        }
        ahead += b1[p];
    }
    let best = best.expect("at least one candidate");

    let mut rows = vec![vec![0.0, 0.0]; n];
    for (pos, &orig) in ordering.order.iter().enumerate() {
        rows[orig] = match (pos + 1).cmp(&best.position) {
            Ordering::Less => vec![1.0, 0.0],
            Ordering::Greater => vec![0.0, 1.0],
            Ordering::Equal => vec![best.theta, 1.0 - best.theta],
        };
    }
    let allocation = Allocation::new(rows);

    let foc_residual = if best.x1 > 0.0 && best.x2 > 0.0 {
        let lhs = a1 * b1[best.position - 1] / best.x1;
        let rhs = a2 * b2[best.position - 1] / best.x2;
        Some((lhs - rhs).abs() / lhs)
    } else {
        None
    };
    let x = evaluate_throughput(&allocation, model);
    let prices = shadow_prices(&x, spec).ok();
    let structure = check_ca_structure(&allocation, model)?;
    let diagnostics = Diagnostics {
        iterations: n,
        converged: true,
        foc_residual,
        threshold: Some(best.position),
        theta: Some(best.theta),
        boundary: Some(best.clamped),
        shadow_prices: prices,
        structure: Some(structure),
        ..Diagnostics::default()
    };
    Ok(SolveReport::from_allocation(
        Strategy::Ca,
        allocation,
        model,
        spec,
        diagnostics,
    ))
}

/// The 2 x 2 case of [`solve_n_by_2`].
pub fn solve_2x2(model: &CapacityModel, spec: &UtilitySpec) -> Result<SolveReport, SolveError> {
    if model.n_machines() != 2 || model.m_vnfs() != 2 {
        return Err(SolveError::UnsupportedShape {
            n: model.n_machines(),
            m: model.m_vnfs(),
            expected: "2 x 2",
        });
    }
    solve_n_by_2(model, spec)
}

/// Cobb-Douglas optimum for 2 machines and m VNFs: solved by the general
/// ascent, then verified against the VNF-axis specialization pattern. The
/// reported threshold is the split VNF's position in advantage order.
pub fn solve_2_by_m(
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    if model.n_machines() != 2 {
        return Err(SolveError::UnsupportedShape {
            n: model.n_machines(),
            m: model.m_vnfs(),
            expected: "2 x m",
        });
    }
    threshold_preflight(model, spec)?;
    let mut report = solver::solve_general(model, spec)?;
    let structure = check_ca_structure(&report.allocation, model)?;
    report.strategy = Strategy::Ca;
    report.diagnostics.threshold = structure.threshold;
    report.diagnostics.structure = Some(structure);
    Ok(report)
}

/// Every machine spread evenly over all VNFs.
pub fn baseline_even_split(model: &CapacityModel) -> Allocation {
    Allocation::uniform(model.n_machines(), model.m_vnfs())
}

/// Every machine fully on its highest-rate VNF, ties to the lowest index.
/// Ignores comparative advantage by construction.
pub fn baseline_absolute_advantage(
    model: &CapacityModel,
) -> Result<Allocation, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let m = model.m_vnfs();
    let mut rows = Vec::with_capacity(model.n_machines());
    for i in 0..model.n_machines() {
        let mut pick = 0;
        for j in 1..m {
            if model.rate(i, j) > model.rate(i, pick) {
                pick = j;
            }
        }
        let mut row = vec![0.0; m];
        row[pick] = 1.0;
        rows.push(row);
    }
    Ok(Allocation::new(rows))
}

/// Full specialization by comparative advantage: each machine goes entirely
/// to the VNF where its share of the aggregate column capacity is largest
/// (compared by cross-multiplication; ties to the lowest index, dead columns
/// skipped). For two machines this reduces exactly to the pairwise
/// comparative-advantage test.
pub fn ca_specialization(model: &CapacityModel) -> Result<Allocation, SolveError> {
    if !model.linear_only() {
        return Err(SolveError::NonLinearModel);
    }
    let m = model.m_vnfs();
    let bounds: Vec<f64> = (0..m).map(|j| model.column_bound(j)).collect();
    let mut rows = Vec::with_capacity(model.n_machines());
    for i in 0..model.n_machines() {
        let mut pick: Option<usize> = None;
        for j in 0..m {
            if bounds[j] == 0.0 {
                continue;
            }
            match pick {
                None => pick = Some(j),
                Some(p) => {
                    if model.rate(i, j) * bounds[p] > model.rate(i, p) * bounds[j] {
                        pick = Some(j);
                    }
                }
            }
        }
        let mut row = vec![0.0; m];
        row[pick.unwrap_or(0)] = 1.0;
        rows.push(row);
    }
    Ok(Allocation::new(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_utility;
    use proptest::prelude::*;

    fn ids_model() -> CapacityModel {
        CapacityModel::from_rates(&[vec![21.0, 35.0], vec![6.0, 30.0]]).unwrap()
    }

    fn half_half() -> UtilitySpec {
        UtilitySpec::cobb_douglas(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn pairwise_comparisons() {
        let model = ids_model();
        assert_eq!(
            comparative_advantage(&model, 0, 1, 0, 1).unwrap(),
            CaComparison::FirstAdvantage
        );
        assert_eq!(
            comparative_advantage(&model, 1, 0, 0, 1).unwrap(),
            CaComparison::SecondAdvantage
        );

        let paradox = CapacityModel::from_rates(&[vec![5.0, 2.0], vec![2.0, 1.0]]).unwrap();
        // Machine 1 is better at both VNFs, yet machine 2 still holds
        // comparative advantage in VNF 2.
        assert_eq!(
            comparative_advantage(&paradox, 0, 1, 0, 1).unwrap(),
            CaComparison::FirstAdvantage
        );
        assert_eq!(
            comparative_advantage(&paradox, 1, 0, 1, 0).unwrap(),
            CaComparison::FirstAdvantage
        );

        let tied = CapacityModel::from_rates(&[vec![2.0, 4.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(
            comparative_advantage(&tied, 0, 1, 0, 1).unwrap(),
            CaComparison::Tie
        );

        let dead = CapacityModel::from_rates(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            comparative_advantage(&dead, 0, 1, 0, 1).unwrap_err(),
            SolveError::UndefinedComparison { machine: 1 }
        );
    }

    #[test]
    fn machine_ordering() {
        let ordering = sort_by_ca(&ids_model(), CaAxis::Machines).unwrap();
        assert_eq!(ordering.order, vec![0, 1]);
        assert_eq!(ordering.ratios, vec![0.6, 0.2]);
        assert!(ordering.ties.is_empty());
    }

    #[test]
    fn vnf_ordering_and_ties() {
        let model =
            CapacityModel::from_rates(&[vec![9.0, 5.0, 1.0], vec![1.0, 5.0, 9.0]]).unwrap();
        let ordering = sort_by_ca(&model, CaAxis::Vnfs).unwrap();
        assert_eq!(ordering.order, vec![0, 1, 2]);
        assert_eq!(ordering.ratios, vec![9.0, 1.0, 1.0 / 9.0]);

        let tied = CapacityModel::from_rates(&[vec![2.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let ordering = sort_by_ca(&tied, CaAxis::Machines).unwrap();
        assert_eq!(ordering.order, vec![0, 1]);
        assert_eq!(ordering.ties, vec![(0, 1)]);

        let big = CapacityModel::from_rates(&vec![vec![1.0; 3]; 3]).unwrap();
        assert!(matches!(
            sort_by_ca(&big, CaAxis::Machines),
            Err(SolveError::UnsupportedShape { .. })
        ));
    }

    #[test]
    fn threshold_split_on_ids_pair() {
        let report = solve_2x2(&ids_model(), &half_half()).unwrap();
        let theta = 13.0 / 14.0;
        assert!((report.allocation.fraction(0, 0) - theta).abs() < 1e-12);
        assert!((report.allocation.fraction(0, 1) - (1.0 - theta)).abs() < 1e-12);
        assert_eq!(report.allocation.row(1), &[0.0, 1.0]);
        assert!((report.throughput.get(0) - 19.5).abs() < 1e-12);
        assert!((report.throughput.get(1) - 32.5).abs() < 1e-12);
        assert!((report.utility - 3.2258272774526962).abs() < 1e-12);
        assert_eq!(report.diagnostics.threshold, Some(1));
        assert_eq!(report.diagnostics.boundary, Some(false));
        assert!(report.diagnostics.foc_residual.unwrap() < 1e-12);
        let prices = report.diagnostics.shadow_prices.as_ref().unwrap();
        assert!((prices.values()[0] - 0.02564102564102564).abs() < 1e-15);
        assert!((prices.values()[1] - 0.015384615384615385).abs() < 1e-15);
        assert!(report.diagnostics.structure.as_ref().unwrap().holds);
    }

    #[test]
    fn threshold_split_when_one_machine_dominates() {
        let model = CapacityModel::from_rates(&[vec![5.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let report = solve_2x2(&model, &half_half()).unwrap();
        assert!((report.allocation.fraction(0, 0) - 0.75).abs() < 1e-12);
        assert!((report.allocation.fraction(0, 1) - 0.25).abs() < 1e-12);
        assert_eq!(report.allocation.row(1), &[0.0, 1.0]);
        assert!((report.throughput.get(0) - 3.75).abs() < 1e-12);
        assert!((report.throughput.get(1) - 1.5).abs() < 1e-12);
        assert!((report.utility - 0.8636104740452419).abs() < 1e-12);
    }

    #[test]
    fn full_specialization_when_advantages_are_extreme() {
        let model = CapacityModel::from_rates(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
        let report = solve_2x2(&model, &half_half()).unwrap();
        assert_eq!(report.allocation.row(0), &[1.0, 0.0]);
        assert_eq!(report.allocation.row(1), &[0.0, 1.0]);
        assert!((report.utility - 1.3862943611198906).abs() < 1e-12);
        assert_eq!(report.diagnostics.boundary, Some(true));
    }

    #[test]
    fn three_machine_threshold() {
        let model =
            CapacityModel::from_rates(&[vec![9.0, 1.0], vec![5.0, 5.0], vec![1.0, 9.0]])
                .unwrap();
        let report = solve_n_by_2(&model, &half_half()).unwrap();
        assert_eq!(report.allocation.row(0), &[1.0, 0.0]);
        assert!((report.allocation.fraction(1, 0) - 0.5).abs() < 1e-12);
        assert!((report.allocation.fraction(1, 1) - 0.5).abs() < 1e-12);
        assert_eq!(report.allocation.row(2), &[0.0, 1.0]);
        assert_eq!(report.diagnostics.threshold, Some(2));
        assert!((report.utility - 2.4423470353692043).abs() < 1e-12);
        assert!((report.throughput.get(0) - 11.5).abs() < 1e-12);
        assert!(report.diagnostics.foc_residual.unwrap() < 1e-12);
    }

    #[test]
    fn single_machine_splits_by_weight() {
        let model = CapacityModel::from_rates(&[vec![10.0, 40.0]]).unwrap();
        let spec = UtilitySpec::cobb_douglas(vec![0.25, 0.75]).unwrap();
        let report = solve_n_by_2(&model, &spec).unwrap();
        assert!((report.allocation.fraction(0, 0) - 0.25).abs() < 1e-12);
        assert!((report.allocation.fraction(0, 1) - 0.75).abs() < 1e-12);
        assert_eq!(report.diagnostics.boundary, Some(false));
    }

    #[test]
    fn threshold_solver_preconditions() {
        let zero_col = CapacityModel::from_rates(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(
            solve_n_by_2(&zero_col, &half_half()).unwrap_err(),
            SolveError::ZeroColumn { vnf: 1 }
        );
        let zero_entry = CapacityModel::from_rates(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(
            solve_n_by_2(&zero_entry, &half_half()).unwrap_err(),
            SolveError::NonPositiveRate { machine: 1, vnf: 0 }
        );
        let linear = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            solve_n_by_2(&ids_model(), &linear).unwrap_err(),
            SolveError::WrongUtility("cobb-douglas")
        );
        let wide =
            CapacityModel::from_rates(&[vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]]).unwrap();
        let spec3 = UtilitySpec::cobb_douglas(vec![1.0 / 3.0; 3]).unwrap();
        assert!(matches!(
            solve_n_by_2(&wide, &spec3),
            Err(SolveError::UnsupportedShape { .. })
        ));
        assert!(matches!(
            solve_2x2(&wide, &spec3),
            Err(SolveError::UnsupportedShape { .. })
        ));
    }

    #[test]
    fn two_by_m_matches_frozen_optimum() {
        let model =
            CapacityModel::from_rates(&[vec![9.0, 5.0, 1.0], vec![1.0, 5.0, 9.0]]).unwrap();
        let spec = UtilitySpec::cobb_douglas(vec![1.0 / 3.0; 3]).unwrap();
        let report = solve_2_by_m(&model, &spec).unwrap();
        assert!(report.diagnostics.converged);
        assert!((report.utility - 1.5958305809273485).abs() < 1e-6);
        // VNF 1 only on machine 1, VNF 3 only on machine 2, VNF 2 split.
        assert!(report.allocation.fraction(1, 0) <= STRUCTURE_EPS);
        assert!(report.allocation.fraction(0, 2) <= STRUCTURE_EPS);
        assert!(report.allocation.fraction(0, 1) > STRUCTURE_EPS);
        assert!(report.allocation.fraction(1, 1) > STRUCTURE_EPS);
        assert!((report.throughput.get(0) - 6.0).abs() < 1e-4);
        assert!((report.throughput.get(1) - 10.0 / 3.0).abs() < 1e-4);
        assert!((report.throughput.get(2) - 6.0).abs() < 1e-4);
        let structure = report.diagnostics.structure.as_ref().unwrap();
        assert!(structure.holds);
        assert_eq!(structure.threshold, Some(2));
        assert_eq!(report.diagnostics.threshold, Some(2));
    }

    #[test]
    fn two_by_m_agrees_with_threshold_solver_on_2x2() {
        let model = ids_model();
        let spec = half_half();
        let general = solve_2_by_m(&model, &spec).unwrap();
        let closed = solve_n_by_2(&model, &spec).unwrap();
        assert!((general.utility - closed.utility).abs() < 1e-6);
    }

    #[test]
    fn two_by_m_reports_ties_for_proportional_columns() {
        let model = CapacityModel::from_rates(&[vec![2.0, 4.0], vec![1.0, 2.0]]).unwrap();
        let spec = half_half();
        let report = solve_2_by_m(&model, &spec).unwrap();
        let structure = report.diagnostics.structure.as_ref().unwrap();
        assert!(structure.holds);
        assert_eq!(structure.ties, vec![(0, 1)]);
    }

    #[test]
    fn structure_check_examples() {
        let model = ids_model();
        let specialized = Allocation::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let check = check_ca_structure(&specialized, &model).unwrap();
        assert!(check.holds);
        assert_eq!(check.threshold, Some(1));

        let even = Allocation::uniform(2, 2);
        let check = check_ca_structure(&even, &model).unwrap();
        assert!(!check.holds);
        assert_eq!(
            check.violations,
            vec![(0, 1, 0.5), (1, 0, 0.5)]
        );
        assert_eq!(check.threshold, None);

        let solved = solve_2x2(&model, &half_half()).unwrap();
        let check = check_ca_structure(&solved.allocation, &model).unwrap();
        assert!(check.holds);
        assert_eq!(check.threshold, Some(1));

        let wide = CapacityModel::from_rates(&vec![vec![1.0; 3]; 3]).unwrap();
        assert!(matches!(
            check_ca_structure(&Allocation::uniform(3, 3), &wide),
            Err(SolveError::UnsupportedShape { .. })
        ));
    }

    #[test]
    fn baselines() {
        let model = ids_model();
        let even = baseline_even_split(&model);
        assert_eq!(even.rows(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);

        // Both machines are absolutely better at VNF 2.
        let absolute = baseline_absolute_advantage(&model).unwrap();
        assert_eq!(absolute.rows(), &[vec![0.0, 1.0], vec![0.0, 1.0]]);
        let x = evaluate_throughput(&absolute, &model);
        assert_eq!(x.values(), &[0.0, 65.0]);

        let tied = CapacityModel::from_rates(&[vec![3.0, 3.0]]).unwrap();
        let absolute = baseline_absolute_advantage(&tied).unwrap();
        assert_eq!(absolute.rows(), &[vec![1.0, 0.0]]);
    }

    #[test]
    fn specialization_follows_comparative_advantage() {
        let model = ids_model();
        let u = ca_specialization(&model).unwrap();
        assert_eq!(u.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let linear = UtilitySpec::linear(vec![1.0, 1.0]).unwrap();
        let x = evaluate_throughput(&u, &model);
        assert_eq!(evaluate_utility(&x, &linear), 51.0);

        let diagonal = CapacityModel::from_rates(&[vec![4.0, 1.0], vec![1.0, 4.0]]).unwrap();
        assert_eq!(
            ca_specialization(&diagonal).unwrap().rows(),
            &[vec![1.0, 0.0], vec![0.0, 1.0]]
        );

        let flat = CapacityModel::from_rates(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            ca_specialization(&flat).unwrap().rows(),
            &[vec![1.0, 0.0], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn column_scaling_preserves_the_split() {
        let base = ids_model();
        let scaled =
            CapacityModel::from_rates(&[vec![21.0, 105.0], vec![6.0, 90.0]]).unwrap();
        let spec = half_half();
        let a = solve_2x2(&base, &spec).unwrap();
        let b = solve_2x2(&scaled, &spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (a.allocation.fraction(i, j) - b.allocation.fraction(i, j)).abs() < 1e-9
                );
            }
        }
        let shift = b.utility - a.utility;
        assert!((shift - 0.5 * 3.0_f64.ln()).abs() < 1e-9);
    }

    fn positive_rate() -> impl proptest::strategy::Strategy<Value = f64> {
        1.0f64..10.0
    }

    proptest! {
        // Paper's exchange argument: under strict comparative advantage the
        // optimum never has both cross terms positive.
        #[test]
        fn optimal_2x2_has_zero_cross_product(
            b11 in positive_rate(), b12 in positive_rate(),
            b21 in positive_rate(), b22 in positive_rate(),
        ) {
            prop_assume!((b11 * b22 - b12 * b21).abs() > 1e-6 * (b11 * b22).max(b12 * b21));
            let model = CapacityModel::from_rates(&[vec![b11, b12], vec![b21, b22]]).unwrap();
            let report = solve_2x2(&model, &half_half()).unwrap();
            let u = &report.allocation;
            let (first, second) = if b11 * b22 > b12 * b21 { (0, 1) } else { (1, 0) };
            prop_assert!(u.fraction(first, 1) * u.fraction(second, 0) <= 1e-9);
        }

        // Positive rates mean idle capacity is never optimal.
        #[test]
        fn threshold_solution_uses_every_machine(
            rows in proptest::collection::vec((positive_rate(), positive_rate()), 1..7),
        ) {
            let rates: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
            let model = CapacityModel::from_rates(&rates).unwrap();
            let report = solve_n_by_2(&model, &half_half()).unwrap();
            for row in report.allocation.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let structure = report.diagnostics.structure.as_ref().unwrap();
            prop_assert!(structure.holds);
            prop_assert!(report.diagnostics.threshold.is_some());
        }

        // Interior split satisfies the indifference condition: both VNFs
        // yield the same priced marginal rate on the threshold machine.
        #[test]
        fn interior_split_is_price_indifferent(
            rows in proptest::collection::vec((positive_rate(), positive_rate()), 1..7),
            a1 in 0.05f64..0.95,
        ) {
            let rates: Vec<Vec<f64>> = rows.iter().map(|&(a, b)| vec![a, b]).collect();
            let model = CapacityModel::from_rates(&rates).unwrap();
            let spec = UtilitySpec::cobb_douglas(vec![a1, 1.0 - a1]).unwrap();
            let report = solve_n_by_2(&model, &spec).unwrap();
            if report.diagnostics.boundary == Some(false) {
                prop_assert!(report.diagnostics.foc_residual.unwrap() <= 1e-8);
            }
        }
    }
}
