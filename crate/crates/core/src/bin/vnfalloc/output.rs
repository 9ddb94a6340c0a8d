//! Report rendering: fixed 12-significant-digit float formatting and the
//! table / JSON / CSV emitters. JSON is built by hand so identical inputs
//! produce byte-identical output (stable key order, stable number strings).

use vnfalloc::ca::StructureCheck;
use vnfalloc::model::CapacityModel;
use vnfalloc::report::SolveReport;
use vnfalloc::solver::StrategyOutcome;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Shortest fixed/scientific rendering at 12 significant digits, matching
/// printf's %g selection rule. Non-finite values print as named tokens;
/// JSON emitters must convert those to null before use.
pub fn format_g(value: f64) -> String {
    if value.is_nan() {
        return "nan".to_string();
    }
    if value.is_infinite() {
        return if value.is_sign_positive() { "inf" } else { "-inf" }.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    // The exponent comes from the rounded scientific form so values that
    // round across a power of ten pick the right notation.
    let sci = format!("{value:.*e}", SIGNIFICANT_DIGITS - 1);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp_str.parse().expect("decimal exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{value:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    }
}

fn json_number(value: f64) -> String {
    if value.is_finite() {
        format_g(value)
    } else {
        "null".to_string()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn json_number_array(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| json_number(v)).collect();
    format!("[{}]", parts.join(", "))
}

fn json_string_array(values: &[String]) -> String {
    let parts: Vec<String> = values.iter().map(|v| json_string(v)).collect();
    format!("[{}]", parts.join(", "))
}

fn json_index_array(values: &[usize]) -> String {
    let parts: Vec<String> = values.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn machine_names(model: &CapacityModel) -> Vec<String> {
    model.machines().iter().map(|m| m.name.clone()).collect()
}

pub fn vnf_names(model: &CapacityModel) -> Vec<String> {
    model.vnfs().iter().map(|v| v.name.clone()).collect()
}

fn total_throughput(report: &SolveReport) -> f64 {
    report.throughput.values().iter().sum()
}

/// One-word verdict for a structure check, used by compare rows and
/// validate: "holds", "violated", or "n/a" when the shape does not admit
/// the threshold pattern.
pub fn structure_summary(check: Option<&StructureCheck>) -> &'static str {
    match check {
        Some(c) if c.holds => "holds",
        Some(_) => "violated",
        None => "n/a",
    }
}

fn structure_json(check: &StructureCheck) -> String {
    let violations: Vec<String> = check
        .violations
        .iter()
        .map(|&(i, j, v)| format!("[{}, {}, {}]", i, j, json_number(v)))
        .collect();
    let ties: Vec<String> = check
        .ties
        .iter()
        .map(|&(a, b)| format!("[{a}, {b}]"))
        .collect();
    let threshold = check
        .threshold
        .map_or_else(|| "null".to_string(), |t| t.to_string());
    format!(
        "{{\"holds\": {}, \"violations\": [{}], \"threshold\": {}, \"ties\": [{}]}}",
        check.holds,
        violations.join(", "),
        threshold,
        ties.join(", ")
    )
}

fn diagnostics_json(report: &SolveReport, indent: &str) -> String {
    let d = &report.diagnostics;
    let mut lines = vec![
        format!("{indent}  \"iterations\": {}", d.iterations),
        format!("{indent}  \"converged\": {}", d.converged),
    ];
    if let Some(r) = d.foc_residual {
        lines.push(format!("{indent}  \"foc_residual\": {}", json_number(r)));
    }
    if let Some(t) = d.threshold {
        lines.push(format!("{indent}  \"threshold\": {t}"));
    }
    if let Some(theta) = d.theta {
        lines.push(format!("{indent}  \"theta\": {}", json_number(theta)));
    }
    if let Some(b) = d.boundary {
        lines.push(format!("{indent}  \"boundary\": {b}"));
    }
    if let Some(p) = &d.shadow_prices {
        lines.push(format!(
            "{indent}  \"shadow_prices\": {}",
            json_number_array(p.values())
        ));
    }
    if let Some(s) = &d.structure {
        lines.push(format!("{indent}  \"structure\": {}", structure_json(s)));
    }
    if let Some(b) = &d.binding_machines {
        lines.push(format!(
            "{indent}  \"binding_machines\": {}",
            json_index_array(b)
        ));
    }
    if let Some(b) = &d.binding_requirements {
        lines.push(format!(
            "{indent}  \"binding_requirements\": {}",
            json_index_array(b)
        ));
    }
    if let Some(g) = d.grid_points {
        lines.push(format!("{indent}  \"grid_points\": {g}"));
    }
    format!("{{\n{}\n{indent}}}", lines.join(",\n"))
}

pub fn solve_json(
    report: &SolveReport,
    model: &CapacityModel,
    units: &str,
    seed: Option<u64>,
) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!(
        "  \"strategy\": {},\n",
        json_string(report.strategy.label())
    ));
    out.push_str(&format!("  \"units\": {},\n", json_string(units)));
    out.push_str(&format!(
        "  \"machines\": {},\n",
        json_string_array(&machine_names(model))
    ));
    out.push_str(&format!(
        "  \"vnfs\": {},\n",
        json_string_array(&vnf_names(model))
    ));
    let rows: Vec<String> = report
        .allocation
        .rows()
        .iter()
        .map(|r| format!("    {}", json_number_array(r)))
        .collect();
    out.push_str(&format!("  \"u\": [\n{}\n  ],\n", rows.join(",\n")));
    out.push_str(&format!(
        "  \"throughput\": {},\n",
        json_number_array(report.throughput.values())
    ));
    out.push_str(&format!(
        "  \"total\": {},\n",
        json_number(total_throughput(report))
    ));
    out.push_str(&format!(
        "  \"utility\": {},\n",
        json_number(report.utility)
    ));
    if let Some(seed) = seed {
        out.push_str(&format!("  \"seed\": {seed},\n"));
    }
    out.push_str(&format!(
        "  \"diagnostics\": {}\n",
        diagnostics_json(report, "  ")
    ));
    out.push_str("}\n");
    out
}

pub fn solve_table(report: &SolveReport, model: &CapacityModel, units: &str) -> String {
    let machines = machine_names(model);
    let vnfs = vnf_names(model);
    let d = &report.diagnostics;
    let mut out = String::new();
    out.push_str(&format!("strategy: {}\n", report.strategy.label()));
    out.push_str(&format!("units: {units}\n"));
    out.push_str("allocation:\n");
    for (name, row) in machines.iter().zip(report.allocation.rows()) {
        let cells: Vec<String> = vnfs
            .iter()
            .zip(row)
            .map(|(v, &u)| format!("{v}={}", format_g(u)))
            .collect();
        out.push_str(&format!("  {name}: {}\n", cells.join(", ")));
    }
    let x: Vec<String> = vnfs
        .iter()
        .zip(report.throughput.values())
        .map(|(v, &xj)| format!("{v}={}", format_g(xj)))
        .collect();
    out.push_str(&format!("throughput: {}\n", x.join(", ")));
    out.push_str(&format!(
        "total: {} {units}\n",
        format_g(total_throughput(report))
    ));
    out.push_str(&format!("utility: {}\n", format_g(report.utility)));
    out.push_str(&format!(
        "converged: {} ({} iterations)\n",
        d.converged, d.iterations
    ));
    if let Some(r) = d.foc_residual {
        out.push_str(&format!("foc residual: {}\n", format_g(r)));
    }
    if let Some(t) = d.threshold {
        let detail = match (d.theta, d.boundary) {
            (Some(theta), Some(b)) => {
                format!(" (theta={}, boundary={b})", format_g(theta))
            }
            (Some(theta), None) => format!(" (theta={})", format_g(theta)),
            _ => String::new(),
        };
        out.push_str(&format!("threshold: {t}{detail}\n"));
    }
    if let Some(p) = &d.shadow_prices {
        let cells: Vec<String> = vnfs
            .iter()
            .zip(p.values())
            .map(|(v, &pj)| format!("{v}={}", format_g(pj)))
            .collect();
        out.push_str(&format!("shadow prices: {}\n", cells.join(", ")));
    }
    if let Some(s) = &d.structure {
        let threshold = s
            .threshold
            .map_or_else(|| "ambiguous".to_string(), |t| format!("threshold {t}"));
        out.push_str(&format!(
            "structure: {} ({threshold})\n",
            structure_summary(Some(s))
        ));
    }
    if let Some(b) = &d.binding_machines {
        if !b.is_empty() {
            let names: Vec<String> = b.iter().map(|&i| machines[i].clone()).collect();
            out.push_str(&format!("binding machines: {}\n", names.join(", ")));
        }
    }
    if let Some(b) = &d.binding_requirements {
        if !b.is_empty() {
            let names: Vec<String> = b.iter().map(|&j| vnfs[j].clone()).collect();
            out.push_str(&format!("binding requirements: {}\n", names.join(", ")));
        }
    }
    if let Some(g) = d.grid_points {
        out.push_str(&format!("grid points: {g}\n"));
    }
    out
}

pub fn solve_csv(report: &SolveReport, model: &CapacityModel) -> String {
    let machines = machine_names(model);
    let vnfs = vnf_names(model);
    let d = &report.diagnostics;
    let mut out = String::from("record,machine,vnf,value\n");
    for (name, row) in machines.iter().zip(report.allocation.rows()) {
        for (vnf, &u) in vnfs.iter().zip(row) {
            out.push_str(&format!(
                "allocation,{},{},{}\n",
                csv_field(name),
                csv_field(vnf),
                format_g(u)
            ));
        }
    }
    for (vnf, &x) in vnfs.iter().zip(report.throughput.values()) {
        out.push_str(&format!(
            "throughput,,{},{}\n",
            csv_field(vnf),
            format_g(x)
        ));
    }
    out.push_str(&format!("total,,,{}\n", format_g(total_throughput(report))));
    out.push_str(&format!("utility,,,{}\n", format_g(report.utility)));
    out.push_str(&format!("diagnostic,,iterations,{}\n", d.iterations));
    out.push_str(&format!(
        "diagnostic,,converged,{}\n",
        u8::from(d.converged)
    ));
    if let Some(r) = d.foc_residual {
        out.push_str(&format!("diagnostic,,foc_residual,{}\n", format_g(r)));
    }
    if let Some(t) = d.threshold {
        out.push_str(&format!("diagnostic,,threshold,{t}\n"));
    }
    if let Some(theta) = d.theta {
        out.push_str(&format!("diagnostic,,theta,{}\n", format_g(theta)));
    }
    if let Some(b) = d.boundary {
        out.push_str(&format!("diagnostic,,boundary,{}\n", u8::from(b)));
    }
    if let Some(p) = &d.shadow_prices {
        for (vnf, &pj) in vnfs.iter().zip(p.values()) {
            out.push_str(&format!(
                "shadow_price,,{},{}\n",
                csv_field(vnf),
                format_g(pj)
            ));
        }
    }
    if let Some(b) = &d.binding_machines {
        let list: Vec<String> = b.iter().map(|&i| machines[i].clone()).collect();
        out.push_str(&format!(
            "diagnostic,,binding_machines,{}\n",
            csv_field(&list.join(";"))
        ));
    }
    if let Some(b) = &d.binding_requirements {
        let list: Vec<String> = b.iter().map(|&j| vnfs[j].clone()).collect();
        out.push_str(&format!(
            "diagnostic,,binding_requirements,{}\n",
            csv_field(&list.join(";"))
        ));
    }
    if let Some(g) = d.grid_points {
        out.push_str(&format!("diagnostic,,grid_points,{g}\n"));
    }
    out
}

/// Compare rows pair each outcome with the structure verdict computed by
/// the caller (None = shape not applicable or strategy failed).
pub struct CompareRow<'a> {
    pub outcome: &'a StrategyOutcome,
    pub structure: Option<StructureCheck>,
}

pub fn compare_json(
    rows: &[CompareRow<'_>],
    model: &CapacityModel,
    units: &str,
    seed: Option<u64>,
) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"units\": {},\n", json_string(units)));
    out.push_str(&format!(
        "  \"machines\": {},\n",
        json_string_array(&machine_names(model))
    ));
    out.push_str(&format!(
        "  \"vnfs\": {},\n",
        json_string_array(&vnf_names(model))
    ));
    if let Some(seed) = seed {
        out.push_str(&format!("  \"seed\": {seed},\n"));
    }
    let entries: Vec<String> = rows
        .iter()
        .map(|row| {
            let label = json_string(row.outcome.strategy.label());
            match &row.outcome.outcome {
                Ok(report) => format!(
                    "    {{\"strategy\": {label}, \"utility\": {}, \"throughput\": {}, \
                     \"total\": {}, \"structure\": {}}}",
                    json_number(report.utility),
                    json_number_array(report.throughput.values()),
                    json_number(total_throughput(report)),
                    json_string(structure_summary(row.structure.as_ref()))
                ),
                Err(err) => {
                    format!("    {{\"strategy\": {label}, \"error\": {}}}", json_string(&err.to_string()))
                }
            }
        })
        .collect();
    out.push_str(&format!(
        "  \"strategies\": [\n{}\n  ]\n",
        entries.join(",\n")
    ));
    out.push_str("}\n");
    out
}

pub fn compare_table(rows: &[CompareRow<'_>], model: &CapacityModel, units: &str) -> String {
    let vnfs = vnf_names(model);
    let mut header = vec!["strategy".to_string(), "utility".to_string()];
    header.extend(vnfs.iter().cloned());
    header.push("total".to_string());
    header.push("structure".to_string());

    let mut table: Vec<Vec<String>> = vec![header];
    for row in rows {
        let mut cells = vec![row.outcome.strategy.label().to_string()];
        match &row.outcome.outcome {
            Ok(report) => {
                cells.push(format_g(report.utility));
                for &x in report.throughput.values() {
                    cells.push(format_g(x));
                }
                cells.push(format_g(total_throughput(report)));
                cells.push(structure_summary(row.structure.as_ref()).to_string());
            }
            Err(err) => {
                cells.extend(vec!["-".to_string(); vnfs.len() + 2]);
                cells.push(format!("error: {err}"));
            }
        }
        table.push(cells);
    }

    let columns = table[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("units: {units}\n");
    for row in &table {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            if c == columns - 1 {
                line.push_str(cell); // last column: no trailing padding
            } else if c == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[c]));
            } else {
                line.push_str(&format!("{cell:>width$}", width = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Plot-ready long format: one row per (successful strategy, vnf).
pub fn compare_csv(rows: &[CompareRow<'_>], model: &CapacityModel) -> String {
    let vnfs = vnf_names(model);
    let mut out = String::from("strategy,vnf,throughput\n");
    for row in rows {
        if let Ok(report) = &row.outcome.outcome {
            for (vnf, &x) in vnfs.iter().zip(report.throughput.values()) {
                out.push_str(&format!(
                    "{},{},{}\n",
                    csv_field(row.outcome.strategy.label()),
                    csv_field(vnf),
                    format_g(x)
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::format_g;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_g(0.0), "0");
        assert_eq!(format_g(-0.0), "0");
        assert_eq!(format_g(52.0), "52");
        assert_eq!(format_g(-46.0), "-46");
        assert_eq!(format_g(13.0 / 14.0), "0.928571428571");
        assert_eq!(format_g(3.2258272774526962), "3.22582727745");
        assert_eq!(format_g(1e-5), "1e-5");
        assert_eq!(format_g(1.0e12), "1e12");
        assert_eq!(format_g(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_g(0.99999999999999), "1");
        assert_eq!(format_g(f64::INFINITY), "inf");
        assert_eq!(format_g(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_g(f64::NAN), "nan");
    }
}
