//! Run reports: the per-iteration CSV trace and the JSON summary.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::solver::SolverReport;

pub const TRACE_HEADER: &str = "iter,rel_change,primal_residual,objective";

/// One CSV row per iteration, 1-based `iter`.
pub fn trace_csv(report: &SolverReport) -> String {
    let mut out = String::with_capacity(64 * (report.iterations + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..report.iterations {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            report.rel_change[i],
            report.primal_residuals[i],
            report.objective[i]
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// RSE of the written output against the ground truth.
    pub rse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
    /// RSE of the solver output before 8-bit quantization, when that differs
    /// from the written artifact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rse_unquantized: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_has_header_and_one_row_per_iteration() {
        let report = SolverReport {
            iterations: 2,
            rel_change: vec![f64::INFINITY, 0.25],
            primal_residuals: vec![1.0, 0.5],
            objective: vec![3.0, 2.5],
            converged: false,
        };
        let csv = trace_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines, vec![TRACE_HEADER, "1,inf,1,3", "2,0.25,0.5,2.5"]);
    }

    #[test]
    fn summary_json_fields() {
        let s = Summary {
            rse: 0.125,
            iterations: 7,
            converged: true,
            seconds: 1.5,
            rse_unquantized: None,
        };
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"rse":0.125,"iterations":7,"converged":true,"seconds":1.5}"#
        );
        assert_eq!(serde_json::from_str::<Summary>(&json).unwrap(), s);
    }
}
