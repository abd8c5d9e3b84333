//! Rendering: Markdown and CSV tables with provenance footers, plus the
//! setup-inclusive economics projection.

use crate::drift::DriftReport;
use crate::fixtures::EconomicsCell;
use crate::session::{session_speedup, CohortSummary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Markdown,
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "md" | "markdown" => Some(OutputFormat::Markdown),
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Where a rendered table came from: inputs, seed, and tool version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(inputs: Vec<String>, seed: Option<u64>) -> Self {
        Provenance {
            tool: "reuselab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs,
            seed,
        }
    }

    pub fn footer(&self, format: OutputFormat) -> String {
        let seed = self
            .seed
            .map_or(String::new(), |s| format!(" seed={s}"));
        let line = format!(
            "{} v{}{} inputs=[{}]",
            self.tool,
            self.version,
            seed,
            self.inputs.join(", ")
        );
        match format {
            OutputFormat::Markdown => format!("\n_{line}_\n"),
            OutputFormat::Csv => format!("# {line}\n"),
            OutputFormat::Json => String::new(),
        }
    }
}

/// Setup-inclusive speedup for `q` same-video queries given the first-query
/// multiplier `q1` and the steady warm multiplier.
pub fn economics_speedup(q1: f64, warm: f64, q: usize) -> f64 {
    assert!(q1 > 0.0 && warm > 0.0);
    session_speedup(q, 1.0, 1.0 / q1, 1.0 / warm)
}

pub const ECONOMICS_Q: [usize; 4] = [2, 5, 10, 50];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicsRow {
    pub name: String,
    pub dacc: f64,
    pub warm: f64,
    pub q1: f64,
    /// Computed speedups at Q = 2, 5, 10, 50.
    pub computed: [f64; 4],
    pub expected: [f64; 4],
    pub max_abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicsReport {
    pub tolerance: f64,
    pub rows: Vec<EconomicsRow>,
    pub all_pass: bool,
}

pub fn economics_report(cells: &[EconomicsCell], tolerance: f64) -> EconomicsReport {
    let mut rows = Vec::with_capacity(cells.len());
    for c in cells {
        let computed: [f64; 4] =
            core::array::from_fn(|i| economics_speedup(c.q1, c.warm, ECONOMICS_Q[i]));
        let expected = [c.expected.q2, c.expected.q5, c.expected.q10, c.expected.q50];
        let max_abs_diff = computed
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        rows.push(EconomicsRow {
            name: c.name.clone(),
            dacc: c.dacc,
            warm: c.warm,
            q1: c.q1,
            computed,
            expected,
            max_abs_diff,
            pass: max_abs_diff <= tolerance,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    EconomicsReport {
        tolerance,
        rows,
        all_pass,
    }
}

impl EconomicsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "name,dacc,warm,q1,q2,q5,q10,q50,expected_q2,expected_q5,expected_q10,expected_q50,max_abs_diff,pass\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.3},{}\n",
                r.name,
                r.dacc,
                r.warm,
                r.q1,
                r.computed[0],
                r.computed[1],
                r.computed[2],
                r.computed[3],
                r.expected[0],
                r.expected[1],
                r.expected[2],
                r.expected[3],
                r.max_abs_diff,
                r.pass
            ));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Cell | dAcc | Warm | Q=1 | Q=2 | Q=5 | Q=10 | Q=50 | Max diff | Pass |\n|---|---|---|---|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {:+.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.3} | {} |\n",
                r.name,
                r.dacc,
                r.warm,
                r.q1,
                r.computed[0],
                r.computed[1],
                r.computed[2],
                r.computed[3],
                r.max_abs_diff,
                if r.pass { "pass" } else { "miss" }
            ));
        }
        out
    }
}

pub fn drift_markdown(report: &DriftReport) -> String {
    let mut out = String::from("| Metric | Value |\n|---|---|\n");
    out.push_str(&format!("| rows | {} |\n", report.n_rows));
    out.push_str(&format!("| choice diffs | {} |\n", report.choice_diffs));
    out.push_str(&format!(
        "| correctness diffs | {} |\n",
        report.correctness_diffs
    ));
    out.push_str(&format!("| text diffs | {} |\n", report.text_diffs));
    out.push_str(&format!(
        "| matched parse failures | {} |\n",
        report.matched_parse_failures
    ));
    out.push_str(&format!(
        "| pathological outputs | {} |\n",
        report.pathological_count
    ));
    out.push_str(&format!(
        "| drift rate | {:.4} (gate {:.2}, {}) |\n",
        report.drift_rate,
        report.gate,
        if report.gate_pass { "pass" } else { "fail" }
    ));
    out.push_str(&format!(
        "| rule-of-three bound | {:.4} |\n",
        report.rule_of_three_bound
    ));
    out.push_str(&format!(
        "| sessions with any drift | {}/{} |\n",
        report.session_any_drift, report.n_sessions
    ));
    out.push_str(&format!(
        "| early half | {} diffs / {} rows |\n",
        report.early.choice_diffs, report.early.rows
    ));
    out.push_str(&format!(
        "| late half | {} diffs / {} rows |\n",
        report.late.choice_diffs, report.late.rows
    ));
    out
}

pub fn drift_csv(report: &DriftReport) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("rows,{}\n", report.n_rows));
    out.push_str(&format!("choice_diffs,{}\n", report.choice_diffs));
    out.push_str(&format!("correctness_diffs,{}\n", report.correctness_diffs));
    out.push_str(&format!("text_diffs,{}\n", report.text_diffs));
    out.push_str(&format!(
        "matched_parse_failures,{}\n",
        report.matched_parse_failures
    ));
    out.push_str(&format!("pathological,{}\n", report.pathological_count));
    out.push_str(&format!("drift_rate,{:.6}\n", report.drift_rate));
    out.push_str(&format!("gate,{:.4}\n", report.gate));
    out.push_str(&format!("gate_pass,{}\n", report.gate_pass));
    out.push_str(&format!(
        "rule_of_three_bound,{:.6}\n",
        report.rule_of_three_bound
    ));
    out.push_str(&format!(
        "session_any_drift,{}/{}\n",
        report.session_any_drift, report.n_sessions
    ));
    out.push_str(&format!(
        "early,{}:{}\n",
        report.early.choice_diffs, report.early.rows
    ));
    out.push_str(&format!(
        "late,{}:{}\n",
        report.late.choice_diffs, report.late.rows
    ));
    out
}

pub fn cohort_markdown(policy: &str, summary: &CohortSummary) -> String {
    let mut out = String::from("| Metric | Value |\n|---|---|\n");
    out.push_str(&format!("| policy | {policy} |\n"));
    out.push_str(&format!("| sessions | {} |\n", summary.n_sessions));
    out.push_str(&format!("| queries | {} |\n", summary.n_queries));
    out.push_str(&format!("| follow-ups | {} |\n", summary.n_followups));
    out.push_str(&format!(
        "| median follow-up latency (s) | {:.3} |\n",
        summary.median_followup_latency_s
    ));
    out.push_str(&format!(
        "| median follow-up tail tokens | {} |\n",
        summary.median_followup_tail_tokens
    ));
    out.push_str(&format!(
        "| pathological follow-ups | {} |\n",
        summary.pathological_followups
    ));
    out
}

pub fn cohort_csv(policy: &str, summary: &CohortSummary) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("policy,{policy}\n"));
    out.push_str(&format!("sessions,{}\n", summary.n_sessions));
    out.push_str(&format!("queries,{}\n", summary.n_queries));
    out.push_str(&format!("followups,{}\n", summary.n_followups));
    out.push_str(&format!(
        "median_followup_latency_s,{:.6}\n",
        summary.median_followup_latency_s
    ));
    out.push_str(&format!(
        "median_followup_tail_tokens,{}\n",
        summary.median_followup_tail_tokens
    ));
    out.push_str(&format!(
        "pathological_followups,{}\n",
        summary.pathological_followups
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn economics_speedup_matches_published_row() {
        assert!((economics_speedup(1.04, 83.0, 2) - 2.05).abs() < 0.1);
        assert!((economics_speedup(1.04, 83.0, 50) - 32.17).abs() < 0.1);
        assert!((economics_speedup(1.04, 83.0, 1) - 1.04).abs() < 1e-9);
    }

    #[test]
    fn all_bundled_economics_cells_pass() {
        let cells = fixtures::economics_cells().unwrap();
        let report = economics_report(&cells, 0.1);
        assert!(report.all_pass, "{:?}", report.rows);
        assert_eq!(report.rows.len(), 8);
    }

    #[test]
    fn footers_name_tool_seed_and_inputs() {
        let p = Provenance::new(vec!["a.json".into()], Some(42));
        let md = p.footer(OutputFormat::Markdown);
        assert!(md.contains("reuselab") && md.contains("seed=42") && md.contains("a.json"));
        let csv = p.footer(OutputFormat::Csv);
        assert!(csv.starts_with("# "));
        assert_eq!(p.footer(OutputFormat::Json), "");
    }

    #[test]
    fn format_parse_spellings() {
        assert_eq!(OutputFormat::parse("md"), Some(OutputFormat::Markdown));
        assert_eq!(OutputFormat::parse("markdown"), Some(OutputFormat::Markdown));
        assert_eq!(OutputFormat::parse("csv"), Some(OutputFormat::Csv));
        assert_eq!(OutputFormat::parse("json"), Some(OutputFormat::Json));
        assert_eq!(OutputFormat::parse("yaml"), None);
    }
}
