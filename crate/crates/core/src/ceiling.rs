//! Stage-share speedup ceilings: ideal end-to-end gain, scatter-back
//! prediction, and residual reporting against observed speedups.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CeilingError {
    #[error("component speedup must be > 0, got {0}")]
    NonPositiveSpeedup(f64),
    #[error("f_fixed must be in [0, 1], got {0}")]
    BadFixedFraction(f64),
    #[error("v_share and v_red must be in [0, 1], got ({0}, {1})")]
    BadVisionTerms(f64, f64),
    #[error("v_share * v_red must be < 1, got {0}")]
    SaturatedProduct(f64),
}

/// Ideal end-to-end gain when one stage is accelerated by `s` and the
/// fraction `f_fixed` of dense wall-clock is untouched:
/// `1 / (f_fixed + (1 - f_fixed) / s)`.
pub fn ideal_e2e(f_fixed: f64, s: f64) -> Result<f64, CeilingError> {
    if !(0.0..=1.0).contains(&f_fixed) {
        return Err(CeilingError::BadFixedFraction(f_fixed));
    }
    if s <= 0.0 {
        return Err(CeilingError::NonPositiveSpeedup(s));
    }
    Ok(1.0 / (f_fixed + (1.0 - f_fixed) / s))
}

/// Scatter-back prediction for vision-stage pruning:
/// `1 / (1 - v_share * v_red)`.
pub fn scatterback_pred(v_share: f64, v_red: f64) -> Result<f64, CeilingError> {
    if !(0.0..=1.0).contains(&v_share) || !(0.0..=1.0).contains(&v_red) {
        return Err(CeilingError::BadVisionTerms(v_share, v_red));
    }
    let product = v_share * v_red;
    if product >= 1.0 {
        return Err(CeilingError::SaturatedProduct(product));
    }
    Ok(1.0 / (1.0 - product))
}

/// Observed minus predicted speedup, in percentage points.
pub fn residual(observed: f64, predicted: f64) -> f64 {
    (observed - predicted) * 100.0
}

/// One ceiling cell: either vision terms (scatter-back) or generic
/// stage-share terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CeilingCell {
    Vision {
        name: String,
        v_share: f64,
        v_red: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        observed: Option<f64>,
        #[serde(default)]
        verdict: String,
    },
    StageShare {
        name: String,
        f_fixed: f64,
        s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        observed: Option<f64>,
        #[serde(default)]
        verdict: String,
    },
}

impl CeilingCell {
    pub fn name(&self) -> &str {
        match self {
            CeilingCell::Vision { name, .. } | CeilingCell::StageShare { name, .. } => name,
        }
    }

    pub fn observed(&self) -> Option<f64> {
        match self {
            CeilingCell::Vision { observed, .. } | CeilingCell::StageShare { observed, .. } => {
                *observed
            }
        }
    }

    pub fn predict(&self) -> Result<f64, CeilingError> {
        match self {
            CeilingCell::Vision { v_share, v_red, .. } => scatterback_pred(*v_share, *v_red),
            CeilingCell::StageShare { f_fixed, s, .. } => ideal_e2e(*f_fixed, *s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeilingRow {
    pub name: String,
    pub predicted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    /// Observed minus predicted, percentage points; present iff observed is.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_pp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeilingReport {
    pub tolerance_pp: f64,
    pub rows: Vec<CeilingRow>,
}

pub fn ceiling_report(
    cells: &[CeilingCell],
    tolerance_pp: f64,
) -> Result<CeilingReport, CeilingError> {
    let mut rows = Vec::with_capacity(cells.len());
    for cell in cells {
        let predicted = cell.predict()?;
        let observed = cell.observed();
        let residual_pp = observed.map(|o| residual(o, predicted));
        let pass = residual_pp.map(|r| r.abs() <= tolerance_pp);
        let verdict = match cell {
            CeilingCell::Vision { verdict, .. } | CeilingCell::StageShare { verdict, .. } => {
                verdict.clone()
            }
        };
        rows.push(CeilingRow {
            name: cell.name().to_string(),
            predicted,
            observed,
            residual_pp,
            pass,
            verdict,
        });
    }
    Ok(CeilingReport {
        tolerance_pp,
        rows,
    })
}

impl CeilingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,predicted,observed,residual_pp,pass,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{},{},{},{}\n",
                r.name,
                r.predicted,
                r.observed.map_or(String::new(), |v| format!("{v:.3}")),
                r.residual_pp.map_or(String::new(), |v| format!("{v:+.1}")),
                r.pass.map_or(String::new(), |p| p.to_string()),
                r.verdict
            ));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| Cell | Predicted | Observed | Residual (pp) | Pass | Verdict |\n|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {:.3} | {} | {} | {} | {} |\n",
                r.name,
                r.predicted,
                r.observed.map_or("-".into(), |v| format!("{v:.3}")),
                r.residual_pp.map_or("-".into(), |v| format!("{v:+.1}")),
                r.pass.map_or("-".into(), |p| if p { "pass".into() } else { "miss".to_string() }),
                r.verdict
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_e2e_limit_is_inverse_fixed_share() {
        assert!((ideal_e2e(0.5, 1e9).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn ideal_e2e_passthrough_when_nothing_fixed() {
        assert!((ideal_e2e(0.0, 3.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_e2e_half_fixed_double_speed() {
        assert!((ideal_e2e(0.5, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_e2e_rejects_bad_domain() {
        assert!(ideal_e2e(1.5, 2.0).is_err());
        assert!(ideal_e2e(0.5, 0.0).is_err());
    }

    #[test]
    fn scatterback_matches_published_cells() {
        assert!((scatterback_pred(0.154, 0.413).unwrap() - 1.068).abs() < 0.001);
        assert!((scatterback_pred(0.452, 0.471).unwrap() - 1.271).abs() < 0.001);
    }

    #[test]
    fn scatterback_no_share_no_gain() {
        assert_eq!(scatterback_pred(0.0, 0.9).unwrap(), 1.0);
    }

    #[test]
    fn scatterback_rejects_saturated_product() {
        assert!(scatterback_pred(1.0, 1.0).is_err());
    }

    #[test]
    fn residual_in_percentage_points() {
        assert!((residual(1.113, 1.068) - 4.5).abs() < 1e-9);
        assert!((residual(1.042, 1.028) - 1.4).abs() < 1e-9);
        assert_eq!(residual(1.3, 1.3), 0.0);
    }

    #[test]
    fn report_flags_pass_and_miss() {
        let cells = vec![
            CeilingCell::Vision {
                name: "clean".into(),
                v_share: 0.154,
                v_red: 0.413,
                observed: Some(1.113),
                verdict: "clean".into(),
            },
            CeilingCell::Vision {
                name: "advisory".into(),
                v_share: 0.452,
                v_red: 0.471,
                observed: Some(1.407),
                verdict: "advisory".into(),
            },
            CeilingCell::StageShare {
                name: "no-observation".into(),
                f_fixed: 0.5,
                s: 2.0,
                observed: None,
                verdict: String::new(),
            },
        ];
        let report = ceiling_report(&cells, 5.0).unwrap();
        assert_eq!(report.rows[0].pass, Some(true));
        assert_eq!(report.rows[1].pass, Some(false));
        assert_eq!(report.rows[2].pass, None);
        assert!(report.rows[2].residual_pp.is_none());
    }

    #[test]
    fn empty_report_renders_header_only() {
        let report = ceiling_report(&[], 5.0).unwrap();
        assert_eq!(report.to_csv().lines().count(), 1);
        assert_eq!(report.to_markdown().lines().count(), 2);
    }
}
