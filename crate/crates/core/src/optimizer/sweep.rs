use std::io::Write;

use serde::Serialize;

use super::{balanced_partition, estimate_bn2, refine_with_support, OptimizerConfig, Space};
use crate::error::{Error, Result};

/// `n * B_n^2` of the regular tetrahedron configuration, `2 - 2 sqrt(1/3)`.
pub fn tetrahedral_level() -> f64 {
    2.0 - 2.0 * (1.0_f64 / 3.0).sqrt()
}

/// Tolerance of the tetrahedral check for `n` divisible by 4.
pub const TETRAHEDRAL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub space: Space,
    pub best_value: f64,
    pub n_times_value: f64,
    /// Support of the final (refined) certificate.
    pub multiplicities: Vec<usize>,
    /// Support of the best restart before refinement.
    pub estimate_multiplicities: Vec<usize>,
    pub restarts_converged: usize,
    pub restarts: usize,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(n: usize, space: Space, err: &Error) -> Self {
        SweepRow {
            n,
            space,
            best_value: f64::NAN,
            n_times_value: f64::NAN,
            multiplicities: Vec::new(),
            estimate_multiplicities: Vec::new(),
            restarts_converged: 0,
            restarts: 0,
            error: Some(err.to_string()),
        }
    }

    /// `"pass"`/`"fail"` for `n` divisible by 4, empty otherwise.
    pub fn tetrahedral_check(&self) -> &'static str {
        if !self.n.is_multiple_of(4) || self.space != Space::Spatial {
            ""
        } else if (self.n_times_value - tetrahedral_level()).abs() <= TETRAHEDRAL_TOL {
            "pass"
        } else {
            "fail"
        }
    }
}

fn sweep_one(n: usize, space: Space, template: &OptimizerConfig) -> Result<SweepRow> {
    let config = OptimizerConfig { n, space, ..template.clone() };
    let estimate = estimate_bn2(&config)?;
    let schedule = config.schedule();
    let k = space.support_size();

    let mut candidates = Vec::new();
    let detected = estimate.multiplicities();
    if detected.len() == k && estimate.support.iter().all(|c| c.length > 0.0) {
        candidates.push(detected.clone());
    }
    if n >= k {
        let balanced = balanced_partition(n, k);
        if !candidates.contains(&balanced) {
            candidates.push(balanced);
        }
    }
    let mut report = estimate.clone();
    for m in &candidates {
        report = refine_with_support(&report, m, &schedule)?;
    }
    Ok(SweepRow {
        n,
        space,
        best_value: report.best_value,
        n_times_value: report.n_times_value,
        multiplicities: report.multiplicities(),
        estimate_multiplicities: detected,
        restarts_converged: report.restarts_converged(),
        restarts: report.restarts.len(),
        error: None,
    })
}

/// Estimates and refines `B_n^2` for every `n` in `n_min..=n_max`. A failure
/// for one `n` is recorded in its row and the sweep continues.
pub fn sweep(n_min: usize, n_max: usize, space: Space, template: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    if n_min < 3 || n_min > n_max {
        return Err(Error::invalid(format!("need 3 ≤ n_min ≤ n_max, got {n_min}..{n_max}")));
    }
    Ok((n_min..=n_max)
        .map(|n| sweep_one(n, space, template).unwrap_or_else(|e| SweepRow::failed(n, space, &e)))
        .collect())
}

/// Formats `x` with `digits` significant digits in positional notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return "NaN".to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    // exponent after rounding, so 0.9999999999 is treated as 1
    let sci = format!("{:.*e}", digits - 1, x);
    let magnitude: i64 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent");
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn join(m: &[usize]) -> String {
    m.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes the sweep table as CSV. With `tetrahedral_check`, a trailing
/// column flags rows with `n` divisible by 4.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W, tetrahedral_check: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n", "space", "best_value", "n_times_value", "multiplicities", "restarts_converged"];
    if tetrahedral_check {
        header.push("tetrahedral_check");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.n.to_string(),
            r.space.to_string(),
            format_significant(r.best_value, 9),
            format_significant(r.n_times_value, 9),
            join(&r.multiplicities),
            r.restarts_converged.to_string(),
        ];
        if tetrahedral_check {
            rec.push(r.tetrahedral_check().to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
