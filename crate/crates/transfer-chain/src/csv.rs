//! CSV emission for decay and derivative reports: RFC-4180 rows, `.` decimal
//! separator, scientific notation with 12+ significant digits, one
//! `#`-prefixed metadata header line.

use crate::decay::DecayBandReport;
use crate::free_energy::DerivativeEstimate;

pub fn format_value(v: f64) -> String {
    format!("{v:.12e}")
}

/// Rows: experiment, N, K1, K2, value, lower_band, upper_band.
pub fn decay_csv(experiment: &str, n: usize, reports: &[DecayBandReport], meta: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {meta}\n"));
    out.push_str("experiment,N,K1,K2,value,lower_band,upper_band\n");
    for r in reports {
        out.push_str(&format!(
            "{experiment},{n},{},{},{},{},{}\n",
            r.k1,
            r.k2,
            format_value(r.ratio),
            format_value(r.lower_band),
            format_value(r.upper_band),
        ));
    }
    out
}

/// Rows: N, k, estimate.
pub fn derivative_csv(rows: &[(usize, &[DerivativeEstimate])], meta: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {meta}\n"));
    out.push_str("N,k,estimate\n");
    for (n, ests) in rows {
        for e in *ests {
            out.push_str(&format!("{n},{},{}\n", e.order, format_value(e.value)));
        }
    }
    out
}
