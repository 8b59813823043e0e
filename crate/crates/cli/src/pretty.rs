//! Human-readable rendering of report JSON.

use parahyper::VerificationReport;

/// Aligned table, one row per check.
pub fn render(report: &VerificationReport) -> String {
    let name_width = report
        .checks
        .iter()
        .map(|c| c.name.len())
        .max()
        .unwrap_or(5)
        .max("check".len());
    let mut out = String::new();
    out.push_str(&format!(
        "suite: {}    seed: {}    samples: {}    overall: {}\n",
        report.suite,
        report.seed,
        report.samples,
        verdict(report.pass)
    ));
    out.push_str(&format!(
        "{:<name_width$}  {:>12}  {:>12}  {:>12}  verdict\n",
        "check", "max", "mean", "tol"
    ));
    for c in &report.checks {
        out.push_str(&format!(
            "{:<name_width$}  {:>12}  {:>12}  {:>12}  {}\n",
            c.name,
            sci(c.max),
            sci(c.mean),
            sci(c.tol),
            verdict(c.pass)
        ));
    }
    out
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn sci(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.3e}")
    }
}
