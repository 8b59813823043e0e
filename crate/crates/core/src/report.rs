//! Machine-readable verification reports.
//!
//! A report is a flat list of named checks, each carrying the maximum
//! and mean residual observed, the tolerance it was judged against and
//! the resulting verdict. Aggregation is deterministic: checks appear
//! in the order they were recorded.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub seed: u64,
    pub samples: usize,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, samples: usize) -> Self {
        VerificationReport {
            schema: 1,
            suite: suite.to_string(),
            checks: Vec::new(),
            pass: true,
            seed,
            samples,
        }
    }

    /// Record a residual check: passes when `max <= tol`.
    pub fn check_max(&mut self, name: &str, max: f64, mean: f64, tol: f64) {
        let pass = max.is_finite() && max <= tol;
        self.push(CheckRecord {
            name: name.to_string(),
            max,
            mean,
            tol,
            pass,
        });
    }

    /// Record a detection check: passes when `max >= tol`, i.e. the
    /// quantity is required to be visibly nonzero (falsifier floors).
    pub fn check_floor(&mut self, name: &str, max: f64, mean: f64, tol: f64) {
        let pass = max.is_finite() && max >= tol;
        self.push(CheckRecord {
            name: name.to_string(),
            max,
            mean,
            tol,
            pass,
        });
    }

    /// Record a check whose verdict was decided by the caller.
    pub fn check_verdict(&mut self, name: &str, max: f64, mean: f64, tol: f64, pass: bool) {
        self.push(CheckRecord {
            name: name.to_string(),
            max,
            mean,
            tol,
            pass,
        });
    }

    /// Record a descriptive flag: the per-check verdict states whether
    /// `max <= tol`, but a clear flag is a property, not a failure, so
    /// the overall verdict is left alone. Consumers that require the
    /// property re-assert it with `check_max`.
    pub fn flag(&mut self, name: &str, max: f64, mean: f64, tol: f64) {
        self.checks.push(CheckRecord {
            name: name.to_string(),
            max,
            mean,
            tol,
            pass: max.is_finite() && max <= tol,
        });
    }

    fn push(&mut self, rec: CheckRecord) {
        self.pass &= rec.pass;
        self.checks.push(rec);
    }
}

/// Running max/mean accumulator for residual streams.
#[derive(Clone, Copy, Debug, Default)]
pub struct Residual {
    pub max: f64,
    sum: f64,
    count: usize,
}

impl Residual {
    pub fn new() -> Self {
        Residual::default()
    }

    pub fn record(&mut self, value: f64) {
        let v = value.abs();
        if v > self.max || !self.max.is_finite() {
            self.max = v;
        }
        self.sum += v;
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}
