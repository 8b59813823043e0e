//! Configuration schema and validation for the verification suites.
//!
//! Configs are JSON with a versioned schema:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "suite": "walker-hk",
//!   "params": { "a": "sin(z)", "b": "t", "c": "0" },
//!   "domain": { "min": [-1, -1, -1, -1], "max": [1, 1, 1, 1] },
//!   "samples": 200,
//!   "seed": 7,
//!   "tolerances": { "nijenhuis J1": 1e-7 }
//! }
//! ```
//!
//! Every field except `schema` is optional: the suite name may come
//! from the command line instead (and must agree when both are given),
//! and each suite supplies its own domain and parameter defaults.
//! `tolerances` overrides the tolerance of individual checks by name.

use parahyper::{DomainBox, Error, Result};
use serde::Deserialize;
use serde_json::Value;
use std::collections::BTreeMap;

pub const SUITES: [&str; 8] = [
    "walker-pc",
    "walker-hk",
    "inoue-splus",
    "inoue-sminus",
    "kamada-torus",
    "kamada-kodaira",
    "algebra",
    "custom",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    min: [f64; 4],
    max: [f64; 4],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    #[serde(default)]
    suite: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    #[serde(default)]
    domain: Option<RawDomain>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub suite: String,
    pub params: BTreeMap<String, Value>,
    /// None means "use the suite's default domain".
    pub domain: Option<DomainBox>,
    pub samples: usize,
    pub seed: u64,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Global tolerance override from `--tol`.
    pub global_tol: Option<f64>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

fn invalid(message: String) -> Error {
    Error::InvalidParams { message }
}

impl SuiteConfig {
    /// Parse and validate a config document against the suite named on
    /// the command line. `text` is the raw JSON; pass "{\"schema\":1}"
    /// when no config file was given.
    pub fn resolve(suite_arg: &str, text: &str, over: Overrides) -> Result<SuiteConfig> {
        if !SUITES.contains(&suite_arg) {
            return Err(invalid(format!(
                "unknown suite {suite_arg:?}; expected one of {}",
                SUITES.join(", ")
            )));
        }
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| invalid(format!("config parse error: {e}")))?;
        if raw.schema != 1 {
            return Err(invalid(format!(
                "unsupported config schema {}; this build reads schema 1",
                raw.schema
            )));
        }
        if let Some(s) = &raw.suite {
            if s != suite_arg {
                return Err(invalid(format!(
                    "config names suite {s:?} but the command line asked for {suite_arg:?}"
                )));
            }
        }
        let samples = over.samples.or(raw.samples).unwrap_or(200);
        if samples == 0 {
            return Err(invalid("sample count must be at least 1".into()));
        }
        let domain = match raw.domain {
            None => None,
            Some(d) => Some(DomainBox::new(d.min, d.max)?),
        };
        for (name, t) in &raw.tolerances {
            if !(t.is_finite() && *t > 0.0) {
                return Err(invalid(format!(
                    "tolerance override {name:?} must be finite and positive, got {t}"
                )));
            }
        }
        if let Some(t) = over.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!(
                    "--tol must be finite and positive, got {t}"
                )));
            }
        }
        Ok(SuiteConfig {
            suite: suite_arg.to_string(),
            params: raw.params,
            domain,
            samples,
            seed: over.seed.or(raw.seed).unwrap_or(0),
            tolerances: raw.tolerances,
            global_tol: over.tol,
        })
    }

    // ----- typed parameter accessors -------------------------------

    pub fn str_param(&self, name: &str, default: &str) -> Result<String> {
        match self.params.get(name) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(invalid(format!("param {name:?} must be a string, got {v}"))),
        }
    }

    pub fn f64_param(&self, name: &str, default: f64) -> Result<f64> {
        match self.params.get(name) {
            None => Ok(default),
            Some(Value::Number(n)) => n
                .as_f64()
                .ok_or_else(|| invalid(format!("param {name:?} is not a finite number"))),
            Some(v) => Err(invalid(format!("param {name:?} must be a number, got {v}"))),
        }
    }

    pub fn i64_param(&self, name: &str, default: i64) -> Result<i64> {
        match self.params.get(name) {
            None => Ok(default),
            Some(Value::Number(n)) => n
                .as_i64()
                .ok_or_else(|| invalid(format!("param {name:?} must be an integer"))),
            Some(v) => Err(invalid(format!(
                "param {name:?} must be an integer, got {v}"
            ))),
        }
    }

    pub fn bool_param(&self, name: &str) -> Result<Option<bool>> {
        match self.params.get(name) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(v) => Err(invalid(format!(
                "param {name:?} must be a boolean, got {v}"
            ))),
        }
    }

    /// Complex number given as `[re, im]` or as a plain real number.
    pub fn complex_param(&self, name: &str, default: [f64; 2]) -> Result<[f64; 2]> {
        match self.params.get(name) {
            None => Ok(default),
            Some(Value::Number(n)) => {
                let re = n
                    .as_f64()
                    .ok_or_else(|| invalid(format!("param {name:?} is not finite")))?;
                Ok([re, 0.0])
            }
            Some(v) => {
                let pair: [f64; 2] = serde_json::from_value(v.clone()).map_err(|_| {
                    invalid(format!("param {name:?} must be [re, im] or a number, got {v}"))
                })?;
                Ok(pair)
            }
        }
    }

    /// Fixed-length list of expression strings.
    pub fn str_array_param(&self, name: &str, len: usize) -> Result<Option<Vec<String>>> {
        match self.params.get(name) {
            None => Ok(None),
            Some(v) => {
                let list: Vec<String> = serde_json::from_value(v.clone()).map_err(|_| {
                    invalid(format!("param {name:?} must be a list of strings, got {v}"))
                })?;
                if list.len() != len {
                    return Err(invalid(format!(
                        "param {name:?} must have {len} entries, got {}",
                        list.len()
                    )));
                }
                Ok(Some(list))
            }
        }
    }

    /// List of 4-vectors (for declared periods).
    pub fn vec4_list_param(&self, name: &str) -> Result<Vec<[f64; 4]>> {
        match self.params.get(name) {
            None => Ok(Vec::new()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                invalid(format!(
                    "param {name:?} must be a list of 4-component vectors, got {v}"
                ))
            }),
        }
    }

    /// 2×2 integer matrix.
    pub fn int_matrix_param(&self, name: &str, default: [[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                invalid(format!(
                    "param {name:?} must be a 2x2 integer matrix, got {v}"
                ))
            }),
        }
    }

    /// Reject parameter names the suite does not read, so typos fail
    /// loudly instead of silently running with defaults.
    pub fn allow_params(&self, allowed: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(invalid(format!(
                    "suite {:?} does not read param {key:?}; it accepts {}",
                    self.suite,
                    if allowed.is_empty() {
                        "no params".to_string()
                    } else {
                        allowed.join(", ")
                    }
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = SuiteConfig::resolve("algebra", "{\"schema\":1}", Overrides::default()).unwrap();
        assert_eq!(cfg.samples, 200);
        assert_eq!(cfg.seed, 0);
        assert!(cfg.domain.is_none());
    }

    #[test]
    fn schema_and_suite_are_enforced() {
        assert!(SuiteConfig::resolve("algebra", "{\"schema\":2}", Overrides::default()).is_err());
        assert!(SuiteConfig::resolve("bogus", "{\"schema\":1}", Overrides::default()).is_err());
        let text = r#"{"schema":1,"suite":"walker-pc"}"#;
        assert!(SuiteConfig::resolve("walker-hk", text, Overrides::default()).is_err());
        assert!(SuiteConfig::resolve("walker-pc", text, Overrides::default()).is_ok());
    }

    #[test]
    fn zero_samples_rejected() {
        let text = r#"{"schema":1,"samples":0}"#;
        assert!(SuiteConfig::resolve("algebra", text, Overrides::default()).is_err());
        let over = Overrides {
            samples: Some(0),
            ..Overrides::default()
        };
        assert!(SuiteConfig::resolve("algebra", "{\"schema\":1}", over).is_err());
    }

    #[test]
    fn overrides_win_over_file_values() {
        let text = r#"{"schema":1,"samples":50,"seed":3}"#;
        let over = Overrides {
            samples: Some(75),
            seed: Some(9),
            tol: None,
        };
        let cfg = SuiteConfig::resolve("algebra", text, over).unwrap();
        assert_eq!(cfg.samples, 75);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn param_accessors_check_types() {
        let text = r#"{"schema":1,"params":{"a":"x+y","n":[[2,1],[1,1]],"t":[0.5,1.25],"flag":true,"bad":"oops"}}"#;
        let cfg = SuiteConfig::resolve("custom", text, Overrides::default()).unwrap();
        assert_eq!(cfg.str_param("a", "0").unwrap(), "x+y");
        assert_eq!(cfg.str_param("missing", "1").unwrap(), "1");
        assert_eq!(cfg.int_matrix_param("n", [[1, 0], [0, 1]]).unwrap(), [[2, 1], [1, 1]]);
        assert_eq!(cfg.complex_param("t", [0.0, 0.0]).unwrap(), [0.5, 1.25]);
        assert_eq!(cfg.bool_param("flag").unwrap(), Some(true));
        assert!(cfg.f64_param("bad", 0.0).is_err());
        assert!(cfg.allow_params(&["a", "n", "t", "flag"]).is_err());
        assert!(cfg.allow_params(&["a", "n", "t", "flag", "bad"]).is_ok());
    }

    #[test]
    fn domain_must_be_a_box() {
        let text = r#"{"schema":1,"domain":{"min":[0,0,0,0],"max":[1,1,0,1]}}"#;
        assert!(SuiteConfig::resolve("algebra", text, Overrides::default()).is_err());
    }
}
