//! The structured report written to stdout by every command.
//!
//! Schema (version 1), one JSON object:
//!
//! | field              | type            | meaning                                     |
//! |--------------------|-----------------|---------------------------------------------|
//! | `schema_version`   | integer         | bumped on incompatible changes              |
//! | `command`          | string          | subcommand name                             |
//! | `status`           | string          | `ok`, `budget-exceeded` or `verify-failed`  |
//! | `parameters`       | object          | effective inputs, defaults filled in        |
//! | `value`            | number or null  | headline number of the command              |
//! | `error`            | number or null  | its error estimate or standard error        |
//! | `samples_or_evals` | integer         | samples drawn or integrand evaluations      |
//! | `wall_time_s`      | number          | elapsed wall-clock seconds                  |
//! | `git_or_build_id`  | string          | crate version and git revision              |
//! | `seed`             | integer or null | RNG seed where one is used                  |
//! | `results`          | object          | command-specific detail                     |
//!
//! Floats are written in shortest round-trip form, so parsing the report
//! recovers every value bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const BUILD_ID: &str = concat!(
    env!("CARGO_PKG_NAME"),
    " ",
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("LEVY2_GIT_REV"),
    ")"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    BudgetExceeded,
    VerifyFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::BudgetExceeded => EXIT_BUDGET,
            Status::VerifyFailed => EXIT_VERIFY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub status: Status,
    pub parameters: BTreeMap<String, Value>,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub samples_or_evals: u64,
    pub wall_time_s: f64,
    pub git_or_build_id: String,
    pub seed: Option<u64>,
    pub results: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            status: Status::Ok,
            parameters: BTreeMap::new(),
            value: None,
            error: None,
            samples_or_evals: 0,
            wall_time_s: 0.0,
            git_or_build_id: BUILD_ID.to_string(),
            seed: None,
            results: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), to_value(v));
        self
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.results.insert(key.to_string(), to_value(v));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Non-finite floats become `null`.
fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_losslessly() {
        let mut r = RunReport::new("compute");
        r.value = Some(3.492_779_838_657_029);
        r.error = Some(1.234_567_890_123_456_7e-13);
        r.wall_time_s = 0.1;
        r.seed = Some(u64::MAX);
        r.param("tol", 1e-5).result("levy", 1.132_223_868_457_490_6);
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.value.unwrap().to_bits(), r.value.unwrap().to_bits());
    }

    #[test]
    fn non_finite_values_become_null() {
        let mut r = RunReport::new("oracle-inner");
        r.result("gap", f64::NAN);
        assert_eq!(r.results["gap"], Value::Null);
        assert!(RunReport::from_json(&r.to_json()).is_ok());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::BudgetExceeded.exit_code(), 2);
        assert_eq!(Status::VerifyFailed.exit_code(), 3);
    }
}
