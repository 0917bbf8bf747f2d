//! Run configuration and the common machine-readable report schema.
//!
//! Every pipeline emits reports in one shape: a schema tag, the full
//! configuration (for reproducibility), a list of checks with residual,
//! tolerance and pass flag, and timing data kept in dedicated fields so
//! deterministic byte comparison can strip it. Complex numbers serialize as
//! decimal strings with explicit precision, never as binary floats.

use serde::{Deserialize, Serialize};

use crate::ode::TransportConfig;

pub const SCHEMA: &str = "equivmod-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Pretty,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "pretty" => Ok(OutputFormat::Pretty),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Tolerance classes: single-formula checks tolerate rounding only,
/// composite pipelines carry a measured cancellation budget with 2x margin,
/// and the deck/covering pipelines add the continuation slack.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TolClass {
    Single,
    Pipeline,
    Deck,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub precision_bits: usize,
    pub jet_order: usize,
    /// q-series terms retained.
    pub truncation: usize,
    /// ODE step cap relative to the clearance radius.
    pub safety_factor: f64,
    /// Fixes all randomized probes; full determinism per seed.
    pub seed: u64,
    pub format: OutputFormat,
    pub tol_single: Option<f64>,
    pub tol_pipeline: Option<f64>,
    pub tol_deck: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: crate::numerics::DEFAULT_PRECISION,
            jet_order: crate::numerics::DEFAULT_JET_ORDER,
            truncation: crate::qforms::DEFAULT_TRUNCATION,
            safety_factor: 0.25,
            seed: 42,
            format: OutputFormat::Json,
            tol_single: None,
            tol_pipeline: None,
            tol_deck: None,
        }
    }
}

impl RunConfig {
    pub fn tolerance(&self, class: TolClass) -> f64 {
        let p = self.precision_bits as i32;
        match class {
            TolClass::Single => self.tol_single.unwrap_or_else(|| 2f64.powi(-(p - 16))),
            TolClass::Pipeline => self.tol_pipeline.unwrap_or_else(|| 2f64.powi(-(p - 40))),
            TolClass::Deck => self.tol_deck.unwrap_or_else(|| 2f64.powi(-(p - 60))),
        }
    }

    pub fn transport(&self) -> TransportConfig {
        TransportConfig {
            safety_factor: self.safety_factor,
            ..TransportConfig::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub operation: String,
    pub inputs: serde_json::Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckSet {
    pub checks: Vec<Check>,
}

impl CheckSet {
    pub fn new() -> Self {
        CheckSet::default()
    }

    pub fn push(
        &mut self,
        operation: impl Into<String>,
        inputs: serde_json::Value,
        residual: f64,
        tolerance: f64,
    ) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(Check {
            operation: operation.into(),
            inputs,
            residual,
            tolerance,
            pass,
            note: None,
        });
        pass
    }

    /// An inverted check: passes when the residual EXCEEDS the floor
    /// (negative controls).
    pub fn push_exceeds(
        &mut self,
        operation: impl Into<String>,
        inputs: serde_json::Value,
        residual: f64,
        floor: f64,
    ) -> bool {
        let pass = residual > floor;
        self.checks.push(Check {
            operation: operation.into(),
            inputs,
            residual,
            tolerance: floor,
            pass,
            note: Some("pass requires residual > tolerance (negative control)".into()),
        });
        pass
    }

    pub fn note(&mut self, operation: impl Into<String>, inputs: serde_json::Value, text: String) {
        self.checks.push(Check {
            operation: operation.into(),
            inputs,
            residual: 0.0,
            tolerance: f64::INFINITY,
            pass: true,
            note: Some(text),
        });
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn worst(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.note.is_none())
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: CheckSet) {
        self.checks.extend(other.checks);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub values: serde_json::Value,
    /// Timing data; stripped for byte-determinism comparisons.
    pub wall_ms: f64,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: CheckSet) -> Self {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            config: config.clone(),
            pass: checks.pass(),
            checks: checks.checks,
            values: serde_json::Value::Null,
            wall_ms: 0.0,
        }
    }

    pub fn with_values(mut self, values: serde_json::Value) -> Self {
        self.values = values;
        self
    }

    pub fn with_wall_ms(mut self, ms: f64) -> Self {
        self.wall_ms = ms;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("operation,residual,tolerance,pass,note\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:e},{:e},{},{}\n",
                c.operation,
                c.residual,
                c.tolerance,
                c.pass,
                c.note.clone().unwrap_or_default().replace(',', ";")
            ));
        }
        out
    }

    pub fn to_pretty(&self) -> String {
        let mut out = format!("== {} ==\n", self.command);
        for c in &self.checks {
            let status = if c.pass { "pass" } else { "FAIL" };
            out.push_str(&format!(
                "  [{status}] {:<44} residual {:>12.3e}  tol {:>10.1e}{}\n",
                c.operation,
                c.residual,
                c.tolerance,
                c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.pass { "pass" } else { "FAIL" }
        ));
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Pretty => self.to_pretty(),
        }
    }
}

/// Strips volatile timing data for byte-determinism comparison.
pub fn strip_timings(serialized: &str) -> String {
    let mut out = String::with_capacity(serialized.len());
    for line in serialized.lines() {
        let t = line.trim_start();
        if t.starts_with("\"wall_ms\"") || t.starts_with("\"elapsed_s\"") {
            continue;
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_default_and_override() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.tolerance(TolClass::Single), 2f64.powi(-240));
        assert_eq!(cfg.tolerance(TolClass::Pipeline), 2f64.powi(-216));
        assert_eq!(cfg.tolerance(TolClass::Deck), 2f64.powi(-196));
        cfg.tol_single = Some(1e-10);
        assert_eq!(cfg.tolerance(TolClass::Single), 1e-10);
    }

    #[test]
    fn report_shapes() {
        let cfg = RunConfig::default();
        let mut cs = CheckSet::new();
        cs.push("demo", serde_json::json!({"z": "i"}), 1e-80, 1e-60);
        cs.push_exceeds("control", serde_json::Value::Null, 0.5, 1e-3);
        let r = Report::new("unit", &cfg, cs).with_wall_ms(12.0);
        assert!(r.pass);
        let j = r.to_json();
        assert!(j.contains("equivmod-report/1"));
        let stripped = strip_timings(&j);
        assert!(!stripped.contains("wall_ms"));
        assert!(r.to_csv().contains("demo"));
        assert!(r.to_pretty().contains("pass"));
    }
}
