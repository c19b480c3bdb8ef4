//! Named checks and the run report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::output::Output;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    /// measured error metric; the check passes when value <= tolerance and
    /// every side condition in `detail` holds
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub name: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub threads: usize,
    pub grid: BTreeMap<String, String>,
    pub checks: Vec<CheckRow>,
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(command: &str, name: &str, out: &Output) -> Self {
        Self {
            command: command.into(),
            name: name.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: out.seed,
            config_sha256: out.hash.clone(),
            threads: rayon::current_num_threads(),
            grid: BTreeMap::new(),
            checks: vec![],
            timings: BTreeMap::new(),
        }
    }

    pub fn grid(&mut self, key: &str, value: impl ToString) {
        self.grid.insert(key.into(), value.to_string());
    }

    pub fn push(&mut self, c: CheckRow) {
        println!("{}", c.line());
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn time(&mut self, key: &str, since: Instant) {
        self.timings.insert(key.into(), since.elapsed().as_secs_f64());
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn write(&self, out: &Output) -> anyhow::Result<()> {
        out.write("report.toml", &self.to_toml())?;
        Ok(())
    }
}

impl CheckRow {
    /// `value <= tolerance && extra`.
    pub fn new(name: &str, value: f64, tolerance: f64, extra: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), value, tolerance, pass: extra && value <= tolerance, seconds: 0.0, detail: detail.into() }
    }

    pub fn timed(mut self, since: Instant) -> Self {
        self.seconds = since.elapsed().as_secs_f64();
        self
    }

    /// Fail unless the elapsed time stays under `limit` seconds.
    pub fn within(mut self, limit: f64) -> Self {
        if self.seconds > limit {
            self.pass = false;
            self.detail = format!("{}; runtime {:.1}s over the {limit}s budget", self.detail, self.seconds);
        }
        self
    }

    pub fn failed(name: &str, err: &anyhow::Error) -> Self {
        Self { name: name.into(), value: f64::NAN, tolerance: f64::NAN, pass: false, seconds: 0.0, detail: format!("error: {err:#}") }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} value={:.6e} tol={:.3e} time={:.2}s {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(CheckRow::new("a", 1.0, 1.0, true, "").pass);
        assert!(!CheckRow::new("a", 1.0, 0.5, true, "").pass);
        assert!(!CheckRow::new("a", 0.0, 0.5, false, "").pass);
        assert!(!CheckRow::new("a", f64::NAN, 0.5, true, "").pass);
        let mut c = CheckRow::new("a", 0.0, 1.0, true, "");
        c.seconds = 3.0;
        assert!(!c.within(1.0).pass);
    }

    #[test]
    fn report_serializes_non_finite_values() {
        let out = Output::new(None, "h".into(), 1).unwrap();
        let mut r = RunReport::new("x", "n", &out);
        r.checks.push(CheckRow::failed("c", &anyhow::anyhow!("boom")));
        let t = r.to_toml();
        assert!(t.contains("nan"));
    }
}
