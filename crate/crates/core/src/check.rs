//! Named residual checks with tolerances, emitted as JSON lines.

use serde::Serialize;

use crate::error::{validation, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a check; NaN residuals fail. Names must be unique.
    pub fn record(&mut self, name: impl Into<String>, residual: f64, tol: f64) -> Result<bool> {
        let name = name.into();
        if self.entries.iter().any(|e| e.name == name) {
            return Err(validation(format!("check '{name}' registered twice")));
        }
        let pass = residual.is_finite() && residual.abs() <= tol;
        self.entries.push(CheckEntry { name, residual, tol, pass });
        Ok(pass)
    }

    pub fn extend(&mut self, other: CheckReport) -> Result<()> {
        for e in other.entries {
            self.record(e.name, e.residual, e.tol)?;
        }
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("check entries serialize"));
            out.push('\n');
        }
        out
    }
}
