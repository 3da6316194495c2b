//! Parameter sweeps behind the three figures, and the table they produce.

use std::fmt::Write as _;

use serde::Serialize;

use crate::closed_form::{two_group_equilibrium, TwoGroupParams};
use crate::config::{EnergyConfig, HardwareConfig, RunConfig, SweepConfig, SweepVariable};
use crate::energy::constrained_equilibrium;
use crate::error::{Error, Result};
use crate::hardware::HardwareKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub values: Vec<f64>,
    /// Why some values are missing (`NaN`); `None` for a complete row.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![("tool".into(), format!("qcournot {}", env!("CARGO_PKG_VERSION")))],
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, values: Vec<f64>, flag: Option<String>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the header");
        self.rows.push(Row { values, flag });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    pub fn flagged_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.flag.is_some()).count()
    }

    /// `#`-prefixed metadata, a header, then one line per row in scientific
    /// notation with 17 significant digits. The last column is the row flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{},flag", self.columns.join(","));
        for row in &self.rows {
            for v in &row.values {
                let _ = write!(out, "{},", fmt_value(*v));
            }
            let flag = row.flag.as_deref().unwrap_or("");
            let _ = writeln!(out, "{}", csv_field(flag));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                for (c, v) in self.columns.iter().zip(&r.values) {
                    let v = serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into);
                    obj.insert(c.clone(), v);
                }
                obj.insert(
                    "flag".into(),
                    r.flag.clone().map_or(serde_json::Value::Null, Into::into),
                );
                serde_json::Value::Object(obj)
            })
            .collect();
        let meta: serde_json::Map<String, serde_json::Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), v.clone().into()))
            .collect();
        let doc = serde_json::json!({ "metadata": meta, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

pub fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn require_sweep(cfg: &RunConfig, variable: SweepVariable) -> Result<&SweepConfig> {
    match &cfg.sweep {
        Some(s) if s.variable == variable => Ok(s),
        Some(s) => Err(Error::Config(format!(
            "this sweep runs over {}, config sweeps {}",
            variable.name(),
            s.variable.name()
        ))),
        None => Err(Error::Config(format!("a sweep over {} is required", variable.name()))),
    }
}

fn require_energy(cfg: &RunConfig) -> Result<&EnergyConfig> {
    cfg.energy
        .as_ref()
        .ok_or_else(|| Error::Config("an energy section is required".into()))
}

fn table_for(cfg: &RunConfig, command: &str, columns: &[&str]) -> SweepTable {
    SweepTable::new(columns)
        .with_meta("command", command)
        .with_meta("config", cfg.to_json())
}

fn join_flags(flags: Vec<String>) -> Option<String> {
    if flags.is_empty() {
        None
    } else {
        Some(flags.join("; "))
    }
}

/// Constrained equilibrium across energy budgets, with the unconstrained
/// Nash profits as reference columns.
pub fn sweep_energy_constraint(cfg: &RunConfig) -> Result<SweepTable> {
    let sweep = require_sweep(cfg, SweepVariable::CapE)?;
    let energy = require_energy(cfg)?;
    let mut table = table_for(
        cfg,
        "sweep-energy",
        &[
            "E",
            "q_q_E",
            "q_c_E",
            "q_q_F",
            "q_c_F",
            "pi_q_F",
            "pi_c_F",
            "pi_q_star",
            "pi_c_star",
        ],
    )
    .with_meta("mode", energy.mode.name());
    for e in sweep.grid.values() {
        match constrained_equilibrium(&cfg.market, &energy.model_q, &energy.model_c, e, energy.mode) {
            Ok(c) => table.push(
                vec![
                    e,
                    c.cap_q,
                    c.cap_c,
                    c.q_q,
                    c.q_c,
                    c.pi_q,
                    c.pi_c,
                    c.nash.pi_q,
                    c.nash.pi_c,
                ],
                None,
            ),
            Err(err) => {
                let mut row = vec![f64::NAN; 9];
                row[0] = e;
                table.push(row, Some(err.to_string()));
            }
        }
    }
    Ok(table)
}

/// Per-firm equilibrium energy of each group as the quantum firm count grows.
pub fn sweep_ratio(cfg: &RunConfig) -> Result<SweepTable> {
    let sweep = require_sweep(cfg, SweepVariable::NQ)?;
    let energy = require_energy(cfg)?;
    let mut table = table_for(cfg, "sweep-ratio", &["n_q_over_n_c", "E_q", "E_c"]);
    for n in sweep.grid.values() {
        let p = TwoGroupParams {
            n_q: n.round() as usize,
            ..cfg.market
        };
        let ratio = p.n_q as f64 / p.n_c as f64;
        let eq = match two_group_equilibrium(&p) {
            Ok(eq) => eq,
            Err(err) => {
                table.push(vec![ratio, f64::NAN, f64::NAN], Some(err.to_string()));
                continue;
            }
        };
        let mut flags = Vec::new();
        let mut eval = |group: &str, model: &crate::energy::EnergyModel, q: f64| {
            model.power(q).unwrap_or_else(|e| {
                flags.push(format!("{group} group at q = {q:e}: {e}"));
                f64::NAN
            })
        };
        let e_q = eval("quantum", &energy.model_q, eq.q_q);
        let e_c = eval("classical", &energy.model_c, eq.q_c);
        table.push(vec![ratio, e_q, e_c], join_flags(flags));
    }
    Ok(table)
}

/// Equilibrium quantities and per-firm hardware energies across demand scales.
pub fn sweep_scale(cfg: &RunConfig) -> Result<SweepTable> {
    let sweep = require_sweep(cfg, SweepVariable::A)?;
    let hw: HardwareConfig = cfg
        .hardware
        .clone()
        .ok_or_else(|| Error::Config("a hardware section is required".into()))?;
    let models = [
        hw.constants.model(HardwareKind::Rydberg)?,
        hw.constants.model(HardwareKind::IonTrap)?,
        hw.constants.model(hw.classical_kind)?,
    ];
    let mut table = table_for(
        cfg,
        "sweep-scale",
        &["a", "q_q_star", "q_c_star", "E_rydberg", "E_ion", "E_classical"],
    );
    for a in sweep.grid.values() {
        let eq = match two_group_equilibrium(&cfg.market.with_intercept(a)) {
            Ok(eq) => eq,
            Err(err) => {
                let mut row = vec![f64::NAN; 6];
                row[0] = a;
                table.push(row, Some(err.to_string()));
                continue;
            }
        };
        let mut flags = Vec::new();
        let mut row = vec![a, eq.q_q, eq.q_c];
        for (model, (name, q)) in models
            .iter()
            .zip([("rydberg", eq.q_q), ("ion", eq.q_q), ("classical", eq.q_c)])
        {
            row.push(model.power(q).unwrap_or_else(|e| {
                flags.push(format!("{name}: {e}"));
                f64::NAN
            }));
        }
        table.push(row, join_flags(flags));
    }
    Ok(table)
}
