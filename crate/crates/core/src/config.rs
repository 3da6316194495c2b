//! JSON run configuration and the built-in figure presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closed_form::TwoGroupParams;
use crate::energy::{ClampMode, EnergyModel};
use crate::error::{Error, Result};
use crate::hardware::{HardwareConstants, HardwareKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: TwoGroupParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<HardwareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub model_q: EnergyModel,
    pub model_c: EnergyModel,
    /// Energy budget for a single constrained equilibrium.
    #[serde(default, rename = "cap_E", skip_serializing_if = "Option::is_none")]
    pub cap_e: Option<f64>,
    #[serde(default = "default_mode")]
    pub mode: ClampMode,
}

fn default_mode() -> ClampMode {
    ClampMode::PaperClamp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareConfig {
    #[serde(default = "default_quantum_kinds")]
    pub quantum_kinds: Vec<HardwareKind>,
    #[serde(default = "default_classical_kind")]
    pub classical_kind: HardwareKind,
    #[serde(default)]
    pub constants: HardwareConstants,
    /// Search bracket `[lo, hi]` for the critical scale. Without one the
    /// search starts at `[1e3, 1e4]` and widens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
}

fn default_quantum_kinds() -> Vec<HardwareKind> {
    vec![HardwareKind::Rydberg, HardwareKind::IonTrap]
}

fn default_classical_kind() -> HardwareKind {
    HardwareKind::ClassicalHpc
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            quantum_kinds: default_quantum_kinds(),
            classical_kind: default_classical_kind(),
            constants: HardwareConstants::default(),
            bracket: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "cap_E")]
    CapE,
    #[serde(rename = "n_q")]
    NQ,
    /// Shared demand intercept `a_q = a_c = a`.
    #[serde(rename = "a")]
    A,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::CapE => "cap_E",
            SweepVariable::NQ => "n_q",
            SweepVariable::A => "a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Config(format!(
                "grid start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err(Error::Config(format!(
                "log grid needs positive endpoints, got start {}",
                self.start
            )));
        }
        Ok(())
    }

    /// Grid values in increasing order. Both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        let lerp = |lo: f64, hi: f64, k: usize| (lo * (last - k as f64) + hi * k as f64) / last;
        let mut v: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..self.points).map(|k| lerp(self.start, self.stop, k)).collect(),
            Spacing::Log => {
                let (lo, hi) = (self.start.log10(), self.stop.log10());
                (0..self.points).map(|k| 10f64.powf(lerp(lo, hi, k))).collect()
            }
        };
        v[0] = self.start;
        v[self.points - 1] = self.stop;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected fig1, fig2 or fig3)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn config(&self) -> RunConfig {
        let unit_energy = EnergyConfig {
            model_q: EnergyModel::log_power(1.0, 1.0).expect("valid"),
            model_c: EnergyModel::power_law(1.0, 1.0).expect("valid"),
            cap_e: None,
            mode: ClampMode::CapSaturated,
        };
        let fig1_market = TwoGroupParams {
            n_q: 1,
            n_c: 1,
            a_q: 10.0,
            a_c: 10.0,
            theta_q: 3.0,
            theta_c: 2.0,
            gamma_qq: 2.0,
            gamma_cc: 2.0,
            gamma_qc: 1.0,
        };
        match self {
            Preset::Fig1 => RunConfig {
                market: fig1_market,
                energy: Some(EnergyConfig {
                    cap_e: Some(1.0),
                    ..unit_energy
                }),
                hardware: None,
                sweep: Some(SweepConfig {
                    variable: SweepVariable::CapE,
                    grid: Grid {
                        spacing: Spacing::Linear,
                        start: 0.1,
                        stop: 4.0,
                        points: 391,
                    },
                }),
                output: OutputConfig::default(),
            },
            Preset::Fig2 => RunConfig {
                market: fig1_market.with_intercept(30.0),
                energy: Some(unit_energy),
                hardware: None,
                sweep: Some(SweepConfig {
                    variable: SweepVariable::NQ,
                    grid: Grid {
                        spacing: Spacing::Linear,
                        start: 1.0,
                        stop: 20.0,
                        points: 20,
                    },
                }),
                output: OutputConfig::default(),
            },
            Preset::Fig3 => RunConfig {
                market: TwoGroupParams {
                    n_q: 10,
                    n_c: 10,
                    a_q: 1e13,
                    a_c: 1e13,
                    theta_q: 2.0,
                    theta_c: 2.0,
                    gamma_qq: 2.0,
                    gamma_cc: 2.0,
                    gamma_qc: 0.1,
                },
                energy: None,
                hardware: Some(HardwareConfig::default()),
                sweep: Some(SweepConfig {
                    variable: SweepVariable::A,
                    grid: Grid {
                        spacing: Spacing::Log,
                        start: 1e2,
                        stop: 1e22,
                        points: 201,
                    },
                }),
                output: OutputConfig::default(),
            },
        }
    }
}

impl RunConfig {
    /// Parses a JSON document; errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.market
            .validate()
            .map_err(|e| Error::Config(format!("market: {e}")))?;
        if let Some(energy) = &self.energy {
            energy
                .model_q
                .validate()
                .map_err(|e| Error::Config(format!("energy.model_q: {e}")))?;
            energy
                .model_c
                .validate()
                .map_err(|e| Error::Config(format!("energy.model_c: {e}")))?;
            if let Some(e) = energy.cap_e {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(Error::Config(format!("energy.cap_E = {e} must be positive")));
                }
            }
        }
        if let Some(hw) = &self.hardware {
            if hw.quantum_kinds.is_empty() || hw.quantum_kinds.iter().any(|k| !k.is_quantum()) {
                return Err(Error::Config(
                    "hardware.quantum_kinds must list one or more of rydberg, ion_trap".into(),
                ));
            }
            if hw.classical_kind.is_quantum() {
                return Err(Error::Config("hardware.classical_kind must be classical_hpc".into()));
            }
            for kind in HardwareKind::ALL {
                hw.constants
                    .model(kind)
                    .map_err(|e| Error::Config(format!("hardware.constants: {e}")))?;
            }
            if let Some([lo, hi]) = hw.bracket {
                if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                    return Err(Error::Config(format!(
                        "hardware.bracket [{lo}, {hi}] must satisfy 0 < lo < hi"
                    )));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            sweep
                .grid
                .validate()
                .map_err(|e| Error::Config(format!("sweep.grid: {e}")))?;
            match sweep.variable {
                SweepVariable::NQ => {
                    if sweep.grid.start < 1.0 {
                        return Err(Error::Config("sweep over n_q must start at 1 or above".into()));
                    }
                    if let Some(v) = sweep.grid.values().into_iter().find(|v| (v - v.round()).abs() > 1e-9) {
                        return Err(Error::Config(format!("sweep over n_q hits non-integer value {v}")));
                    }
                }
                SweepVariable::CapE | SweepVariable::A => {
                    if !(sweep.grid.start > 0.0) {
                        return Err(Error::Config(format!(
                            "sweep over {} needs positive values",
                            sweep.variable.name()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
