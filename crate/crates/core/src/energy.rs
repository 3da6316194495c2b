//! Energy cost curves, per-firm quantity caps under an energy budget, and the
//! equilibrium that results once caps are imposed.

use serde::{Deserialize, Serialize};

use crate::closed_form::{expand_two_group, two_group_equilibrium, GroupEquilibrium, TwoGroupParams};
use crate::error::{Error, Result};

/// Relative tolerance for deciding that a quantity sits on its cap.
pub const BINDING_TOLERANCE: f64 = 1e-9;
/// Convergence threshold on the largest per-sweep change in best-response iteration.
pub const BEST_RESPONSE_TOLERANCE: f64 = 1e-10;
pub const BEST_RESPONSE_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    /// `beta * (log2 q)^exponent`, defined for `q > 1`.
    LogPower,
    /// `beta * q^exponent`, defined for `q > 0`.
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyModel {
    pub kind: EnergyKind,
    pub beta: f64,
    pub exponent: f64,
}

impl EnergyModel {
    pub fn new(kind: EnergyKind, beta: f64, exponent: f64) -> Result<Self> {
        let m = Self { kind, beta, exponent };
        m.validate()?;
        Ok(m)
    }

    pub fn log_power(beta: f64, exponent: f64) -> Result<Self> {
        Self::new(EnergyKind::LogPower, beta, exponent)
    }

    pub fn power_law(beta: f64, exponent: f64) -> Result<Self> {
        Self::new(EnergyKind::PowerLaw, beta, exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "energy beta = {} must be positive",
                self.beta
            )));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "energy exponent = {} must be positive",
                self.exponent
            )));
        }
        Ok(())
    }

    /// Energy per unit time needed to produce `q`.
    pub fn power(&self, q: f64) -> Result<f64> {
        self.validate()?;
        match self.kind {
            EnergyKind::LogPower => {
                if !(q > 1.0) {
                    return Err(Error::Domain(format!("log-power energy needs quantity > 1, got {q}")));
                }
                Ok(self.beta * q.log2().powf(self.exponent))
            }
            EnergyKind::PowerLaw => {
                if !(q > 0.0) {
                    return Err(Error::Domain(format!("power-law energy needs quantity > 0, got {q}")));
                }
                Ok(self.beta * q.powf(self.exponent))
            }
        }
    }

    /// Largest quantity whose energy draw fits in `e`. May be `+inf` when the
    /// cap overflows, which callers treat as non-binding.
    pub fn quantity_cap(&self, e: f64) -> Result<f64> {
        self.validate()?;
        if !(e > 0.0) {
            return Err(Error::Domain(format!("energy budget must be positive, got {e}")));
        }
        let scaled = (e / self.beta).powf(1.0 / self.exponent);
        Ok(match self.kind {
            EnergyKind::LogPower => scaled.exp2(),
            EnergyKind::PowerLaw => scaled,
        })
    }
}

/// How caps turn the unconstrained equilibrium into a constrained one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampMode {
    /// Each group independently takes `min(q*, q^E)`.
    PaperClamp,
    /// `q*` while neither cap binds; once either does, both groups produce at their caps.
    CapSaturated,
    /// Box-constrained best responses of every firm, iterated to a fixed point.
    IteratedBestResponse,
}

impl ClampMode {
    pub fn name(&self) -> &'static str {
        match self {
            ClampMode::PaperClamp => "paper_clamp",
            ClampMode::CapSaturated => "cap_saturated",
            ClampMode::IteratedBestResponse => "iterated_best_response",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedEquilibrium {
    pub cap_q: f64,
    pub cap_c: f64,
    pub q_q: f64,
    pub q_c: f64,
    pub pi_q: f64,
    pub pi_c: f64,
    pub binding_q: bool,
    pub binding_c: bool,
    pub mode: ClampMode,
    /// Per-firm quantities of the expanded model, quantum firms first.
    pub firms: Vec<f64>,
    /// Best-response sweeps used; zero for the closed-form modes.
    pub sweeps: usize,
    pub nash: GroupEquilibrium,
}

/// Group profits when every quantum firm produces `q_q` and every classical firm `q_c`.
pub fn group_profits(p: &TwoGroupParams, q_q: f64, q_c: f64) -> (f64, f64) {
    let (nq, nc) = (p.n_q as f64, p.n_c as f64);
    let pi_q = p.a_q * q_q - nc * p.gamma_qc * q_c * q_q - (p.theta_q + (nq - 1.0) * p.gamma_qq) * q_q * q_q;
    let pi_c = p.a_c * q_c - nq * p.gamma_qc * q_q * q_c - (p.theta_c + (nc - 1.0) * p.gamma_cc) * q_c * q_c;
    (pi_q, pi_c)
}

fn on_cap(q: f64, cap: f64) -> bool {
    cap.is_finite() && (q - cap).abs() <= BINDING_TOLERANCE * cap.abs()
}

pub fn constrained_equilibrium(
    p: &TwoGroupParams,
    model_q: &EnergyModel,
    model_c: &EnergyModel,
    e: f64,
    mode: ClampMode,
) -> Result<ConstrainedEquilibrium> {
    let nash = two_group_equilibrium(p)?;
    let cap_q = model_q.quantity_cap(e)?;
    let cap_c = model_c.quantity_cap(e)?;

    let (q_q, q_c, firms, sweeps) = match mode {
        ClampMode::PaperClamp => {
            let (q_q, q_c) = (nash.q_q.min(cap_q), nash.q_c.min(cap_c));
            (q_q, q_c, group_firms(p, q_q, q_c), 0)
        }
        ClampMode::CapSaturated => {
            let (q_q, q_c) = if nash.q_q <= cap_q && nash.q_c <= cap_c {
                (nash.q_q, nash.q_c)
            } else {
                (cap_q, cap_c)
            };
            (q_q, q_c, group_firms(p, q_q, q_c), 0)
        }
        ClampMode::IteratedBestResponse => {
            let (firms, sweeps) = best_response_fixed_point(p, cap_q, cap_c, &nash)?;
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            (mean(&firms[..p.n_q]), mean(&firms[p.n_q..]), firms, sweeps)
        }
    };

    let (pi_q, pi_c) = group_profits(p, q_q, q_c);
    Ok(ConstrainedEquilibrium {
        cap_q,
        cap_c,
        q_q,
        q_c,
        pi_q,
        pi_c,
        binding_q: on_cap(q_q, cap_q),
        binding_c: on_cap(q_c, cap_c),
        mode,
        firms,
        sweeps,
        nash,
    })
}

fn group_firms(p: &TwoGroupParams, q_q: f64, q_c: f64) -> Vec<f64> {
    let mut v = vec![q_q; p.n_q];
    v.resize(p.n_q + p.n_c, q_c);
    v
}

/// Gauss-Seidel over firms: `q_i <- clamp((a_i - sum_{j != i} gamma_ij q_j) / (2 theta_i), 0, cap_i)`.
fn best_response_fixed_point(
    p: &TwoGroupParams,
    cap_q: f64,
    cap_c: f64,
    nash: &GroupEquilibrium,
) -> Result<(Vec<f64>, usize)> {
    let m = expand_two_group(p)?;
    let n = m.n();
    let g = m.gamma();
    let cap = |i: usize| if i < p.n_q { cap_q } else { cap_c };
    let mut q: Vec<f64> = (0..n)
        .map(|i| {
            let start = if i < p.n_q { nash.q_q } else { nash.q_c };
            start.clamp(0.0, cap(i))
        })
        .collect();

    let mut last_step = f64::INFINITY;
    for sweep in 1..=BEST_RESPONSE_MAX_SWEEPS {
        last_step = 0.0;
        for i in 0..n {
            let rivals: f64 = (0..n).filter(|&j| j != i).map(|j| g.get(i, j) * q[j]).sum();
            let br = ((m.a()[i] - rivals) / (2.0 * m.theta()[i])).clamp(0.0, cap(i));
            last_step = last_step.max((br - q[i]).abs());
            q[i] = br;
        }
        if last_step < BEST_RESPONSE_TOLERANCE {
            return Ok((q, sweep));
        }
    }
    Err(Error::NoConvergence {
        iterations: BEST_RESPONSE_MAX_SWEEPS,
        last_step,
    })
}

/// Per-firm energy draw of each group at the unconstrained equilibrium.
pub fn equilibrium_energy(p: &TwoGroupParams, model_q: &EnergyModel, model_c: &EnergyModel) -> Result<(f64, f64)> {
    let eq = two_group_equilibrium(p)?;
    let e_q = model_q
        .power(eq.q_q)
        .map_err(|e| Error::Domain(format!("quantum group: equilibrium quantity q_q* = {}: {e}", eq.q_q)))?;
    let e_c = model_c
        .power(eq.q_c)
        .map_err(|e| Error::Domain(format!("classical group: equilibrium quantity q_c* = {}: {e}", eq.q_c)))?;
    Ok((e_q, e_c))
}
