//! Command implementations shared by the binary and the C interface.

use std::fmt::Write as _;
use std::path::Path;

use crate::closed_form::{profitability_margin, two_group_equilibrium};
use crate::config::{OutputFormat, Preset, RunConfig};
use crate::energy::constrained_equilibrium;
use crate::error::{Error, Result};
use crate::hardware::{critical_scale, critical_scale_expanding, energies_at_scale, CriticalScale};
use crate::sweep::{fmt_value, sweep_energy_constraint, sweep_ratio, sweep_scale, SweepTable};
use crate::verify::{oracle_residual, run_verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_NO_CROSSING: i32 = 4;

/// Starting bracket for the critical-scale search when the config gives none.
pub const DEFAULT_SCALE_BRACKET: [f64; 2] = [1e3, 1e4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Equilibrium,
    SweepEnergy,
    SweepRatio,
    SweepScale,
    Threshold,
    Verify,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Equilibrium,
        Command::SweepEnergy,
        Command::SweepRatio,
        Command::SweepScale,
        Command::Threshold,
        Command::Verify,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::SweepEnergy => "sweep-energy",
            Command::SweepRatio => "sweep-ratio",
            Command::SweepScale => "sweep-scale",
            Command::Threshold => "threshold",
            Command::Verify => "verify",
        }
    }

    /// Sweeps produce a table as their main result; the other commands a report.
    pub fn table_is_primary(&self) -> bool {
        matches!(self, Command::SweepEnergy | Command::SweepRatio | Command::SweepScale)
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown command {name:?}")))
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParams(_) | Error::InvalidBracket { .. } => EXIT_CONFIG,
        Error::NoSignChange { .. } => EXIT_NO_CROSSING,
        Error::DimensionMismatch { .. }
        | Error::SingularMatrix { .. }
        | Error::DegenerateDenominator { .. }
        | Error::Domain(_)
        | Error::NoConvergence { .. }
        | Error::NotFinite { .. } => EXIT_DEGENERATE,
    }
}

/// Resolves `--config` / `--preset` into one validated config.
pub fn load_config(path: Option<&Path>, preset: Option<&str>) -> Result<Option<RunConfig>> {
    match (path, preset) {
        (Some(_), Some(_)) => Err(Error::Config("give either --config or --preset, not both".into())),
        (Some(p), None) => RunConfig::from_file(p).map(Some),
        (None, Some(name)) => Ok(Some(Preset::parse(name)?.config())),
        (None, None) => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Human-readable summary.
    pub report: String,
    pub table: Option<SweepTable>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render_table(&self, format: OutputFormat) -> Option<String> {
        self.table.as_ref().map(|t| match format {
            OutputFormat::Csv => t.to_csv(),
            OutputFormat::Json => t.to_json(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

pub fn execute(command: Command, config: Option<&RunConfig>, opts: RunOptions) -> Result<Outcome> {
    if command == Command::Verify {
        return Ok(verify(opts));
    }
    let cfg = config.ok_or_else(|| Error::Config(format!("{} needs --config or --preset", command.name())))?;
    match command {
        Command::Equilibrium => run_equilibrium(cfg),
        Command::SweepEnergy => sweep_outcome(sweep_energy_constraint(cfg)?),
        Command::SweepRatio => sweep_outcome(sweep_ratio(cfg)?),
        Command::SweepScale => sweep_outcome(sweep_scale(cfg)?),
        Command::Threshold => find_threshold(cfg),
        Command::Verify => unreachable!(),
    }
}

fn sweep_outcome(table: SweepTable) -> Result<Outcome> {
    let report = format!("{} rows, {} flagged", table.rows.len(), table.flagged_rows());
    Ok(Outcome {
        report,
        table: Some(table),
        exit_code: EXIT_OK,
    })
}

pub fn run_equilibrium(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.market;
    let eq = two_group_equilibrium(p)?;
    let mut r = String::new();
    let _ = writeln!(
        r,
        "quantities   q_q* = {}  q_c* = {}",
        fmt_value(eq.q_q),
        fmt_value(eq.q_c)
    );
    let _ = writeln!(
        r,
        "prices       p_q* = {}  p_c* = {}",
        fmt_value(eq.p_q),
        fmt_value(eq.p_c)
    );
    let _ = writeln!(
        r,
        "profits      pi_q* = {}  pi_c* = {}",
        fmt_value(eq.pi_q),
        fmt_value(eq.pi_c)
    );
    let _ = writeln!(r, "denominator  {}", fmt_value(eq.denominator));
    let _ = writeln!(r, "nonnegative  {}", eq.all_nonnegative());
    let oracle = oracle_residual(p);
    match oracle {
        Some(res) => {
            let _ = writeln!(r, "oracle residual (closed form vs linear solve) {res:.3e}");
        }
        None => {
            let _ = writeln!(r, "oracle residual unavailable: expanded system is singular");
        }
    }
    let _ = writeln!(r, "profitability margin {}", fmt_value(profitability_margin(p)));
    if !p.own_effect_dominates() {
        let _ = writeln!(r, "warning: some cross sensitivity exceeds its own-price sensitivity");
    }

    let mut table = SweepTable::new(&[
        "q_q_star",
        "q_c_star",
        "p_q_star",
        "p_c_star",
        "pi_q_star",
        "pi_c_star",
        "denominator",
        "oracle_residual",
    ])
    .with_meta("command", "equilibrium")
    .with_meta("config", cfg.to_json());
    table.push(
        vec![
            eq.q_q,
            eq.q_c,
            eq.p_q,
            eq.p_c,
            eq.pi_q,
            eq.pi_c,
            eq.denominator,
            oracle.unwrap_or(f64::NAN),
        ],
        (!eq.all_nonnegative()).then(|| "negative quantity or price".to_string()),
    );

    if let Some(energy) = &cfg.energy {
        if let Some(e) = energy.cap_e {
            let c = constrained_equilibrium(p, &energy.model_q, &energy.model_c, e, energy.mode)?;
            let _ = writeln!(
                r,
                "constrained ({}, E = {}): caps ({}, {}) quantities ({}, {}) profits ({}, {}) binding ({}, {})",
                energy.mode.name(),
                fmt_value(e),
                fmt_value(c.cap_q),
                fmt_value(c.cap_c),
                fmt_value(c.q_q),
                fmt_value(c.q_c),
                fmt_value(c.pi_q),
                fmt_value(c.pi_c),
                c.binding_q,
                c.binding_c
            );
        }
    }
    Ok(Outcome {
        report: r.trim_end().to_string(),
        table: Some(table),
        exit_code: EXIT_OK,
    })
}

pub fn find_threshold(cfg: &RunConfig) -> Result<Outcome> {
    let hw = cfg
        .hardware
        .as_ref()
        .ok_or_else(|| Error::Config("threshold needs a hardware section".into()))?;
    let mut r = String::new();
    let mut columns = Vec::new();
    let mut values = Vec::new();
    let mut flags = Vec::new();
    let mut exit_code = EXIT_OK;

    for &kind in &hw.quantum_kinds {
        let found: Result<CriticalScale> = match hw.bracket {
            Some([lo, hi]) => critical_scale(&cfg.market, kind, hw.classical_kind, &hw.constants, lo, hi),
            None => {
                let [lo, hi] = DEFAULT_SCALE_BRACKET;
                critical_scale_expanding(&cfg.market, kind, hw.classical_kind, &hw.constants, lo, hi)
            }
        };
        columns.push(format!("a_star_{kind}"));
        columns.push(format!("residual_{kind}"));
        match found {
            Ok(c) => {
                let mq = hw.constants.model(kind)?;
                let mc = hw.constants.model(hw.classical_kind)?;
                let below = energies_at_scale(&cfg.market, &mq, &mc, c.a_star / 10.0);
                let above = energies_at_scale(&cfg.market, &mq, &mc, c.a_star * 10.0);
                let pattern = match (below, above) {
                    (Ok((qb, cb)), Ok((qa, ca))) if qb > cb && qa < ca => {
                        "classical cheaper below, quantum cheaper above"
                    }
                    (Ok((qb, cb)), Ok((qa, ca))) if qb < cb && qa > ca => {
                        "quantum cheaper below, classical cheaper above"
                    }
                    _ => "no clean sign pattern at a*/10 and 10 a*",
                };
                let _ = writeln!(
                    r,
                    "{kind}: a* = {} (E = {} J, relative residual {:.3e}, bracket [{:e}, {:e}]); {pattern}",
                    fmt_value(c.a_star),
                    fmt_value(c.e_q),
                    c.residual,
                    c.lo,
                    c.hi
                );
                values.extend([c.a_star, c.residual]);
            }
            Err(err @ Error::NoSignChange { .. }) => {
                let _ = writeln!(r, "{kind}: no crossing: {err}");
                values.extend([f64::NAN, f64::NAN]);
                flags.push(format!("{kind}: no crossing"));
                exit_code = EXIT_NO_CROSSING;
            }
            Err(err) => return Err(err),
        }
    }

    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = SweepTable::new(&cols)
        .with_meta("command", "threshold")
        .with_meta("config", cfg.to_json());
    table.push(values, (!flags.is_empty()).then(|| flags.join("; ")));
    Ok(Outcome {
        report: r.trim_end().to_string(),
        table: Some(table),
        exit_code,
    })
}

pub fn verify(opts: RunOptions) -> Outcome {
    let mut vo = VerifyOptions::default();
    if let Some(seed) = opts.seed {
        vo.seed = seed;
    }
    vo.trials = opts.trials;
    let report = run_verify(&vo);
    Outcome {
        report: report.to_string(),
        table: None,
        exit_code: if report.ok() { EXIT_OK } else { EXIT_VERIFY_FAILED },
    }
}
