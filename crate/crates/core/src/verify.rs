//! Randomised cross-checks of the closed forms against the general solver.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_form::{block_inverse, expand_two_group, two_group_equilibrium, TwoGroupParams};
use crate::market::{build_gamma, foc_residual, is_diagonally_dominant, prices, profits, MarketParams};
use crate::numerics::{central_diff, linsolve, DenseMatrix};

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const BLOCK_TOLERANCE: f64 = 1e-10;
pub const FOC_TOLERANCE: f64 = 1e-4;

pub const DEFAULT_ORACLE_TRIALS: usize = 500;
pub const DEFAULT_BLOCK_TRIALS: usize = 200;
pub const DEFAULT_FOC_TRIALS: usize = 100;

/// Smallest accepted ratio between a group quantity and the larger one, so
/// relative comparisons are not dominated by cancellation near zero.
const MIN_QUANTITY_RATIO: f64 = 1e-2;

/// Independent stream per suite so trial counts in one do not shift another.
pub fn suite_rng(seed: u64, suite: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite);
    rng
}

/// Draws two-group parameters whose expansion is strictly diagonally dominant
/// and whose equilibrium quantities are positive and of comparable size.
pub fn random_two_group<R: Rng>(rng: &mut R, max_group: usize) -> TwoGroupParams {
    loop {
        let n_q = rng.gen_range(1..=max_group);
        let n_c = rng.gen_range(1..=max_group);
        let theta_q = rng.gen_range(0.5..5.0);
        let theta_c = rng.gen_range(0.5..5.0);
        let n = (n_q + n_c) as f64;
        let a = rng.gen_range(1.0..100.0);
        let p = TwoGroupParams {
            n_q,
            n_c,
            a_q: a * rng.gen_range(0.5..2.0),
            a_c: a * rng.gen_range(0.5..2.0),
            theta_q,
            theta_c,
            gamma_qq: rng.gen_range(0.0..2.0 * theta_q / n),
            gamma_cc: rng.gen_range(0.0..2.0 * theta_c / n),
            gamma_qc: rng.gen_range(0.0..2.0 * theta_q.min(theta_c) / n),
        };
        if accept(&p) {
            return p;
        }
    }
}

fn accept(p: &TwoGroupParams) -> bool {
    let Ok(m) = expand_two_group(p) else { return false };
    if !is_diagonally_dominant(&build_gamma(&m)).dominant {
        return false;
    }
    match two_group_equilibrium(p) {
        Ok(eq) => {
            let big = eq.q_q.max(eq.q_c);
            eq.q_q >= MIN_QUANTITY_RATIO * big && eq.q_c >= MIN_QUANTITY_RATIO * big
        }
        Err(_) => false,
    }
}

/// Random strictly diagonally dominant general market with `theta_i >= gamma_ij`.
pub fn random_market<R: Rng>(rng: &mut R, max_n: usize) -> MarketParams {
    let n = rng.gen_range(1..=max_n);
    let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..100.0)).collect();
    let mut cross = DenseMatrix::zeros(n, n);
    for i in 0..n {
        // off-diagonal row sum stays below 2 theta_i and each entry below theta_i
        let bound = theta[i].min(1.9 * theta[i] / (n.max(2) - 1) as f64);
        for j in 0..n {
            if i != j {
                cross.set(i, j, rng.gen_range(0.0..bound));
            }
        }
    }
    MarketParams::from_cross(a, theta, &cross).expect("generated market is valid")
}

fn rel_diff(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    pub worst: f64,
    pub tolerance: f64,
    /// Trial indices (within the suite) that exceeded the tolerance or failed outright.
    pub failures: Vec<usize>,
}

impl SuiteReport {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            trials: 0,
            passed: 0,
            worst: 0.0,
            tolerance,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, index: usize, residual: Option<f64>) {
        self.trials += 1;
        match residual {
            Some(r) if r <= self.tolerance => {
                self.passed += 1;
                self.worst = self.worst.max(r);
            }
            Some(r) => {
                self.worst = self.worst.max(r);
                self.failures.push(index);
            }
            None => {
                self.worst = f64::INFINITY;
                self.failures.push(index);
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Closed forms against `linsolve` on the expanded model: quantities, prices
/// and profits to relative tolerance, plus the `p = theta q`, `pi = theta q^2`
/// identities on the solver output.
pub fn oracle_residual(p: &TwoGroupParams) -> Option<f64> {
    let eq = two_group_equilibrium(p).ok()?;
    let m = expand_two_group(p).ok()?;
    let q = linsolve(build_gamma(&m).as_matrix(), m.a()).ok()?;
    let pr = prices(&m, &q).ok()?;
    let pf = profits(&m, &q).ok()?;
    let mut worst: f64 = 0.0;
    for i in 0..m.n() {
        let (cq, cp, cpi) = if i < p.n_q {
            (eq.q_q, eq.p_q, eq.pi_q)
        } else {
            (eq.q_c, eq.p_c, eq.pi_c)
        };
        let th = m.theta()[i];
        worst = worst
            .max(rel_diff(cq, q[i]))
            .max(rel_diff(cp, pr[i]))
            .max(rel_diff(cpi, pf[i]))
            .max(rel_diff(pr[i], th * q[i]))
            .max(rel_diff(pf[i], th * q[i] * q[i]));
    }
    Some(worst)
}

/// Max-norm of `B Gamma - I` for the reassembled block inverse `B`.
pub fn block_residual(p: &TwoGroupParams) -> Option<f64> {
    let b = block_inverse(p).ok()?;
    let g = build_gamma(&expand_two_group(p).ok()?).into_matrix();
    let n = p.n_q + p.n_c;
    b.to_matrix(p.n_q, p.n_c)
        .matmul(&g)
        .ok()?
        .max_abs_diff(&DenseMatrix::identity(n))
        .ok()
}

/// Largest `|d pi_i / d q_i|` at the equilibrium, by central differences.
pub fn foc_fd_residual(p: &TwoGroupParams) -> Option<f64> {
    let m = expand_two_group(p).ok()?;
    let q = linsolve(build_gamma(&m).as_matrix(), m.a()).ok()?;
    let mut worst: f64 = 0.0;
    for i in 0..m.n() {
        let profit_i = |x: f64| {
            let mut qq = q.clone();
            qq[i] = x;
            profits(&m, &qq).map(|v| v[i]).unwrap_or(f64::NAN)
        };
        let h = 1e-6 * q[i].abs().max(1.0);
        let d = central_diff(profit_i, q[i], h);
        if !d.is_finite() {
            return None;
        }
        worst = worst.max(d.abs());
    }
    // the analytic residual must vanish too
    let analytic = foc_residual(&m, &q).ok()?;
    let scale = m.a().iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if analytic.iter().any(|r| r.abs() > 1e-8 * scale) {
        return None;
    }
    Some(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides every suite's trial count when set.
    pub trials: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.suites.iter().all(SuiteReport::ok)
    }

    /// Worst residual of the exact-arithmetic suites (closed forms and block identity).
    pub fn worst_oracle_residual(&self) -> f64 {
        self.suites
            .iter()
            .filter(|s| s.name != "foc-finite-difference")
            .fold(0.0, |w, s| w.max(s.worst))
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for s in &self.suites {
            writeln!(
                f,
                "{:<24} {:>5}/{:<5} worst {:.3e} (tolerance {:.0e}) {}",
                s.name,
                s.passed,
                s.trials,
                s.worst,
                s.tolerance,
                if s.ok() { "PASS" } else { "FAIL" }
            )?;
            for idx in &s.failures {
                writeln!(
                    f,
                    "  failing instance: seed {} suite {} index {}",
                    self.seed, s.name, idx
                )?;
            }
        }
        write!(
            f,
            "worst oracle residual {:.3e}; {}",
            self.worst_oracle_residual(),
            if self.ok() { "all suites pass" } else { "FAILURES" }
        )
    }
}

fn run_suite(
    name: &'static str,
    stream: u64,
    tolerance: f64,
    trials: usize,
    seed: u64,
    check: fn(&TwoGroupParams) -> Option<f64>,
) -> SuiteReport {
    let mut rng = suite_rng(seed, stream);
    let mut report = SuiteReport::new(name, tolerance);
    for i in 0..trials {
        let p = random_two_group(&mut rng, 8);
        report.record(i, check(&p));
    }
    report
}

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let n = |default: usize| opts.trials.unwrap_or(default);
    VerifyReport {
        seed: opts.seed,
        suites: vec![
            run_suite(
                "closed-form-vs-linsolve",
                1,
                ORACLE_TOLERANCE,
                n(DEFAULT_ORACLE_TRIALS),
                opts.seed,
                oracle_residual,
            ),
            run_suite(
                "block-inverse-identity",
                2,
                BLOCK_TOLERANCE,
                n(DEFAULT_BLOCK_TRIALS),
                opts.seed,
                block_residual,
            ),
            run_suite(
                "foc-finite-difference",
                3,
                FOC_TOLERANCE,
                n(DEFAULT_FOC_TRIALS),
                opts.seed,
                foc_fd_residual,
            ),
        ],
    }
}
