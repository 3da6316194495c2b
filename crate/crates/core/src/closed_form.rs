//! Closed-form equilibria for homogeneous markets and for the two-group
//! (quantum / classical) block model.
//!
//! Quantum firms occupy the first `n_q` rows of `Gamma`, classical firms the
//! remaining `n_c`. Within a group every firm shares `theta` and the
//! within-group cross sensitivity; across groups all entries equal `gamma_qc`.
//! Under that pattern `Gamma^{-1}` has the same block structure and is fixed
//! by five scalars, obtained here through the Schur complement of the
//! quantum block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketParams;
use crate::numerics::DenseMatrix;

/// Relative threshold for denominators built from cancelling terms.
pub const DENOMINATOR_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_denominator(stage: &'static str, value: f64, scale: f64) -> Result<f64> {
    if !value.is_finite() || value.abs() <= DENOMINATOR_TOLERANCE * scale {
        Err(Error::DegenerateDenominator { stage, value, scale })
    } else {
        Ok(value)
    }
}

/// Parameters of the two-group block model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoGroupParams {
    pub n_q: usize,
    pub n_c: usize,
    pub a_q: f64,
    pub a_c: f64,
    pub theta_q: f64,
    pub theta_c: f64,
    pub gamma_qq: f64,
    pub gamma_cc: f64,
    pub gamma_qc: f64,
}

impl TwoGroupParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_q == 0 || self.n_c == 0 {
            return Err(Error::InvalidParams(format!(
                "firm counts must be at least 1 (n_q = {}, n_c = {})",
                self.n_q, self.n_c
            )));
        }
        let positive = [
            ("a_q", self.a_q),
            ("a_c", self.a_c),
            ("theta_q", self.theta_q),
            ("theta_c", self.theta_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        let non_negative = [
            ("gamma_qq", self.gamma_qq),
            ("gamma_cc", self.gamma_cc),
            ("gamma_qc", self.gamma_qc),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Warning flag: each own sensitivity is at least every cross sensitivity it faces.
    pub fn own_effect_dominates(&self) -> bool {
        self.theta_q >= self.gamma_qq
            && self.theta_q >= self.gamma_qc
            && self.theta_c >= self.gamma_cc
            && self.theta_c >= self.gamma_qc
    }

    /// Exchanges the roles of the two groups.
    pub fn swapped(&self) -> Self {
        Self {
            n_q: self.n_c,
            n_c: self.n_q,
            a_q: self.a_c,
            a_c: self.a_q,
            theta_q: self.theta_c,
            theta_c: self.theta_q,
            gamma_qq: self.gamma_cc,
            gamma_cc: self.gamma_qq,
            gamma_qc: self.gamma_qc,
        }
    }

    /// Same market with a shared demand intercept `a_q = a_c = a`.
    pub fn with_intercept(&self, a: f64) -> Self {
        Self {
            a_q: a,
            a_c: a,
            ..*self
        }
    }

    /// The four summands of the shared two-group denominator.
    pub fn denominator_terms(&self) -> [f64; 4] {
        let (nq, nc) = (self.n_q as f64, self.n_c as f64);
        let dq = 2.0 * self.theta_q - self.gamma_qq;
        let dc = 2.0 * self.theta_c - self.gamma_cc;
        [
            nc * nq * (self.gamma_cc * self.gamma_qq - self.gamma_qc * self.gamma_qc),
            nc * self.gamma_cc * dq,
            nq * self.gamma_qq * dc,
            dq * dc,
        ]
    }
}

/// Per-firm equilibrium of the two-group model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupEquilibrium {
    pub q_q: f64,
    pub q_c: f64,
    pub p_q: f64,
    pub p_c: f64,
    pub pi_q: f64,
    pub pi_c: f64,
    /// Shared denominator of the closed forms.
    pub denominator: f64,
}

impl GroupEquilibrium {
    pub fn all_nonnegative(&self) -> bool {
        [self.q_q, self.q_c, self.p_q, self.p_c].iter().all(|v| *v >= 0.0)
    }
}

fn shared_denominator(p: &TwoGroupParams) -> Result<f64> {
    let terms = p.denominator_terms();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    check_denominator("two-group denominator", terms.iter().sum(), scale)
}

fn group_numerators(p: &TwoGroupParams) -> (f64, f64) {
    let (nq, nc) = (p.n_q as f64, p.n_c as f64);
    let num_q = p.a_q * ((nc - 1.0) * p.gamma_cc + 2.0 * p.theta_c) - p.a_c * nc * p.gamma_qc;
    let num_c = p.a_c * ((nq - 1.0) * p.gamma_qq + 2.0 * p.theta_q) - p.a_q * nq * p.gamma_qc;
    (num_q, num_c)
}

/// Equilibrium quantities, prices and profits of the two-group model.
///
/// Profits are exported as `theta q^2`; the squared-quotient form is computed
/// alongside and must agree.
pub fn two_group_equilibrium(p: &TwoGroupParams) -> Result<GroupEquilibrium> {
    p.validate()?;
    let d = shared_denominator(p)?;
    let (num_q, num_c) = group_numerators(p);
    let q_q = num_q / d;
    let q_c = num_c / d;
    let pi_q = p.theta_q * q_q * q_q;
    let pi_c = p.theta_c * q_c * q_c;
    debug_assert!(close(pi_q, p.theta_q * num_q * num_q / (d * d), 1e-9));
    debug_assert!(close(pi_c, p.theta_c * num_c * num_c / (d * d), 1e-9));
    Ok(GroupEquilibrium {
        q_q,
        q_c,
        p_q: p.theta_q * num_q / d,
        p_c: p.theta_c * num_c / d,
        pi_q,
        pi_c,
        denominator: d,
    })
}

/// Quantities written with numerator and denominator both negated, the way
/// the energy-consumption discussion states them.
pub fn two_group_quantities_negated_form(p: &TwoGroupParams) -> Result<(f64, f64)> {
    p.validate()?;
    let (nq, nc) = (p.n_q as f64, p.n_c as f64);
    let (tq, tc) = (p.theta_q, p.theta_c);
    let (gqq, gcc, gqc) = (p.gamma_qq, p.gamma_cc, p.gamma_qc);
    let den =
        nc * (nq * (gqc * gqc - gcc * gqq) + gcc * (gqq - 2.0 * tq)) + (gcc - 2.0 * tc) * ((nq - 1.0) * gqq + 2.0 * tq);
    let scale: f64 = p.denominator_terms().iter().map(|t| t.abs()).sum();
    let den = check_denominator("two-group denominator", den, scale)?;
    let num_q = p.a_q * (-(nc - 1.0) * gcc - 2.0 * tc) + p.a_c * nc * gqc;
    let num_c = p.a_c * (-(nq - 1.0) * gqq - 2.0 * tq) + p.a_q * nq * gqc;
    Ok((num_q / den, num_c / den))
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// Inverse of the homogeneous `N x N` matrix with `2 theta` on the diagonal
/// and `gamma` everywhere else: `phi` on the diagonal, `psi` off it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousInverse {
    pub phi: f64,
    pub psi: f64,
    pub n: usize,
    pub theta: f64,
    pub gamma: f64,
}

impl HomogeneousInverse {
    /// `(2 theta + (N-1) gamma)(phi + (N-1) psi)`, which is one for a true inverse.
    pub fn row_sum_identity(&self) -> f64 {
        let m = (self.n - 1) as f64;
        (2.0 * self.theta + m * self.gamma) * (self.phi + m * self.psi)
    }
}

/// Inverse entries of an `n x n` matrix with constant diagonal `diag` and
/// constant off-diagonal `off`. For `n = 1` the off-diagonal entry does not exist.
fn uniform_inverse(stage: &'static str, diag: f64, off: f64, n: usize) -> Result<(f64, Option<f64>)> {
    if n == 1 {
        let d = check_denominator(stage, diag, diag.abs().max(off.abs()))?;
        return Ok((1.0 / d, None));
    }
    let m = (n - 1) as f64;
    let f1 = check_denominator(stage, diag - off, diag.abs() + off.abs())?;
    let f2 = check_denominator(stage, diag + m * off, diag.abs() + m * off.abs())?;
    let den = f1 * f2;
    Ok(((diag + (m - 1.0) * off) / den, Some(-off / den)))
}

pub fn homogeneous_inverse(theta: f64, gamma: f64, n: usize) -> Result<HomogeneousInverse> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "homogeneous inverse needs at least two firms, got {n}"
        )));
    }
    let (phi, psi) = uniform_inverse("homogeneous inverse", 2.0 * theta, gamma, n)?;
    Ok(HomogeneousInverse {
        phi,
        psi: psi.unwrap_or(0.0),
        n,
        theta,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousEquilibrium {
    pub q_star: f64,
    pub pi_star: f64,
    pub inverse: HomogeneousInverse,
}

/// Symmetric equilibrium of `n` identical firms.
///
/// `q* = a phi + (N-1) a psi`; `pi*` is `theta q*^2`, checked against the
/// per-firm profit `a q* - theta q*^2 - (N-1) gamma q*^2`.
pub fn homogeneous_equilibrium(a: f64, theta: f64, gamma: f64, n: usize) -> Result<HomogeneousEquilibrium> {
    let inverse = homogeneous_inverse(theta, gamma, n)?;
    let m = (n - 1) as f64;
    let q_star = a * inverse.phi + m * a * inverse.psi;
    let pi_star = theta * q_star * q_star;
    debug_assert!(
        (pi_star - (a * q_star - theta * q_star * q_star - m * gamma * q_star * q_star)).abs()
            <= 1e-9 * (a * q_star.abs()).max(1.0)
    );
    Ok(HomogeneousEquilibrium {
        q_star,
        pi_star,
        inverse,
    })
}

/// The cubic-in-`N` profit polynomial as printed alongside the homogeneous
/// inverse, evaluated verbatim.
///
/// It expands `a q* - (theta N + gamma N (N-1)) q*^2`, which sums the quadratic
/// terms over all `N` firms; it is not the per-firm equilibrium profit
/// (that is [`HomogeneousEquilibrium::pi_star`]) except when `N = 1`.
pub fn printed_profit_polynomial(a: f64, inv: &HomogeneousInverse) -> f64 {
    let (phi, psi, th, g) = (inv.phi, inv.psi, inv.theta, inv.gamma);
    let n = inv.n as f64;
    let poly = -g * psi * n.powi(3)
        + (2.0 * g * psi - g * phi - th * psi) * n * n
        + (-g * psi + g * phi + th * psi - th * phi) * n
        + 1.0;
    a * a * (phi + (n - 1.0) * psi) * poly
}

/// The five scalars that determine `Gamma^{-1}` for the two-group pattern.
///
/// `varpi_qq` / `varpi_cc` (off-diagonal entries inside a group) do not exist
/// for a group of one firm and are `None` then.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockInverse {
    pub omega_qq: f64,
    pub varpi_qq: Option<f64>,
    pub omega_cc: f64,
    pub varpi_cc: Option<f64>,
    pub omega_qc: f64,
}

impl BlockInverse {
    /// Expands the five scalars into the full `(n_q + n_c)`-square inverse.
    pub fn to_matrix(&self, n_q: usize, n_c: usize) -> DenseMatrix {
        let n = n_q + n_c;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = match (i < n_q, j < n_q) {
                    (true, true) if i == j => self.omega_qq,
                    (true, true) => self.varpi_qq.unwrap_or(f64::NAN),
                    (false, false) if i == j => self.omega_cc,
                    (false, false) => self.varpi_cc.unwrap_or(f64::NAN),
                    _ => self.omega_qc,
                };
                m.set(i, j, v);
            }
        }
        m
    }

    /// Group quantities `Gamma^{-1} a` for block-constant intercepts.
    pub fn quantities(&self, p: &TwoGroupParams) -> (f64, f64) {
        let (nq, nc) = (p.n_q as f64, p.n_c as f64);
        let row_q = self.omega_qq + self.varpi_qq.unwrap_or(0.0) * (nq - 1.0);
        let row_c = self.omega_cc + self.varpi_cc.unwrap_or(0.0) * (nc - 1.0);
        (
            row_q * p.a_q + nc * self.omega_qc * p.a_c,
            nq * self.omega_qc * p.a_q + row_c * p.a_c,
        )
    }
}

/// Stage-by-stage Schur-complement inversion.
///
/// 1. invert the quantum block: `(phi_qq, psi_qq)`;
/// 2. form the Schur complement `Gamma_cc - Gamma_cq Gamma_qq^{-1} Gamma_qc`,
///    whose diagonal / off-diagonal are `(phi_cc, psi_cc)`;
/// 3. invert it, then add the rank-one correction to the quantum block.
pub fn block_inverse(p: &TwoGroupParams) -> Result<BlockInverse> {
    p.validate()?;
    let (nq, nc) = (p.n_q as f64, p.n_c as f64);
    let g2 = p.gamma_qc * p.gamma_qc;

    let (phi_qq, psi_qq) = uniform_inverse("quantum block inverse", 2.0 * p.theta_q, p.gamma_qq, p.n_q)?;
    let row_q = phi_qq + psi_qq.unwrap_or(0.0) * (nq - 1.0);
    // sum of all entries of Gamma_qq^{-1}
    let block_sum = nq * row_q;

    let phi_cc = 2.0 * p.theta_c - g2 * block_sum;
    let psi_cc = p.gamma_cc - g2 * block_sum;
    let (phi_cc_inv, psi_cc_inv) = uniform_inverse("Schur complement inverse", phi_cc, psi_cc, p.n_c)?;
    let row_c = phi_cc_inv + psi_cc_inv.unwrap_or(0.0) * (nc - 1.0);

    let correction = nc * g2 * row_q * row_q * row_c;
    Ok(BlockInverse {
        omega_qq: phi_qq + correction,
        varpi_qq: psi_qq.map(|psi| psi + correction),
        omega_cc: phi_cc_inv,
        varpi_cc: psi_cc_inv,
        omega_qc: -p.gamma_qc * row_c * row_q,
    })
}

/// The same five scalars written directly in the model parameters.
pub fn block_inverse_explicit(p: &TwoGroupParams) -> Result<BlockInverse> {
    p.validate()?;
    let (nq, nc) = (p.n_q as f64, p.n_c as f64);
    let (tq, tc) = (p.theta_q, p.theta_c);
    let (gqq, gcc, gqc) = (p.gamma_qq, p.gamma_cc, p.gamma_qc);
    let g2 = gqc * gqc;

    let scale: f64 = p.denominator_terms().iter().map(|t| t.abs()).sum();
    let den = nc * (nq * (g2 - gcc * gqq) + gcc * (gqq - 2.0 * tq)) + (gcc - 2.0 * tc) * ((nq - 1.0) * gqq + 2.0 * tq);
    let den = check_denominator("two-group denominator", den, scale)?;

    let omega_qc = gqc / den;

    let omega_qq = if p.n_q == 1 {
        // the (gamma_qq - 2 theta_q) factor cancels when the group has one firm
        -((nc - 1.0) * gcc + 2.0 * tc) / den
    } else {
        let dq = check_denominator("quantum block inverse", gqq - 2.0 * tq, gqq.abs() + 2.0 * tq)?;
        -(nc * ((nq - 1.0) * g2 - gcc * ((nq - 2.0) * gqq + 2.0 * tq))
            + (gcc - 2.0 * tc) * ((nq - 2.0) * gqq + 2.0 * tq))
            / (dq * den)
    };
    let varpi_qq = if p.n_q == 1 {
        None
    } else {
        let dq = gqq - 2.0 * tq;
        Some(-(nc * (gcc * gqq - g2) - gqq * (gcc - 2.0 * tc)) / (dq * den))
    };

    let omega_cc = if p.n_c == 1 {
        -((nq - 1.0) * gqq + 2.0 * tq) / den
    } else {
        let dc = check_denominator("Schur complement inverse", gcc - 2.0 * tc, gcc.abs() + 2.0 * tc)?;
        -(nq * ((nc - 1.0) * g2 - gqq * ((nc - 2.0) * gcc + 2.0 * tc))
            + (gqq - 2.0 * tq) * ((nc - 2.0) * gcc + 2.0 * tc))
            / (dc * den)
    };
    let varpi_cc = if p.n_c == 1 {
        None
    } else {
        let dc = gcc - 2.0 * tc;
        Some(-(nq * (gcc * gqq - g2) - gcc * (gqq - 2.0 * tq)) / (dc * den))
    };

    Ok(BlockInverse {
        omega_qq,
        varpi_qq,
        omega_cc,
        varpi_cc,
        omega_qc,
    })
}

/// Embeds the two-group model in the general N-firm model (quantum firms first).
pub fn expand_two_group(p: &TwoGroupParams) -> Result<MarketParams> {
    p.validate()?;
    let n = p.n_q + p.n_c;
    let is_q = |i: usize| i < p.n_q;
    let a = (0..n).map(|i| if is_q(i) { p.a_q } else { p.a_c }).collect();
    let theta: Vec<f64> = (0..n).map(|i| if is_q(i) { p.theta_q } else { p.theta_c }).collect();
    let mut gamma = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = match (is_q(i), is_q(j)) {
                _ if i == j => theta[i],
                (true, true) => p.gamma_qq,
                (false, false) => p.gamma_cc,
                _ => p.gamma_qc,
            };
            gamma.set(i, j, v);
        }
    }
    MarketParams::new(a, theta, gamma)
}

/// Slack in the quantum-profitability condition
/// `gamma_qc / a_q < (gamma_cc + (2 theta_c - gamma_cc) / n_c) / a_c`.
///
/// Positive means the condition holds.
pub fn profitability_margin(p: &TwoGroupParams) -> f64 {
    let rhs = (p.gamma_cc + (2.0 * p.theta_c - p.gamma_cc) / p.n_c as f64) / p.a_c;
    rhs - p.gamma_qc / p.a_q
}
