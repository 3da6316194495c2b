//! General N-firm Cournot market with linear inverse demand.
//!
//! Firm `i` faces `p_i = a_i - sum_j gamma_ij q_j` with `gamma_ii = theta_i`.
//! The interior Nash point solves `Gamma q = a`, where `Gamma` carries
//! `2 theta_i` on the diagonal; [`solve_equilibrium`] obtains it by a direct
//! linear solve and is the reference every closed form is checked against.

use crate::error::{Error, Result};
use crate::numerics::{linsolve, DenseMatrix};

/// Demand intercepts, own sensitivities and the cross-sensitivity matrix.
///
/// `gamma` stores `theta_i` on its diagonal. Off-diagonal entries above the
/// corresponding `theta_i` are accepted; see [`MarketParams::own_effect_dominates`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    a: Vec<f64>,
    theta: Vec<f64>,
    gamma: DenseMatrix,
}

impl MarketParams {
    /// Validates a full `gamma` matrix whose diagonal must equal `theta`.
    pub fn new(a: Vec<f64>, theta: Vec<f64>, gamma: DenseMatrix) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::InvalidParams("market needs at least one firm".into()));
        }
        if theta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: theta.len(),
            });
        }
        if gamma.rows() != n || gamma.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: gamma.rows() * gamma.cols(),
            });
        }
        for i in 0..n {
            if !(a[i] > 0.0) || !a[i].is_finite() {
                return Err(Error::InvalidParams(format!("a[{i}] = {} must be positive", a[i])));
            }
            if !(theta[i] > 0.0) || !theta[i].is_finite() {
                return Err(Error::InvalidParams(format!(
                    "theta[{i}] = {} must be positive",
                    theta[i]
                )));
            }
            if gamma.get(i, i) != theta[i] {
                return Err(Error::InvalidParams(format!(
                    "gamma[{i}][{i}] = {} must equal theta[{i}] = {}",
                    gamma.get(i, i),
                    theta[i]
                )));
            }
            for j in 0..n {
                if gamma.get(i, j) < 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "gamma[{i}][{j}] = {} must be non-negative",
                        gamma.get(i, j)
                    )));
                }
            }
        }
        Ok(Self { a, theta, gamma })
    }

    /// Builds the parameters from off-diagonal cross sensitivities; the
    /// diagonal of `cross` is ignored and replaced by `theta`.
    pub fn from_cross(a: Vec<f64>, theta: Vec<f64>, cross: &DenseMatrix) -> Result<Self> {
        let mut gamma = cross.clone();
        if gamma.rows() == theta.len() && gamma.cols() == theta.len() {
            for (i, t) in theta.iter().enumerate() {
                gamma.set(i, i, *t);
            }
        }
        Self::new(a, theta, gamma)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn gamma(&self) -> &DenseMatrix {
        &self.gamma
    }

    /// Warning flag: true when `theta_i >= gamma_ij` for every `j != i`.
    pub fn own_effect_dominates(&self) -> bool {
        (0..self.n()).all(|i| (0..self.n()).all(|j| i == j || self.theta[i] >= self.gamma.get(i, j)))
    }

    /// Relabels firms so that new firm `k` is old firm `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let a = perm.iter().map(|&i| self.a[i]).collect();
        let theta = perm.iter().map(|&i| self.theta[i]).collect();
        let mut gamma = DenseMatrix::zeros(n, n);
        for (r, &i) in perm.iter().enumerate() {
            for (c, &j) in perm.iter().enumerate() {
                gamma.set(r, c, self.gamma.get(i, j));
            }
        }
        Self::new(a, theta, gamma)
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n(),
                found: q.len(),
            })
        }
    }
}

/// The first-order-condition matrix: `2 theta_i` on the diagonal, `gamma_ij` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix(DenseMatrix);

impl GammaMatrix {
    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }
}

impl From<DenseMatrix> for GammaMatrix {
    fn from(m: DenseMatrix) -> Self {
        GammaMatrix(m)
    }
}

pub fn build_gamma(params: &MarketParams) -> GammaMatrix {
    let mut m = params.gamma.clone();
    for (i, t) in params.theta.iter().enumerate() {
        m.set(i, i, 2.0 * t);
    }
    GammaMatrix(m)
}

/// Row-wise strict diagonal dominance of a [`GammaMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    pub dominant: bool,
    /// Smallest `|g_ii| - sum_{j != i} |g_ij|` over all rows.
    pub margin: f64,
}

pub fn is_diagonally_dominant(g: &GammaMatrix) -> Dominance {
    let m = &g.0;
    let margin = (0..m.rows())
        .map(|i| {
            let off: f64 = (0..m.cols()).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum();
            m.get(i, i).abs() - off
        })
        .fold(f64::INFINITY, f64::min);
    Dominance {
        dominant: margin > 0.0,
        margin,
    }
}

pub fn prices(params: &MarketParams, q: &[f64]) -> Result<Vec<f64>> {
    params.check_len(q)?;
    let demand = params.gamma.mul_vec(q)?;
    Ok(params.a.iter().zip(demand).map(|(a, d)| a - d).collect())
}

pub fn profits(params: &MarketParams, q: &[f64]) -> Result<Vec<f64>> {
    Ok(prices(params, q)?.iter().zip(q).map(|(p, qi)| p * qi).collect())
}

/// `d pi_i / d q_i = a_i - 2 theta_i q_i - sum_{j != i} gamma_ij q_j`.
pub fn foc_residual(params: &MarketParams, q: &[f64]) -> Result<Vec<f64>> {
    params.check_len(q)?;
    let lhs = build_gamma(params).0.mul_vec(q)?;
    Ok(params.a.iter().zip(lhs).map(|(a, l)| a - l).collect())
}

/// Quantities, prices and profits at the interior Nash point.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub quantities: Vec<f64>,
    pub prices: Vec<f64>,
    pub profits: Vec<f64>,
    /// True iff every quantity and every price is non-negative.
    pub all_nonnegative: bool,
    pub foc_residual_max: f64,
}

impl Equilibrium {
    pub fn n(&self) -> usize {
        self.quantities.len()
    }
}

/// Solves `Gamma q* = a`. Negative quantities are returned as-is and only
/// reported through `all_nonnegative`.
pub fn solve_equilibrium(params: &MarketParams) -> Result<Equilibrium> {
    let gamma = build_gamma(params);
    let quantities = linsolve(gamma.as_matrix(), &params.a)?;
    let prices = prices(params, &quantities)?;
    let profits = prices.iter().zip(&quantities).map(|(p, q)| p * q).collect();
    let foc_residual_max = foc_residual(params, &quantities)?
        .iter()
        .fold(0.0, |m: f64, r| m.max(r.abs()));
    let all_nonnegative = quantities.iter().chain(&prices).all(|v| *v >= 0.0);
    Ok(Equilibrium {
        quantities,
        prices,
        profits,
        all_nonnegative,
        foc_residual_max,
    })
}
