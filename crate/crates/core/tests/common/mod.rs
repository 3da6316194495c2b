#![allow(dead_code)]

use qcournot::closed_form::TwoGroupParams;

/// Dense `n x n` system solved by Gauss-Jordan elimination with full row scans.
pub fn gauss_jordan(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let d = m[col][col];
        for k in 0..n {
            m[col][k] /= d;
        }
        b[col] /= d;
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for k in 0..n {
                        m[r][k] -= f * m[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some(b)
}

/// Expanded two-group market written out directly: intercepts, own slopes,
/// and the inverse-demand matrix with `theta` on its diagonal.
pub struct Expanded {
    pub a: Vec<f64>,
    pub theta: Vec<f64>,
    pub demand: Vec<Vec<f64>>,
}

pub fn expand(p: &TwoGroupParams) -> Expanded {
    let n = p.n_q + p.n_c;
    let q = |i: usize| i < p.n_q;
    let mut demand = vec![vec![0.0; n]; n];
    for (i, row) in demand.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j {
                if q(i) {
                    p.theta_q
                } else {
                    p.theta_c
                }
            } else if q(i) && q(j) {
                p.gamma_qq
            } else if !q(i) && !q(j) {
                p.gamma_cc
            } else {
                p.gamma_qc
            };
        }
    }
    Expanded {
        a: (0..n).map(|i| if q(i) { p.a_q } else { p.a_c }).collect(),
        theta: (0..n).map(|i| if q(i) { p.theta_q } else { p.theta_c }).collect(),
        demand,
    }
}

impl Expanded {
    /// First-order-condition matrix: the demand matrix with its diagonal doubled.
    pub fn foc_matrix(&self) -> Vec<Vec<f64>> {
        let mut g = self.demand.clone();
        for (i, row) in g.iter_mut().enumerate() {
            row[i] *= 2.0;
        }
        g
    }

    pub fn solve(&self) -> Option<Vec<f64>> {
        gauss_jordan(self.foc_matrix(), self.a.clone())
    }

    pub fn price(&self, q: &[f64], i: usize) -> f64 {
        self.a[i] - self.demand[i].iter().zip(q).map(|(g, x)| g * x).sum::<f64>()
    }

    pub fn profit(&self, q: &[f64], i: usize) -> f64 {
        self.price(q, i) * q[i]
    }
}

pub fn rel(x: f64, y: f64) -> f64 {
    let s = x.abs().max(y.abs());
    if s == 0.0 {
        0.0
    } else {
        (x - y).abs() / s
    }
}
