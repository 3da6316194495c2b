//! Energy curves of concrete hardware and the demand scale at which quantum
//! output becomes cheaper in energy than classical output.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_form::{check_denominator, TwoGroupParams};
use crate::energy::{equilibrium_energy, EnergyModel};
use crate::error::{Error, Result};
use crate::numerics::{bisect, Bracket, DEFAULT_MAX_ITER};

/// Bracket growth steps tried by [`critical_scale_expanding`].
pub const MAX_BRACKET_EXPANSIONS: usize = 30;
/// Relative tolerance on `log10 a` for the crossing search.
const LOG_SCALE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardwareKind {
    Rydberg,
    IonTrap,
    ClassicalHpc,
}

impl HardwareKind {
    pub const ALL: [HardwareKind; 3] = [HardwareKind::Rydberg, HardwareKind::IonTrap, HardwareKind::ClassicalHpc];

    pub fn is_quantum(&self) -> bool {
        !matches!(self, HardwareKind::ClassicalHpc)
    }
}

impl fmt::Display for HardwareKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardwareKind::Rydberg => "rydberg",
            HardwareKind::IonTrap => "ion_trap",
            HardwareKind::ClassicalHpc => "classical_hpc",
        })
    }
}

/// Energy constants in Joules; every field may be overridden from config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareConstants {
    pub alpha: f64,
    pub mu: f64,
    pub beta_rydberg: f64,
    pub beta_ion: f64,
    pub beta_classical: f64,
}

impl Default for HardwareConstants {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            mu: 2.0,
            beta_rydberg: 1.5e4,
            beta_ion: 0.0175,
            beta_classical: 4e-10,
        }
    }
}

impl HardwareConstants {
    pub fn model(&self, kind: HardwareKind) -> Result<EnergyModel> {
        match kind {
            HardwareKind::Rydberg => EnergyModel::log_power(self.beta_rydberg, self.mu),
            HardwareKind::IonTrap => EnergyModel::log_power(self.beta_ion, self.mu),
            HardwareKind::ClassicalHpc => EnergyModel::power_law(self.beta_classical, self.alpha),
        }
    }

    /// Energy of one run at problem scale `n`: `(log2 N)^mu * beta` for quantum
    /// hardware, `N^alpha * beta` for classical.
    pub fn algorithm_energy(&self, kind: HardwareKind, n: f64) -> Result<f64> {
        match kind {
            HardwareKind::Rydberg | HardwareKind::IonTrap => {
                if !(n > 1.0) {
                    return Err(Error::Domain(format!("{kind} energy needs scale > 1, got {n}")));
                }
                let beta = if kind == HardwareKind::Rydberg {
                    self.beta_rydberg
                } else {
                    self.beta_ion
                };
                Ok(beta * n.log2().powf(self.mu))
            }
            HardwareKind::ClassicalHpc => {
                if !(n > 0.0) {
                    return Err(Error::Domain(format!("{kind} energy needs scale > 0, got {n}")));
                }
                Ok(self.beta_classical * n.powf(self.alpha))
            }
        }
    }
}

/// Energy curve of `kind` with the default constants.
pub fn hardware_model(kind: HardwareKind) -> EnergyModel {
    HardwareConstants::default()
        .model(kind)
        .expect("default hardware constants are valid")
}

pub fn algorithm_energy(kind: HardwareKind, n: f64) -> Result<f64> {
    HardwareConstants::default().algorithm_energy(kind, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalScale {
    pub a_star: f64,
    /// Per-firm quantum energy at `a_star`.
    pub e_q: f64,
    /// Per-firm classical energy at `a_star`.
    pub e_c: f64,
    /// `|e_q - e_c| / max(e_q, e_c)`.
    pub residual: f64,
    /// Bracket that was searched, after any expansion.
    pub lo: f64,
    pub hi: f64,
}

/// Equilibrium energies with the shared intercept set to `a`.
pub fn energies_at_scale(p: &TwoGroupParams, mq: &EnergyModel, mc: &EnergyModel, a: f64) -> Result<(f64, f64)> {
    equilibrium_energy(&p.with_intercept(a), mq, mc)
}

/// Finds `a*` in `[a_lo, a_hi]` where the per-firm equilibrium energies of the
/// two groups coincide. The search runs in `log10 a`.
pub fn critical_scale(
    p: &TwoGroupParams,
    quantum: HardwareKind,
    classical: HardwareKind,
    constants: &HardwareConstants,
    a_lo: f64,
    a_hi: f64,
) -> Result<CriticalScale> {
    if !(a_lo > 0.0 && a_lo < a_hi && a_hi.is_finite()) {
        return Err(Error::InvalidBracket { lo: a_lo, hi: a_hi });
    }
    let mq = constants.model(quantum)?;
    let mc = constants.model(classical)?;

    let mut failure: Option<Error> = None;
    let mut gap = |x: f64| match energies_at_scale(p, &mq, &mc, 10f64.powf(x)) {
        Ok((e_q, e_c)) => e_q.ln() - e_c.ln(),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let (x_lo, x_hi) = (a_lo.log10(), a_hi.log10());
    let result =
        Bracket::new(&mut gap, x_lo, x_hi).and_then(|b| bisect(&mut gap, b, LOG_SCALE_TOLERANCE, DEFAULT_MAX_ITER));
    if let Some(e) = failure {
        return Err(e);
    }
    let x = result.map_err(|e| match e {
        Error::NoSignChange { f_lo, f_hi, .. } => Error::NoSignChange {
            lo: a_lo,
            hi: a_hi,
            f_lo,
            f_hi,
        },
        other => other,
    })?;

    let a_star = 10f64.powf(x);
    let (e_q, e_c) = energies_at_scale(p, &mq, &mc, a_star)?;
    Ok(CriticalScale {
        a_star,
        e_q,
        e_c,
        residual: (e_q - e_c).abs() / e_q.max(e_c),
        lo: a_lo,
        hi: a_hi,
    })
}

/// [`critical_scale`], multiplying the upper end by ten (up to
/// [`MAX_BRACKET_EXPANSIONS`] times) while the bracket has no crossing.
pub fn critical_scale_expanding(
    p: &TwoGroupParams,
    quantum: HardwareKind,
    classical: HardwareKind,
    constants: &HardwareConstants,
    a_lo: f64,
    a_hi: f64,
) -> Result<CriticalScale> {
    let mut hi = a_hi;
    let mut expansions = 0;
    loop {
        match critical_scale(p, quantum, classical, constants, a_lo, hi) {
            Err(Error::NoSignChange { .. }) if expansions < MAX_BRACKET_EXPANSIONS => {
                hi *= 10.0;
                expansions += 1;
            }
            other => return other,
        }
    }
}

/// Large-`n` approximations of the per-firm equilibrium quantities with a
/// shared intercept `a`.
pub fn asymptotic_quantities(p: &TwoGroupParams, a: f64) -> Result<(f64, f64)> {
    p.validate()?;
    let cross = p.gamma_qc * p.gamma_qc;
    let den = check_denominator(
        "asymptotic denominator",
        p.gamma_cc * p.gamma_qq - cross,
        p.gamma_cc * p.gamma_qq + cross,
    )?;
    Ok((
        a * (p.gamma_cc - p.gamma_qc) / (den * p.n_q as f64),
        a * (p.gamma_qq - p.gamma_qc) / (den * p.n_c as f64),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::two_group_equilibrium;
    use crate::energy::EnergyKind;

    fn fig3() -> TwoGroupParams {
        TwoGroupParams {
            n_q: 10,
            n_c: 10,
            a_q: 1.0,
            a_c: 1.0,
            theta_q: 2.0,
            theta_c: 2.0,
            gamma_qq: 2.0,
            gamma_cc: 2.0,
            gamma_qc: 0.1,
        }
    }

    #[test]
    fn default_models() {
        let r = hardware_model(HardwareKind::Rydberg);
        assert_eq!((r.kind, r.beta, r.exponent), (EnergyKind::LogPower, 1.5e4, 2.0));
        let i = hardware_model(HardwareKind::IonTrap);
        assert_eq!((i.kind, i.beta, i.exponent), (EnergyKind::LogPower, 0.0175, 2.0));
        let c = hardware_model(HardwareKind::ClassicalHpc);
        assert_eq!((c.kind, c.beta, c.exponent), (EnergyKind::PowerLaw, 4e-10, 1.0));
    }

    #[test]
    fn algorithm_energy_examples() {
        assert!((algorithm_energy(HardwareKind::Rydberg, 1024.0).unwrap() - 1.5e6).abs() < 1e-6);
        assert!((algorithm_energy(HardwareKind::ClassicalHpc, 1024.0).unwrap() - 4.096e-7).abs() < 1e-20);
        assert!((algorithm_energy(HardwareKind::IonTrap, 2f64.powi(40)).unwrap() - 28.0).abs() < 1e-12);
        assert!(matches!(
            algorithm_energy(HardwareKind::IonTrap, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            algorithm_energy(HardwareKind::ClassicalHpc, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn algorithm_energy_is_the_power_curve() {
        for kind in HardwareKind::ALL {
            for k in 1..80 {
                let n = 1.7f64.powi(k);
                let m = hardware_model(kind);
                assert_eq!(algorithm_energy(kind, n).unwrap(), m.power(n).unwrap(), "{kind} {n}");
            }
        }
    }

    #[test]
    fn constants_deserialize_with_defaults() {
        let c: HardwareConstants = serde_json::from_str(r#"{"beta_ion": 0.02}"#).unwrap();
        assert_eq!(c.beta_ion, 0.02);
        assert_eq!(c.beta_rydberg, 1.5e4);
        assert!(serde_json::from_str::<HardwareConstants>(r#"{"beta_superconducting": 1}"#).is_err());
    }

    #[test]
    fn ion_crossing() {
        let c = critical_scale(
            &fig3(),
            HardwareKind::IonTrap,
            HardwareKind::ClassicalHpc,
            &HardwareConstants::default(),
            1e6,
            1e16,
        )
        .unwrap();
        assert!(c.a_star > 1.3e12 / 3.0 && c.a_star < 1.3e12 * 3.0, "{}", c.a_star);
        assert!(c.residual <= 1e-6);
    }

    #[test]
    fn rydberg_crossing_and_sign_pattern() {
        let k = HardwareConstants::default();
        let c = critical_scale(
            &fig3(),
            HardwareKind::Rydberg,
            HardwareKind::ClassicalHpc,
            &k,
            1e10,
            1e22,
        )
        .unwrap();
        assert!(c.a_star >= 1e16 && c.a_star <= 1e19, "{}", c.a_star);
        assert!(c.residual <= 1e-6);
        let (mq, mc) = (
            k.model(HardwareKind::Rydberg).unwrap(),
            k.model(HardwareKind::ClassicalHpc).unwrap(),
        );
        let (eq, ec) = energies_at_scale(&fig3(), &mq, &mc, c.a_star / 10.0).unwrap();
        assert!(eq > ec);
        let (eq, ec) = energies_at_scale(&fig3(), &mq, &mc, c.a_star * 10.0).unwrap();
        assert!(eq < ec);
    }

    #[test]
    fn no_crossing_in_small_bracket() {
        let k = HardwareConstants::default();
        let err = critical_scale(&fig3(), HardwareKind::Rydberg, HardwareKind::ClassicalHpc, &k, 1e2, 1e3).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { lo, hi, .. } if lo == 1e2 && hi == 1e3));
        let c =
            critical_scale_expanding(&fig3(), HardwareKind::Rydberg, HardwareKind::ClassicalHpc, &k, 1e2, 1e3).unwrap();
        assert!(c.hi > 1e3 && c.a_star > 1e16);
        assert!(matches!(
            critical_scale(&fig3(), HardwareKind::Rydberg, HardwareKind::ClassicalHpc, &k, 1e3, 1e2),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn crossing_search_reports_domain_errors() {
        // q_q* = a / 23 drops below one at the lower end
        let k = HardwareConstants::default();
        let err = critical_scale(
            &fig3(),
            HardwareKind::IonTrap,
            HardwareKind::ClassicalHpc,
            &k,
            1.0,
            1e16,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn asymptotic_examples() {
        let p = TwoGroupParams {
            gamma_qc: 0.0,
            ..fig3()
        };
        let (q, c) = asymptotic_quantities(&p, 100.0).unwrap();
        assert!((q - 5.0).abs() < 1e-14 && (c - 5.0).abs() < 1e-14);

        let (q, _) = asymptotic_quantities(&fig3(), 483.0).unwrap();
        let exact = two_group_equilibrium(&fig3().with_intercept(483.0)).unwrap().q_q;
        assert!((exact - 21.0).abs() < 1e-12);
        assert!((q - 483.0 * 1.9 / 39.9).abs() < 1e-12);
        assert!((q - exact).abs() / exact < 0.1);

        let degenerate = TwoGroupParams {
            gamma_qq: 1.0,
            gamma_cc: 1.0,
            gamma_qc: 1.0,
            ..fig3()
        };
        assert!(matches!(
            asymptotic_quantities(&degenerate, 1.0),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn asymptotics_converge_with_firm_count() {
        let mut last = f64::INFINITY;
        for n in [10, 30, 100, 300] {
            let p = TwoGroupParams {
                n_q: n,
                n_c: n,
                ..fig3()
            };
            let a = 50.0 * n as f64;
            let exact = two_group_equilibrium(&p.with_intercept(a)).unwrap();
            let (q, c) = asymptotic_quantities(&p, a).unwrap();
            let err = ((q - exact.q_q) / exact.q_q)
                .abs()
                .max(((c - exact.q_c) / exact.q_c).abs());
            assert!(err < last, "n={n}: {err} vs {last}");
            if n == 100 {
                assert!(err < 0.02, "{err}");
            }
            last = err;
        }
    }
}
