mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{expand, rel};
use qcournot::closed_form::{
    block_inverse, block_inverse_explicit, homogeneous_equilibrium, homogeneous_inverse, two_group_equilibrium,
    two_group_quantities_negated_form, TwoGroupParams,
};
use qcournot::config::{Grid, Preset, RunConfig, Spacing};
use qcournot::energy::{constrained_equilibrium, ClampMode, EnergyModel};
use qcournot::hardware::{hardware_model, HardwareConstants, HardwareKind};
use qcournot::market::{build_gamma, foc_residual, prices, profits, solve_equilibrium, MarketParams};
use qcournot::numerics::{bisect, central_diff, linsolve, Bracket, DenseMatrix};
use qcournot::verify::{random_market, random_two_group};

fn market(seed: u64, max_n: usize) -> MarketParams {
    random_market(&mut ChaCha8Rng::seed_from_u64(seed), max_n)
}

fn two_group(seed: u64) -> TwoGroupParams {
    random_two_group(&mut ChaCha8Rng::seed_from_u64(seed), 8)
}

fn unit_models() -> (EnergyModel, EnergyModel) {
    (
        EnergyModel::log_power(1.0, 1.0).unwrap(),
        EnergyModel::power_law(1.0, 1.0).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn foc_vanishes_at_equilibrium(seed in any::<u64>()) {
        let m = market(seed, 12);
        let eq = solve_equilibrium(&m).unwrap();
        let max_a = m.a().iter().fold(0.0f64, |s, v| s.max(*v));
        prop_assert!(eq.foc_residual_max < 1e-8 * max_a);
    }

    #[test]
    fn nonnegative_equilibrium_profit_identity(seed in any::<u64>()) {
        let m = market(seed, 12);
        let eq = solve_equilibrium(&m).unwrap();
        if eq.all_nonnegative {
            for i in 0..m.n() {
                let th = m.theta()[i];
                prop_assert!(rel(eq.profits[i], th * eq.quantities[i].powi(2)) < 1e-10);
            }
        }
    }

    #[test]
    fn price_times_quantity_is_profit(seed in any::<u64>(), q in prop::collection::vec(-50.0f64..50.0, 12)) {
        let m = market(seed, 12);
        let q = &q[..m.n()];
        let p = prices(&m, q).unwrap();
        let pi = profits(&m, q).unwrap();
        for i in 0..m.n() {
            prop_assert!((p[i] * q[i] - pi[i]).abs() <= 1e-12 * (1.0 + pi[i].abs()));
        }
    }

    #[test]
    fn foc_matches_profit_gradient(seed in any::<u64>(), q in prop::collection::vec(0.0f64..20.0, 12)) {
        let m = market(seed, 12);
        let q = q[..m.n()].to_vec();
        let r = foc_residual(&m, &q).unwrap();
        for i in 0..m.n() {
            let f = |x: f64| {
                let mut v = q.clone();
                v[i] = x;
                profits(&m, &v).unwrap()[i]
            };
            let d = central_diff(f, q[i], 1e-6 * q[i].abs().max(1.0));
            prop_assert!((d - r[i]).abs() < 1e-4, "firm {}: fd {} analytic {}", i, d, r[i]);
        }
    }

    #[test]
    fn relabeling_firms_permutes_equilibrium(seed in any::<u64>(), shift in 0usize..12) {
        let m = market(seed, 12);
        let n = m.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let base = solve_equilibrium(&m).unwrap();
        let moved = solve_equilibrium(&m.permuted(&perm).unwrap()).unwrap();
        let scale = base.quantities.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (k, &src) in perm.iter().enumerate() {
            prop_assert!((moved.quantities[k] - base.quantities[src]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn linsolve_residual_bound(seed in any::<u64>(), b in prop::collection::vec(-100.0f64..100.0, 16)) {
        let m = market(seed, 16);
        let g = build_gamma(&m).into_matrix();
        let b = &b[..m.n()];
        let x = linsolve(&g, b).unwrap();
        let ax = g.mul_vec(&x).unwrap();
        let b_norm = b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let res = ax.iter().zip(b).fold(0.0f64, |s, (u, v)| s.max((u - v).abs()));
        prop_assert!(res <= 1e-10 * (1.0 + b_norm));
    }

    #[test]
    fn bisect_final_interval_brackets_root(root in -1e3f64..1e3, scale in 0.1f64..10.0) {
        let f = |x: f64| scale * (x - root) * (1.0 + (x - root).powi(2));
        let x = bisect(f, Bracket::new(f, -2e3, 2e3).unwrap(), 1e-12, 200).unwrap();
        let d = 1e-12 * x.abs().max(1e-300) + 1e-9;
        prop_assert!(f(x - d) <= 0.0 && f(x + d) >= 0.0);
    }

    #[test]
    fn central_diff_exact_on_quadratics(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, x in -10.0f64..10.0) {
        let d = central_diff(|t| a * t * t + b * t + c, x, 1e-3);
        let exact = 2.0 * a * x + b;
        prop_assert!((d - exact).abs() <= 1e-8 * exact.abs().max(1.0));
    }

    #[test]
    fn closed_form_matches_elimination(seed in any::<u64>()) {
        let p = two_group(seed);
        let eq = two_group_equilibrium(&p).unwrap();
        let m = expand(&p);
        let q = m.solve().unwrap();
        prop_assert!(rel(eq.q_q, q[0]) < 1e-9);
        prop_assert!(rel(eq.q_c, q[p.n_q]) < 1e-9);
        prop_assert!(rel(eq.p_q, m.price(&q, 0)) < 1e-9);
        prop_assert!(rel(eq.pi_c, m.profit(&q, p.n_q)) < 1e-9);
    }

    #[test]
    fn negated_form_agrees(seed in any::<u64>()) {
        let p = two_group(seed);
        let eq = two_group_equilibrium(&p).unwrap();
        let (q_q, q_c) = two_group_quantities_negated_form(&p).unwrap();
        prop_assert!(rel(eq.q_q, q_q) < 1e-12 && rel(eq.q_c, q_c) < 1e-12);
    }

    #[test]
    fn block_inverse_is_inverse(seed in any::<u64>()) {
        let p = two_group(seed);
        let b = block_inverse(&p).unwrap();
        let g = DenseMatrix::from_rows(&expand(&p).foc_matrix()).unwrap();
        let err = b.to_matrix(p.n_q, p.n_c).matmul(&g).unwrap()
            .max_abs_diff(&DenseMatrix::identity(p.n_q + p.n_c)).unwrap();
        prop_assert!(err <= 1e-10);
        let (q_q, q_c) = b.quantities(&p);
        let eq = two_group_equilibrium(&p).unwrap();
        prop_assert!(rel(q_q, eq.q_q) < 1e-10 && rel(q_c, eq.q_c) < 1e-10);
    }

    #[test]
    fn staged_and_explicit_block_inverse_agree(seed in any::<u64>()) {
        let p = two_group(seed);
        let s = block_inverse(&p).unwrap();
        let e = block_inverse_explicit(&p).unwrap();
        let scale = s.omega_qq.abs().max(s.omega_cc.abs());
        prop_assert!((s.omega_qq - e.omega_qq).abs() <= 1e-10 * scale);
        prop_assert!((s.omega_cc - e.omega_cc).abs() <= 1e-10 * scale);
        prop_assert!((s.omega_qc - e.omega_qc).abs() <= 1e-10 * scale);
        prop_assert_eq!(s.varpi_qq.is_some(), p.n_q > 1);
        prop_assert_eq!(s.varpi_cc.is_some(), p.n_c > 1);
    }

    #[test]
    fn swapping_groups_swaps_results(seed in any::<u64>()) {
        let p = two_group(seed);
        let a = two_group_equilibrium(&p).unwrap();
        let b = two_group_equilibrium(&p.swapped()).unwrap();
        let pairs = [(a.q_q, b.q_c), (a.p_q, b.p_c), (a.pi_q, b.pi_c), (a.q_c, b.q_q), (a.p_c, b.p_q), (a.pi_c, b.pi_q)];
        for (x, y) in pairs {
            prop_assert!(rel(x, y) < 1e-13, "{} vs {}", x, y);
        }
    }

    #[test]
    fn identical_groups_reduce_to_homogeneous(
        n_q in 1usize..10, n_c in 1usize..10, a in 0.1f64..100.0, theta in 0.5f64..5.0, frac in 0.0f64..1.0
    ) {
        let gamma = frac * theta;
        let p = TwoGroupParams {
            n_q, n_c, a_q: a, a_c: a, theta_q: theta, theta_c: theta,
            gamma_qq: gamma, gamma_cc: gamma, gamma_qc: gamma,
        };
        let eq = two_group_equilibrium(&p).unwrap();
        let h = homogeneous_equilibrium(a, theta, gamma, n_q + n_c).unwrap();
        prop_assert!(rel(eq.q_q, h.q_star) < 1e-12 && rel(eq.q_c, h.q_star) < 1e-12);
        prop_assert!(rel(eq.pi_q, h.pi_star) < 1e-12);
    }

    #[test]
    fn homogeneous_row_sum_identity(theta in 0.1f64..10.0, frac in 0.0f64..1.5, n in 2usize..40) {
        let h = homogeneous_inverse(theta, frac * theta, n).unwrap();
        prop_assert!((h.row_sum_identity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_inverts_power(log_e in -6.0f64..6.0, beta in 1e-3f64..1e3, exponent in 0.5f64..3.0) {
        let e = 10f64.powf(log_e);
        for m in [EnergyModel::log_power(beta, exponent).unwrap(), EnergyModel::power_law(beta, exponent).unwrap()] {
            let cap = m.quantity_cap(e).unwrap();
            if cap.is_finite() && cap > 1.0 + 1e-6 {
                prop_assert!(rel(m.power(cap).unwrap(), e) < 1e-9, "{:?} E={} cap={}", m, e, cap);
            }
        }
    }

    #[test]
    fn cap_and_power_are_increasing(e in 1e-3f64..1e3, step in 1.001f64..2.0) {
        for m in [EnergyModel::log_power(1.0, 2.0).unwrap(), EnergyModel::power_law(1.0, 1.0).unwrap()] {
            prop_assert!(m.quantity_cap(e * step).unwrap() > m.quantity_cap(e).unwrap());
            let q = 1.0 + e;
            prop_assert!(m.power(q * step).unwrap() > m.power(q).unwrap());
        }
    }

    #[test]
    fn constrained_output_respects_caps(seed in any::<u64>(), log_e in -3.0f64..2.0) {
        let p = two_group(seed);
        let (mq, mc) = unit_models();
        let e = 10f64.powf(log_e);
        for mode in [ClampMode::PaperClamp, ClampMode::CapSaturated, ClampMode::IteratedBestResponse] {
            let c = constrained_equilibrium(&p, &mq, &mc, e, mode).unwrap();
            prop_assert!(c.q_q <= c.cap_q + 1e-12 && c.q_c <= c.cap_c + 1e-12);
            let within = c.firms.iter().enumerate().all(|(i, &q)| q <= if i < p.n_q { c.cap_q } else { c.cap_c } + 1e-12);
            prop_assert!(within);
        }
    }

    #[test]
    fn loose_caps_give_nash(seed in any::<u64>()) {
        let p = two_group(seed);
        let eq = two_group_equilibrium(&p).unwrap();
        let mc = EnergyModel::power_law(1.0, 1.0).unwrap();
        let mq = EnergyModel::log_power(1.0, 1.0).unwrap();
        // a budget above both equilibrium draws
        let e = 2.0 * eq.q_c.max(eq.q_q.max(2.0).log2());
        for mode in [ClampMode::PaperClamp, ClampMode::CapSaturated, ClampMode::IteratedBestResponse] {
            let c = constrained_equilibrium(&p, &mq, &mc, e, mode).unwrap();
            prop_assert!(rel(c.q_q, eq.q_q) < 1e-9 && rel(c.q_c, eq.q_c) < 1e-9, "{:?}", mode);
            prop_assert!(!c.binding_q && !c.binding_c);
        }
    }

    #[test]
    fn best_response_complementarity(seed in any::<u64>(), log_e in -2.0f64..1.5) {
        let p = two_group(seed);
        let (mq, mc) = unit_models();
        let c = constrained_equilibrium(&p, &mq, &mc, 10f64.powf(log_e), ClampMode::IteratedBestResponse).unwrap();
        let m = expand(&p);
        for (i, &q) in c.firms.iter().enumerate() {
            let cap = if i < p.n_q { c.cap_q } else { c.cap_c };
            let grad = m.a[i] - (0..c.firms.len()).map(|j| m.demand[i][j] * c.firms[j]).sum::<f64>() - m.theta[i] * q;
            let at_bound = q == 0.0 || (q - cap).abs() <= 1e-9 * cap;
            prop_assert!(at_bound || grad.abs() < 1e-8, "firm {}: q={} grad={}", i, q, grad);
        }
    }

    #[test]
    fn algorithm_energy_is_power(log_n in 0.01f64..30.0) {
        let n = 10f64.powf(log_n);
        let k = HardwareConstants::default();
        for kind in HardwareKind::ALL {
            prop_assert_eq!(k.algorithm_energy(kind, n).unwrap(), hardware_model(kind).power(n).unwrap());
        }
    }

    #[test]
    fn grids_are_ordered_with_exact_ends(start in 1e-3f64..10.0, width in 1e-3f64..1e3, points in 2usize..500, log in any::<bool>()) {
        let g = Grid { spacing: if log { Spacing::Log } else { Spacing::Linear }, start, stop: start + width, points };
        g.validate().unwrap();
        let v = g.values();
        prop_assert_eq!(v.len(), points);
        prop_assert_eq!(v[0], start);
        prop_assert_eq!(v[points - 1], start + width);
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn presets_roundtrip_through_json() {
    for p in [Preset::Fig1, Preset::Fig2, Preset::Fig3] {
        let cfg = p.config();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
