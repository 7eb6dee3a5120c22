use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pairdeco::config::PhysicalConfig;
use pairdeco::deco::{decoherence_exponent_k, evolve_reduced_matrix};
use pairdeco::echo::{me_amplitude, phi_reversal, reversal_exponent_k, ReversalSchedule};
use pairdeco::eigdist::{exact_counts, multinomial_counts};
use pairdeco::fock::numeric_s_free;
use pairdeco::fock::TruncatedMode;
use pairdeco::pair::PairLevel;
use pairdeco::phonon::{
    acoustic_mode, free_sigma, initial_after_pulse, phi_step, rate_constants, tau_x_from_frequency,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn hermitian() -> impl Strategy<Value = DMatrix<Complex64>> {
    prop::collection::vec(complex(), 16).prop_map(|v| {
        let m = DMatrix::from_vec(4, 4, v);
        &m + m.adjoint()
    })
}

proptest! {
    #[test]
    fn gamma_ignores_common_shift(lm in complex(), ln in complex(), c in complex(),
                                  omega in 0.1..5.0f64, beta in 0.05..5.0f64, t in 0.0..20.0f64) {
        let a = decoherence_exponent_k(lm, ln, omega, beta, t).unwrap().gamma;
        let b = decoherence_exponent_k(lm + c, ln + c, omega, beta, t).unwrap().gamma;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn swapping_conjugates(lm in complex(), ln in complex(),
                           omega in 0.1..5.0f64, beta in 0.05..5.0f64, t in 0.0..20.0f64) {
        let mn = decoherence_exponent_k(lm, ln, omega, beta, t).unwrap();
        let nm = decoherence_exponent_k(ln, lm, omega, beta, t).unwrap();
        prop_assert!((mn.gamma - nm.gamma).abs() <= 1e-12 * mn.gamma.max(1.0));
        prop_assert!((nm.upsilon + mn.upsilon.conj()).norm() <= 1e-12 * mn.upsilon.norm().max(1.0));
    }

    #[test]
    fn assembly_keeps_hermiticity_and_trace(rho0 in hermitian(), l in prop::collection::vec(complex(), 4),
                                            t in 0.0..10.0f64) {
        let energies = [0.5, -1.0, 0.5, 0.0];
        let table = DMatrix::from_fn(4, 4, |m, n| {
            if m == n {
                Complex64::new(1.0, 0.0)
            } else {
                decoherence_exponent_k(l[m], l[n], 0.9, 1.1, t).unwrap().factor()
            }
        });
        let rho = evolve_reduced_matrix(&rho0, &energies, &table, t).unwrap();
        let defect = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect <= 1e-12);
        prop_assert_eq!(rho.trace(), rho0.trace());
    }

    #[test]
    fn forward_only_reversal_is_free(lm in complex(), ln in complex(), tf in 0.0..8.0f64, tb in 0.0..8.0f64,
                                     omega in 0.1..3.0f64, beta in 0.05..5.0f64) {
        let s = ReversalSchedule::new(tf, tb, 1.0).unwrap();
        let r = reversal_exponent_k(lm, ln, omega, beta, &s).unwrap();
        let f = decoherence_exponent_k(lm, ln, omega, beta, tf + tb).unwrap();
        let scale = f.gamma.abs().max(f.upsilon.norm()).max(1.0);
        prop_assert!((r.gamma - f.gamma).abs() <= 1e-12 * scale);
        prop_assert!((r.upsilon - f.upsilon).norm() <= 1e-12 * scale);
    }

    #[test]
    fn reversal_keeps_a_linear_phase(f in -1.0..-1e-6f64, tf in 0.0..5.0f64, tb in 1e-6..5.0f64) {
        prop_assert!(ReversalSchedule::new(tf, tb, f).unwrap().linear_time() > 0.0);
    }

    #[test]
    fn free_matrix_stays_physical(t in 0.0..1e-3f64) {
        let cfg = PhysicalConfig::gypsum();
        let s0 = initial_after_pulse(cfg.omega0_larmor, cfg.temperature);
        let s = free_sigma(&cfg, &s0, t).unwrap();
        prop_assert!(s.hermiticity_defect() == 0.0);
        prop_assert!(s.trace().norm() == 0.0);
        let later = free_sigma(&cfg, &s0, t * 1.5 + 1e-7).unwrap();
        for m in PairLevel::ALL {
            for n in PairLevel::ALL {
                prop_assert!(later.get(m, n).norm() <= s.get(m, n).norm());
            }
        }
    }

    #[test]
    fn step_weights_bounded(x in -1e-6..1e-6f64, t in 0.0..1e-9f64) {
        let p = phi_step(x, t, 4570.0) / PI;
        prop_assert!((0.0..=1.0).contains(&p));
        let q = phi_reversal(x, t, 4570.0) / PI;
        prop_assert!((-0.5..=1.75).contains(&q));
    }

    #[test]
    fn echo_amplitude_decays(t in 0.0..1e-3f64, dt in 0.0..1e-4f64) {
        let cfg = PhysicalConfig::gypsum();
        let a = me_amplitude(&cfg, t).unwrap();
        let b = me_amplitude(&cfg, t + dt).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0 && b <= a);
    }

    #[test]
    fn counts_two_ways(n in 1u32..=24) {
        let t = exact_counts(n).unwrap();
        prop_assert_eq!(&t, &multinomial_counts(n).unwrap());
        prop_assert_eq!(t.support(), (-2 * n as i64, n as i64));
    }

    #[test]
    fn tau_x_depends_on_d_only_through_omega0(d in 0.1e-9..0.3e-9f64, theta in 0.0..0.9f64) {
        let cfg = PhysicalConfig { d, theta, ..PhysicalConfig::gypsum() };
        let r = rate_constants(&cfg);
        let other = tau_x_from_frequency(r.nu_hat0, cfg.v_s, cfg.n_pairs);
        prop_assert!((r.tau_x / other - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_trace_bounded(lm in complex(), ln in complex(), t in 0.0..6.0f64) {
        let mode = TruncatedMode::new(40, 1.0).unwrap();
        let s = numeric_s_free(lm * 0.5, ln * 0.5, &mode, 2.0, t).unwrap();
        prop_assert!(s.norm() <= 1.0 + 1e-8);
        let swapped = numeric_s_free(ln * 0.5, lm * 0.5, &mode, 2.0, t).unwrap();
        prop_assert!((s - swapped.conj()).norm() < 1e-12);
    }
}

/// ΣΓ over a dense acoustic mode family never decreases from t to 2t once the
/// linear regime has set in.
#[test]
fn mode_family_decay_grows() {
    let cfg = PhysicalConfig::gypsum();
    let lm = Complex64::new(
        pairdeco::phonon::pair_eigenvalue(&cfg, PairLevel::TPlus),
        0.0,
    );
    let ln = Complex64::new(
        pairdeco::phonon::pair_eigenvalue(&cfg, PairLevel::TZero),
        0.0,
    );
    let kmax = PI / cfg.a;
    let modes: Vec<_> = (1..=4000)
        .map(|q| acoustic_mode(kmax * q as f64 / 4000.0, &cfg))
        .collect();
    let total = |t: f64| -> f64 {
        modes
            .iter()
            .map(|m| {
                let e = decoherence_exponent_k(lm * m.g, ln * m.g, m.omega, cfg.beta(), t).unwrap();
                e.gamma
            })
            .sum()
    };
    let start = pairdeco::phonon::linear_regime_start(&cfg);
    for i in 0..20 {
        let t = start * (1.0 + i as f64);
        assert!(total(2.0 * t) >= total(t));
    }
}
