use eitcool_core::lambdicke::*;
use eitcool_core::model::*;
use eitcool_core::tuning::{dispersion, tune_scheme, tune_single_eit, verify_bright_states};
use eitcool_core::units::GAMMA_CA40;
use eitcool_core::C64;
use std::f64::consts::PI;
use nalgebra::DVector;
use proptest::prelude::*;

const G: f64 = 1.0;

fn params(delta: f64, ds: f64, op: f64, os: f64, od: f64, ep: f64, es: f64, ed: f64) -> DeitParams {
    DeitParams {
        delta,
        delta_s: ds,
        gamma: G,
        omega_pi: op,
        omega_sigma: os,
        omega_d: od,
        eta_pi: ep,
        eta_sigma: es,
        eta_d: ed,
    }
}

proptest! {
    #[test]
    fn radial_form_equals_general_form(
        delta in 1.0f64..4.0, ds in -0.3f64..0.3, op in 0.2f64..2.0, os in 0.2f64..2.0,
        od in 0.2f64..2.0, es in 0.01f64..0.2, w in prop_oneof![-2.0f64..-0.01, 0.01f64..2.0],
    ) {
        let p = params(delta, ds, op, os, od, 0.0, es, 0.0);
        let general = deit_response(w, &p).unwrap().s_value.re;
        let radial = deit_spectrum_radial(w, &p).unwrap();
        prop_assert!((general - radial).abs() <= 1e-10 * general.abs().max(1e-12), "{} {}", general, radial);
    }

    #[test]
    fn axial_form_equals_general_form(
        delta in 1.0f64..4.0, ds in -0.3f64..0.3, op in 0.2f64..2.0, os in 0.2f64..2.0,
        od in 0.2f64..2.0, ep in 0.01f64..0.2, ed in 0.0f64..0.2, w in prop_oneof![-2.0f64..-0.01, 0.01f64..2.0],
    ) {
        let p = params(delta, ds, op, os, od, ep, 0.0, ed);
        let general = deit_response(w, &p).unwrap().s_value.re;
        let axial = deit_spectrum_axial(w, &p).unwrap();
        prop_assert!((general - axial).abs() <= 1e-10 * general.abs().max(1e-12), "{} {}", general, axial);
    }

    #[test]
    fn spectrum_real_part_is_nonnegative(
        delta in 1.0f64..4.0, ds in -0.3f64..0.3, op in 0.2f64..2.0, os in 0.2f64..2.0,
        od in 0.2f64..2.0, ep in 0.0f64..0.2, es in 0.0f64..0.2, ed in 0.0f64..0.2,
        w in prop_oneof![-2.0f64..-0.01, 0.01f64..2.0],
    ) {
        let p = params(delta, ds, op, os, od, ep, es, ed);
        if let Ok(r) = deit_response(w, &p) {
            prop_assert!(r.s_value.re >= -1e-14);
        }
    }

    #[test]
    fn rate_matrix_conserves_probability(ap in 0.0f64..1.0, am in 0.01f64..2.0, n in 2usize..40, t in 0.0f64..5.0) {
        let m = RateMatrix::new(ap, am, n).unwrap();
        let dense = m.to_dense();
        for j in 0..=n {
            prop_assert!(dense.column(j).sum().abs() < 1e-12 * (1.0 + n as f64));
        }
        let p0 = FockDistribution::thermal(1.0, n + 1).unwrap();
        let (p, _) = m.evolve(&p0, t).unwrap();
        prop_assert!((p.populations.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.populations.iter().all(|&x| x > -1e-12));
    }
}

#[test]
fn denominators_without_repumper_reduce_to_lambda_form() {
    let (w, delta, ds, op, os) = (-0.3, 2.0, 0.12, 0.7, 1.4);
    let (a, b) = deit_ab(w, delta, ds, G, op, os, 0.0).unwrap();
    let a_hand = C64::new(w - delta - ds / 3.0 - op * op / (4.0 * w), G);
    let b_hand = C64::new(w - delta + ds / 3.0 - (op * op + os * os) / (4.0 * w), G);
    assert!((a - a_hand).norm() < 1e-14);
    assert!((b - b_hand).norm() < 1e-14);
    assert!(deit_ab(0.0, delta, ds, G, op, os, 0.0).is_err());
}

#[test]
fn lambda_closed_form_matches_matrix_resolvent() {
    for (delta, ds, op, os) in [(2.5, 0.0, 0.5, 1.5), (1.5, 0.2, 0.3, 0.9), (3.5, -0.1, 0.8, 2.2)] {
        let mut s = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, 0.1), delta, ZeemanField::from_splitting(ds), op, os, 0.0)
            .with_coupling(CouplingModel::Lambda)
            .with_mode_lamb_dicke(0.1, 0.03, 0.0);
        s.gamma_total = G;
        for w in [-0.8, -0.3, -0.02, 0.4] {
            let closed = single_eit_spectrum_scheme(w, &s);
            let matrix = resolvent_spectrum(w, &s).unwrap().re;
            assert!((closed - matrix).abs() < 1e-10 * closed.abs().max(1e-14), "{closed:e} vs {matrix:e}");
        }
    }
}

#[test]
fn spectrum_vanishes_at_two_photon_resonance() {
    let p = params(3.0, 0.1, 0.4, 1.2, 0.9, 0.08, 0.05, 0.03);
    let peak = [-0.05, -0.1, -0.2, -0.4].iter().map(|&w| deit_response(w, &p).unwrap().s_value.re).fold(0.0, f64::max);
    let near = deit_response(-1e-4, &p).unwrap().s_value.re;
    assert!(near.abs() < 1e-5 * peak, "{near:e} vs {peak:e}");
}

#[test]
fn rate_convention_samples_cooling_at_negative_frequency() {
    let (ap, am) = heating_cooling_rates(|w| Ok(if w < 0.0 { 1.0 } else { 0.25 }), 0.0, 0.1).unwrap();
    assert_eq!((ap, am), (0.5, 2.0));
    let (ap, am) = heating_cooling_rates(|w| Ok(if w < 0.0 { 1.0 } else { 0.25 }), 0.1, 0.1).unwrap();
    assert!((ap - 0.7).abs() < 1e-15 && (am - 2.2).abs() < 1e-15);
    assert!(heating_cooling_rates(|_| Ok(-1.0), 0.0, 0.1).is_err());
    assert!(heating_cooling_rates(|_| Ok(1.0), 0.0, 0.0).is_err());

    let s = tune_single_eit(&lambda_base(0.05, 0.2), 0.05, 2.0).unwrap();
    let m = RateModel::from_scheme(&s, 0.0).unwrap();
    assert!(m.a_minus > 10.0 * m.a_plus, "A- = {:e}, A+ = {:e}", m.a_minus, m.a_plus);
}

#[test]
fn diffusion_sums_population_weighted_channels() {
    let pops = [(Level::PMinus, 0.1), (Level::PPlus, 0.3)];
    let ch = [
        DiffusionChannel { excited: Level::PMinus, effective_eta: 0.2, rate: 2.0 },
        DiffusionChannel { excited: Level::PPlus, effective_eta: 0.5, rate: 1.0 },
        DiffusionChannel { excited: Level::PPlus, effective_eta: 0.1, rate: 4.0 },
    ];
    let want = 0.1 * 0.04 * 2.0 + 0.3 * 0.25 * 1.0 + 0.3 * 0.01 * 4.0;
    assert!((diffusion_coefficient(&pops, &ch).unwrap() - want).abs() < 1e-16);
    assert!(diffusion_coefficient(&[(Level::PPlus, 1.5)], &ch).is_err());
    let s = tune_single_eit(&lambda_base(0.05, 0.2), 0.05, 2.0).unwrap();
    assert_eq!(scheme_diffusion(&s, 0.0).unwrap(), 0.0);
    // The exact dark state scatters nothing; off two-photon resonance it does.
    assert!(scheme_diffusion(&s, 0.1).unwrap() < 1e-12);
    let mut off = s.clone();
    off.lasers[0].detuning += 0.3;
    assert!(scheme_diffusion(&off, 0.1).unwrap() > 1e-6);
}

#[test]
fn null_vector_is_geometric() {
    for q in [0.1, 0.5, 0.9] {
        let n = if q > 0.5 { 400 } else { 80 };
        let p = RateMatrix::new(q, 1.0, n).unwrap().null_vector().unwrap();
        for (k, &pk) in p.populations.iter().take(30).enumerate() {
            let want = (1.0 - q) * q.powi(k as i32);
            assert!((pk - want).abs() < 1e-10, "q = {q}, n = {k}: {pk} vs {want}");
        }
        let m = RateModel::new(q, 1.0, 0.0, 1.0).unwrap();
        assert!((p.mean() - m.n_ss).abs() < 1e-8 * m.n_ss.max(1.0));
        assert!((m.p0_ss - (1.0 - q)).abs() < 1e-15);
    }
}

#[test]
fn rate_equation_mean_follows_exponential() {
    let m = RateModel::new(0.2, 1.0, 0.0, 1.0).unwrap();
    let times: Vec<f64> = (0..25).map(|i| 0.25 * i as f64).collect();
    let nbar = rate_eq_nbar(&m, 3.0, 200, &times).unwrap();
    for (t, n) in times.iter().zip(&nbar) {
        assert!((n - m.nbar_exponential(3.0, *t)).abs() < 1e-6, "t = {t}");
    }
    assert!(nbar.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn symmetric_and_taylor_evolution_agree() {
    let m = RateMatrix::new(0.3, 1.1, 30).unwrap();
    let p0 = FockDistribution::thermal(2.0, 31).unwrap();
    let (p, _) = m.evolve(&p0, 1.7).unwrap();
    let q = expm_taylor(&(m.to_dense() * 1.7)) * DVector::from_column_slice(&p0.populations);
    for (a, b) in p.populations.iter().zip(q.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
}

fn lambda_base(nu: f64, op: f64) -> CoolingScheme {
    let mut s = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, nu), 2.0, ZeemanField::from_splitting(0.0), op, 1.0, 0.0)
        .with_coupling(CouplingModel::Lambda)
        .with_mode_lamb_dicke(0.05, 0.0, 0.0);
    s.gamma_total = G;
    s
}

#[test]
fn single_eit_leading_order_rate() {
    for (nu, op, delta) in [(0.05, 0.15, 3.0), (0.1, 0.2, 4.0)] {
        let s = tune_single_eit(&lambda_base(nu, op), nu, delta).unwrap();
        let m = RateModel::from_scheme(&s, 0.0).unwrap();
        let OptimalRates::SingleEit { rate, n_ss, .. } = optimal_rates(&s).unwrap() else { panic!() };
        assert!((m.cooling_rate / rate - 1.0).abs() < 0.2, "{} vs {}", m.cooling_rate, rate);
        assert!(m.n_ss < 3.0 * n_ss);
    }
}

fn si_deit(label: ModeLabel, nu: f64, delta: f64) -> CoolingScheme {
    let (ep, es, ed) = if label == ModeLabel::Axial { (0.13, 0.0, -0.0595) } else { (0.0, 0.079, 0.0) };
    let b = CoolingScheme::double_eit(TrapMode::new(label, nu), delta, ZeemanField::new(416e-6), 2.0 * PI * 2e6, 1.0, 1.0)
        .with_mode_lamb_dicke(ep, es, ed);
    tune_scheme(&b, NU_R, NU_A, delta).unwrap()
}

const NU_R: f64 = 2.0 * PI * 2.552e6;
const NU_A: f64 = 2.0 * PI * 0.9046e6;

#[test]
fn deit_radial_rate_matches_leading_order_and_axial_stays_below_ceiling() {
    for delta in [2.0, 3.4] {
        let s = si_deit(ModeLabel::Radial1, NU_R, delta * GAMMA_CA40);
        let m = RateModel::from_scheme(&s, 0.0).unwrap();
        let OptimalRates::DoubleEit { radial_rate, .. } = optimal_rates(&s).unwrap() else { panic!() };
        assert!((m.cooling_rate / radial_rate - 1.0).abs() < 0.2, "{} vs {}", m.cooling_rate, radial_rate);

        let s = si_deit(ModeLabel::Axial, NU_A, delta * GAMMA_CA40);
        let m = RateModel::from_scheme(&s, 0.0).unwrap();
        let OptimalRates::DoubleEit { axial_rate, .. } = optimal_rates(&s).unwrap() else { panic!() };
        assert!(m.cooling_rate > 0.0 && m.cooling_rate <= 1.2 * axial_rate, "{} vs {}", m.cooling_rate, axial_rate);
    }
}

#[test]
fn bright_state_tuning_closed_forms() {
    let o = bright_state_tuning(3.0, 0.1).unwrap();
    assert!((stark_shift(3.0, o) - 0.1).abs() < 1e-15);
    assert!(bright_position(3.0, o) < 0.0);
    assert!((bright_position(3.0, o) + 0.1).abs() < 0.01);
    assert!(bright_state_tuning(-1.0, 0.1).is_err());
}

#[test]
fn tuned_deit_places_both_bright_states() {
    for delta in [2.0, 3.0, 4.0] {
        let s = si_deit(ModeLabel::Axial, NU_A, delta * GAMMA_CA40);
        for nu in [NU_R, NU_A] {
            let d = dispersion(-nu, &s, s.omega_sigma(), s.omega_d()).unwrap();
            let scale = (delta * GAMMA_CA40).powi(2);
            assert!(d.abs() < 1e-9 * scale, "D0(-{nu}) = {d:e}");
        }
        let checks = verify_bright_states(&s, &[(NU_R, s.omega_sigma()), (NU_A, s.omega_d())], 1500).unwrap();
        for c in checks {
            let e = c.relative_error().unwrap();
            assert!(e < 0.05, "delta = {delta}: target {} found {:?}", c.target, c.found);
        }
    }
}

#[test]
fn tuned_single_eit_places_bright_state() {
    let s = tune_single_eit(&lambda_base(0.08, 0.2), 0.08, 3.0).unwrap();
    let o2 = s.omega_pi().powi(2) + s.omega_sigma().powi(2);
    assert!((o2 - 4.0 * 3.0 * 0.08).abs() < 1e-12);
    let c = verify_bright_states(&s, &[(0.08, o2.sqrt())], 1200).unwrap()[0];
    assert!(c.relative_error().unwrap() < 0.05, "{c:?}");
    assert!(tune_single_eit(&lambda_base(0.08, 2.0), 0.08, 3.0).is_err());
}
