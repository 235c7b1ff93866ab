use eitcool_core::model::FockDistribution;
use eitcool_core::thermometry::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const ETA: f64 = 0.1;
const OMEGA: f64 = 2.0 * PI * 50e3;

#[test]
fn ground_state_readout() {
    let g = FockDistribution::fock(0, 10).unwrap();
    for t in [1e-6, 3.7e-5, 1e-3] {
        assert_eq!(sideband_excitation(&g, ETA, OMEGA, t, -1).unwrap(), 0.0);
    }
    let pi_time = PI / (ETA * OMEGA);
    assert!((sideband_excitation(&g, ETA, OMEGA, pi_time, 1).unwrap() - 1.0).abs() < 1e-15);
    assert!(sideband_excitation(&g, ETA, OMEGA, pi_time, 2).is_err());
    assert!(sideband_excitation(&g, ETA, OMEGA, pi_time, 0).is_err());
}

#[test]
fn nbar_formula_edge_cases() {
    assert_eq!(nbar_from_sidebands(0.0, 0.4).unwrap(), 0.0);
    assert_eq!(nbar_from_sidebands(0.2, 0.4).unwrap(), 1.0);
    assert!(nbar_from_sidebands(0.4, 0.4).is_err());
    assert!(nbar_from_sidebands(0.5, 0.4).is_err());
}

#[test]
fn thermal_states_round_trip_at_small_readout_time() {
    for nbar in [0.1, 0.5, 1.0, 2.0] {
        let d = FockDistribution::thermal(nbar, 200).unwrap();
        let t = 0.05 / (ETA * OMEGA);
        let r = sideband_excitation(&d, ETA, OMEGA, t, -1).unwrap();
        let b = sideband_excitation(&d, ETA, OMEGA, t, 1).unwrap();
        let got = nbar_from_sidebands(r, b).unwrap();
        assert!((got / nbar - 1.0).abs() < 0.02, "{nbar}: {got}");
    }
}

proptest! {
    // p_{n+1} = q p_n makes RSB = q·BSB at every readout time.
    #[test]
    fn thermal_ratio_holds_at_any_readout_time(nbar in 0.05f64..3.0, x in 0.0f64..20.0) {
        let d = FockDistribution::thermal(nbar, 400).unwrap();
        let q = nbar / (nbar + 1.0);
        let t = x / (ETA * OMEGA);
        let r = sideband_excitation(&d, ETA, OMEGA, t, -1).unwrap();
        let b = sideband_excitation(&d, ETA, OMEGA, t, 1).unwrap();
        prop_assert!((r - q * b).abs() < 1e-12);
    }

    #[test]
    fn fit_is_scale_equivariant(s in 1e-3f64..1e3) {
        let t: Vec<f64> = (0..60).map(|i| i as f64 * 2e-5).collect();
        let y: Vec<f64> = t.iter().map(|&x| 2.0 * (-8e3 * x).exp() + 0.2 + 0.01 * (x * 1e5).sin()).collect();
        let a = fit_cooling_curve(&t, &y).unwrap();
        let ts: Vec<f64> = t.iter().map(|x| x * s).collect();
        let b = fit_cooling_curve(&ts, &y).unwrap();
        prop_assert!((b.rate * s / a.rate - 1.0).abs() < 1e-9);
        prop_assert!((b.t_cut / (s * a.t_cut) - 1.0).abs() < 1e-9);
        prop_assert!((b.n_infinity - a.n_infinity).abs() < 1e-9);
    }
}

#[test]
fn small_readout_time_is_exact_for_random_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = 2e-3 / (ETA * OMEGA);
    for _ in 0..20 {
        let n = rng.gen_range(3..25);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        let d = FockDistribution::new(raw.iter().map(|p| p / sum).collect()).unwrap();
        let direct: f64 = d.populations.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let r = sideband_excitation(&d, ETA, OMEGA, t, -1).unwrap();
        let b = sideband_excitation(&d, ETA, OMEGA, t, 1).unwrap();
        let got = nbar_from_sidebands(r, b).unwrap();
        assert!((got - direct).abs() <= 1e-4 * direct.max(1.0), "{got} vs {direct}");
    }
}

fn synthetic(points: usize, span: f64) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..points).map(|i| span * i as f64 / (points - 1) as f64).collect();
    let y = t.iter().map(|&x| 3.0 * (-1e4 * x).exp() + 0.1).collect();
    (t, y)
}

#[test]
fn synthetic_exponential_is_recovered() {
    let (t, y) = synthetic(200, 1.5e-3);
    let f = fit_cooling_curve(&t, &y).unwrap();
    assert!((f.amplitude / 3.0 - 1.0).abs() < 1e-6);
    assert!((f.rate / 1e4 - 1.0).abs() < 1e-6);
    assert!((f.n_infinity / 0.1 - 1.0).abs() < 1e-6);
    let t_cut = (3.0f64 / T_CUT_THRESHOLD).ln() / 1e4;
    assert!((f.t_cut / t_cut - 1.0).abs() < 1e-6, "{} vs {t_cut}", f.t_cut);
    let after: Vec<f64> = t.iter().zip(&y).filter(|(x, _)| **x > f.t_cut).map(|(_, v)| *v).collect();
    let n_ss = f.n_ss.unwrap();
    assert!((n_ss - after.iter().sum::<f64>() / after.len() as f64).abs() < 1e-15);
    let (lo, hi) = after.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(n_ss >= lo && n_ss <= hi);
}

#[test]
fn short_window_has_no_steady_state_average() {
    let (t, y) = synthetic(30, 4e-4);
    let f = fit_cooling_curve(&t, &y).unwrap();
    assert!(f.t_cut > 4e-4);
    assert!(f.n_ss.is_none());
}

#[test]
fn malformed_series_are_rejected() {
    assert!(fit_cooling_curve(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.3]).is_err());
    assert!(fit_cooling_curve(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 0.5]).is_err());
    let (t, y) = synthetic(50, 1e-3);
    assert!(rate_at_level(&t, &y, 0.1, 5.0, None).is_err());
}

#[test]
fn instantaneous_rate_of_exponential_is_constant() {
    let (t, y) = synthetic(300, 1.5e-3);
    for level in [2.0, 1.0, 0.5] {
        let r = rate_at_level(&t, &y, 0.1, level, None).unwrap();
        assert!((r / 1e4 - 1.0).abs() < 1e-4, "{level}: {r}");
    }
}

#[test]
fn stencil_halving_changes_rate_little() {
    let (t, _) = synthetic(120, 1.5e-3);
    // A non-exponential curve, like the master-equation output.
    let y: Vec<f64> = t.iter().map(|&x| 2.0 * (-1.5e4 * x).exp() + 1.2 * (-4e3 * x).exp() + 0.08).collect();
    let dt = t[1] - t[0];
    let a = rate_at_level(&t, &y, 0.08, 1.0, Some(0.5 * dt)).unwrap();
    let b = rate_at_level(&t, &y, 0.08, 1.0, Some(0.25 * dt)).unwrap();
    assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
}

#[test]
fn sideband_fit_pipeline_tracks_direct_pipeline() {
    let times: Vec<f64> = (0..40).map(|i| i as f64 * 2.5e-5).collect();
    let nbar: Vec<f64> = times.iter().map(|&t| 3.0 * (-1e4 * t).exp() + 0.1).collect();
    let t_r = default_rabi_time(ETA, OMEGA, 3.1);
    let mut rsb = Vec::new();
    let mut bsb = Vec::new();
    for &n in &nbar {
        let d = FockDistribution::thermal(n, 300).unwrap();
        rsb.push(sideband_excitation(&d, ETA, OMEGA, t_r, -1).unwrap());
        bsb.push(sideband_excitation(&d, ETA, OMEGA, t_r, 1).unwrap());
    }
    let s = SidebandSeries { times, rsb, bsb, rabi_time: t_r, sideband_eta: ETA };
    let direct = nbar_series(&s).unwrap();
    for (a, b) in direct.iter().zip(&nbar) {
        assert!((a - b).abs() < 1e-9 * b.max(1.0));
    }
    let fitted = nbar_series_from_sideband_fits(&s).unwrap();
    let f = fit_cooling_curve(&s.times, &fitted).unwrap();
    assert!(f.rate > 0.0 && f.n_infinity >= 0.0);
}
