use eitcool_core::lambdicke::*;
use eitcool_core::model::*;
use eitcool_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: f64 = 1.0;

fn random_deit(rng: &mut ChaCha8Rng) -> CoolingScheme {
    let delta = rng.gen_range(1.0..4.0) * G;
    let ds = rng.gen_range(-0.3..0.3) * G;
    let mut s = CoolingScheme::double_eit(
        TrapMode::new(ModeLabel::Axial, 0.05),
        delta,
        ZeemanField::from_splitting(ds),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
    )
    .with_mode_lamb_dicke(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2));
    s.gamma_total = G;
    s
}

fn random_lambda(rng: &mut ChaCha8Rng) -> CoolingScheme {
    let delta = rng.gen_range(1.0..4.0) * G;
    let ds = rng.gen_range(-0.3..0.3) * G;
    let mut s = CoolingScheme::single_eit(
        TrapMode::new(ModeLabel::Axial, 0.05),
        delta,
        ZeemanField::from_splitting(ds),
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        0.0,
    )
    .with_coupling(CouplingModel::Lambda)
    .with_mode_lamb_dicke(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2), 0.0);
    s.gamma_total = G;
    s
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn deit_closed_form_matches_regression_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s = random_deit(&mut rng);
        for w in [-0.37, -0.05, 0.21, 1.3] {
            let exact = numeric_spectrum(&s, w).unwrap();
            let closed = deit_spectrum(w, &s).unwrap();
            let matrix = resolvent_spectrum(w, &s).unwrap();
            worst = worst.max(rel(closed, exact)).max(rel(matrix, exact));
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn single_eit_matches_regression_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let s = random_lambda(&mut rng);
        for w in [-0.37, -0.05, 0.21, 1.3] {
            let exact = numeric_spectrum(&s, w).unwrap().re;
            let closed = single_eit_spectrum_scheme(w, &s);
            worst = worst.max((closed - exact).abs() / exact.abs().max(1e-300));
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}
