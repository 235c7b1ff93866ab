use eitcool_core::linalg::{displacement, hermitian_defect, max_abs, CMatrix, CVector};
use eitcool_core::model::*;
use eitcool_core::C64;
use proptest::prelude::*;

const G: f64 = 1.0;

fn deit(delta: f64, ds: f64, op: f64, os: f64, od: f64) -> CoolingScheme {
    let mut s = CoolingScheme::double_eit(TrapMode::new(ModeLabel::Axial, 0.1), delta, ZeemanField::from_splitting(ds), op, os, od);
    s.gamma_total = G;
    s
}

fn level_vec(v: &CVector, l: Level) -> C64 {
    v[l.index()]
}

proptest! {
    #[test]
    fn hamiltonian_is_hermitian(
        delta in 0.5f64..4.0, ds in -0.5f64..0.5,
        op in 0.1f64..2.0, os in 0.1f64..2.0, od in 0.0f64..2.0,
        ep in 0.0f64..0.4, es in 0.0f64..0.4, ed in 0.0f64..0.4, n in 2usize..7,
    ) {
        let s = deit(delta, ds, op, os, od).with_mode_lamb_dicke(ep, es, ed);
        let h = build_hamiltonian(&s, n).unwrap();
        prop_assert!(hermitian_defect(&h) <= 1e-12 * max_abs(&h));
    }

    #[test]
    fn displacement_is_unitary(eta in 0.0f64..1.5, n in 2usize..25) {
        let d = displacement(eta, n);
        let err = max_abs(&(&d * d.adjoint() - CMatrix::identity(n, n)));
        prop_assert!(err < 1e-12, "{}", err);
    }

    #[test]
    fn decay_rates_sum_to_gamma(branch in 0.0f64..=1.0, lambda in any::<bool>()) {
        let mut s = deit(3.0, 0.1, 0.5, 1.0, 1.0).with_branching(branch);
        if lambda {
            s.coupling = CouplingModel::Lambda;
        }
        for e in [Level::PMinus, Level::PPlus] {
            let total: f64 = decays(&s).iter().filter(|d| d.excited == e).map(|d| d.rate).sum();
            prop_assert!((total - s.gamma_total).abs() < 1e-14);
        }
    }

    #[test]
    fn deit_dark_state_is_an_eigenvector(
        delta in 0.5f64..4.0, ds in -0.5f64..0.5,
        op in 0.1f64..2.0, os in 0.1f64..2.0, od in 0.1f64..2.0,
    ) {
        let s = deit(delta, ds, op, os, od);
        let h = StructuredModel::new(&s).unwrap().electronic_hamiltonian();
        let dark = dark_state_deit(op, os, od).unwrap();
        let hd = &h * &dark;
        let e = (dark.adjoint() * &hd)[(0, 0)];
        for l in [Level::PMinus, Level::PPlus] {
            prop_assert!(level_vec(&hd, l).norm() < 1e-12, "{:?} amplitude {}", l, level_vec(&hd, l));
        }
        let resid = (&hd - &dark * e).norm();
        prop_assert!(resid < 1e-10 * (1.0 + delta), "{}", resid);
    }
}

#[test]
fn single_eit_dark_state_is_not_coupled() {
    let mut s = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, 0.1), 2.0, ZeemanField::from_splitting(0.2), 0.7, 1.9, 0.0)
        .with_coupling(CouplingModel::Lambda);
    s.gamma_total = G;
    let h = StructuredModel::new(&s).unwrap().electronic_hamiltonian();
    let hd = &h * dark_state_single(0.7, 1.9).unwrap();
    assert!(level_vec(&hd, Level::PPlus).norm() < 1e-14);
    assert!(level_vec(&hd, Level::PMinus).norm() < 1e-14);
}

#[test]
fn repumper_weights_follow_clebsch_gordan() {
    let s = deit(3.0, 0.2, 0.5, 1.0, 2.0);
    let mut got: Vec<(Level, Level, f64)> = couplings(&s)
        .into_iter()
        .filter(|c| c.laser == LaserLabel::D866)
        .map(|c| (c.ground, c.excited, c.amplitude))
        .collect();
    got.sort_by_key(|c| (c.0.index(), c.1.index()));
    let r3 = 3f64.sqrt();
    let want = [
        (Level::DMinus3, Level::PMinus, r3),
        (Level::DMinus, Level::PPlus, 1.0),
        (Level::DPlus, Level::PMinus, 1.0),
        (Level::DPlus3, Level::PPlus, r3),
    ];
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0, g.1), (w.0, w.1));
        assert!((g.2 - 0.5 * 2.0 * w.2).abs() < 1e-15, "{g:?}");
    }
}

/// Frame energies written out by hand: every coupling fixes E_g − E_e to the
/// laser detuning with P+ at zero, then −(Δ_s/2)·g_J m.
fn hand_energies(s: &CoolingScheme) -> [f64; N_LEVELS] {
    let (dp, ds, dd) = (
        s.laser(LaserLabel::Pi397).unwrap().detuning,
        s.laser(LaserLabel::Sigma397).unwrap().detuning,
        s.laser(LaserLabel::D866).unwrap().detuning,
    );
    let p_plus = 0.0;
    let s_plus = p_plus + dp;
    let s_minus = p_plus + ds;
    let p_minus = s_minus - dp;
    let mut e = [0.0; N_LEVELS];
    e[Level::SMinus.index()] = s_minus;
    e[Level::SPlus.index()] = s_plus;
    e[Level::PMinus.index()] = p_minus;
    e[Level::PPlus.index()] = p_plus;
    e[Level::DMinus3.index()] = p_minus + dd;
    e[Level::DPlus.index()] = p_minus + dd;
    e[Level::DMinus.index()] = p_plus + dd;
    e[Level::DPlus3.index()] = p_plus + dd;
    let u = -0.5 * s.delta_s();
    let gm = [-1.0, 1.0, -1.0 / 3.0, 1.0 / 3.0, -1.2, -0.4, 0.4, 1.2];
    for (x, g) in e.iter_mut().zip(gm) {
        *x += u * g;
    }
    e
}

#[test]
fn zero_eta_hamiltonian_matches_hand_built_oracle() {
    let s = deit(2.5, 0.3, 0.4, 1.1, 0.9);
    let n = 4;
    let h = build_hamiltonian(&s, n).unwrap();
    let e = hand_energies(&s);
    let (op, os, od) = (0.4, 1.1, 0.9);
    let r3 = 3f64.sqrt();
    let lines = [
        (Level::SMinus, Level::PMinus, op / 2.0),
        (Level::SPlus, Level::PPlus, op / 2.0),
        (Level::SMinus, Level::PPlus, os / 2.0),
        (Level::DMinus3, Level::PMinus, r3 * od / 2.0),
        (Level::DPlus, Level::PMinus, od / 2.0),
        (Level::DMinus, Level::PPlus, od / 2.0),
        (Level::DPlus3, Level::PPlus, r3 * od / 2.0),
    ];
    let mut want = CMatrix::zeros(8 * n, 8 * n);
    for l in Level::ALL {
        for k in 0..n {
            want[(l.index() * n + k, l.index() * n + k)] = C64::new(e[l.index()] + 0.1 * k as f64, 0.0);
        }
    }
    for (g, x, a) in lines {
        for k in 0..n {
            want[(g.index() * n + k, x.index() * n + k)] = C64::new(a, 0.0);
            want[(x.index() * n + k, g.index() * n + k)] = C64::new(a, 0.0);
        }
    }
    assert!(max_abs(&(&h - &want)) < 1e-14, "{}", max_abs(&(&h - &want)));
}

#[test]
fn raman_detunings_align_the_dark_manifold() {
    let s = deit(3.0, 0.37, 0.5, 1.0, 1.0);
    let e = StructuredModel::new(&s).unwrap().energies;
    let sp = e[Level::SPlus.index()];
    assert!((e[Level::SMinus.index()] - sp).abs() < 1e-14);
    assert!((e[Level::DPlus.index()] - sp).abs() < 1e-14);
}

#[test]
fn coupling_state_direct_matches_closed_form() {
    let (op, os, od) = (0.6, 1.3, 0.8);
    let s = deit(2.0, 0.2, op, os, od).with_mode_lamb_dicke(0.11, 0.04, 0.07);
    let m = StructuredModel::new(&s).unwrap();
    let dark = dark_state_deit(op, os, od).unwrap();
    let direct = m.cooling_operator() * &dark * C64::new(0.0, 1.0);
    let closed = lamb_dicke_coupling_state(&s).unwrap();
    for l in Level::ALL {
        let (a, b) = (level_vec(&direct, l), level_vec(&closed, l));
        let want = if l.is_excited() { b } else { C64::new(0.0, 0.0) };
        assert!((a - want).norm() < 1e-14, "{l:?}: {a} vs {want}");
    }
}

#[test]
fn thermal_distribution_is_geometric() {
    let f = FockDistribution::thermal(0.8, 60).unwrap();
    let q: f64 = 0.8 / 1.8;
    for (n, p) in f.populations.iter().enumerate() {
        let want = (1.0 - q) * q.powi(n as i32);
        assert!((p - want).abs() < 1e-12 * want.max(1e-300) + 1e-300);
    }
    assert!((f.mean() - 0.8).abs() < 1e-9);
}

#[test]
fn invalid_schemes_are_rejected() {
    let mut s = deit(3.0, 0.1, 0.5, 1.0, 1.0);
    s.mode.frequency = 0.0;
    assert!(s.validate().is_err());
    let mut s = deit(3.0, 0.1, 0.5, 1.0, 1.0);
    s.lasers.push(s.lasers[0]);
    assert!(s.validate().is_err());
    let s = deit(3.0, 0.1, -0.5, 1.0, 1.0);
    assert!(StructuredModel::new(&s).is_err());
    assert!(build_hamiltonian(&deit(3.0, 0.1, 0.5, 1.0, 1.0), 1).is_err());
}
