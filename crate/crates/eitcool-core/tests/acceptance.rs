//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::f64::consts::PI;
use std::time::Instant;

use eitcool_core::lambdicke::*;
use eitcool_core::linalg::max_abs;
use eitcool_core::lindblad::*;
use eitcool_core::model::*;
use eitcool_core::sequence::{run_sequence, Pulse, PulseSequence};
use eitcool_core::thermometry::*;
use eitcool_core::ttm::*;
use eitcool_core::tuning::{tune_scheme, tune_single_eit};
use eitcool_core::units::GAMMA_CA40;
use eitcool_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const G: f64 = GAMMA_CA40;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

// 1. Closed-form spectra against the regression-theorem spectrum.
fn spectrum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let omegas = [-0.37, -0.05, 0.21, 1.3];
    let (mut seit, mut general, mut radial, mut axial) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let delta = rng.gen_range(1.0..4.0);
        let ds = rng.gen_range(-0.3..0.3);
        let (op, os, od) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0));
        let (ep, es, ed) = (rng.gen_range(0.01..0.2), rng.gen_range(0.01..0.2), rng.gen_range(-0.2..0.2));

        let mut l = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, 0.05), delta, ZeemanField::from_splitting(ds), op, os, 0.0)
            .with_coupling(CouplingModel::Lambda)
            .with_mode_lamb_dicke(ep, es, 0.0);
        l.gamma_total = 1.0;
        let d = |e: (f64, f64, f64)| {
            let mut s = CoolingScheme::double_eit(TrapMode::new(ModeLabel::Axial, 0.05), delta, ZeemanField::from_splitting(ds), op, os, od)
                .with_mode_lamb_dicke(e.0, e.1, e.2);
            s.gamma_total = 1.0;
            s
        };
        let (full, rad, ax) = (d((ep, es, ed)), d((0.0, es, 0.0)), d((ep, 0.0, ed)));
        for w in omegas {
            let exact = numeric_spectrum(&l, w).unwrap().re;
            seit = seit.max((single_eit_spectrum_scheme(w, &l) - exact).abs() / exact.abs());
            general = general.max(rel(deit_spectrum(w, &full).unwrap(), numeric_spectrum(&full, w).unwrap()));
            let exact = numeric_spectrum(&rad, w).unwrap().re;
            radial = radial.max((deit_spectrum_radial(w, &DeitParams::from_scheme(&rad)).unwrap() - exact).abs() / exact.abs());
            let exact = numeric_spectrum(&ax, w).unwrap().re;
            axial = axial.max((deit_spectrum_axial(w, &DeitParams::from_scheme(&ax)).unwrap() - exact).abs() / exact.abs());
        }
    }
    let worst = seit.max(general).max(radial).max(axial);
    outcome(
        worst < 1e-6,
        format!("worst relative error: single EIT {seit:.1e}, D-EIT general {general:.1e}, radial {radial:.1e}, axial {axial:.1e}"),
    )
}

// 2. Rate-equation null vector and mean.
fn rate_equation() -> Outcome {
    let mut null_err = 0.0f64;
    let mut mean_err = 0.0f64;
    for q in [0.1f64, 0.5, 0.9] {
        let m = RateMatrix::new(q, 1.0, 60).unwrap();
        let p = m.null_vector().unwrap();
        let norm = (1.0 - q) / (1.0 - q.powi(61));
        for (k, pk) in p.populations.iter().enumerate() {
            null_err = null_err.max((pk - norm * q.powi(k as i32)).abs());
        }
        // The exponential law holds for the untruncated chain; 0.9 needs a
        // longer ladder than 60 for the tail to be negligible.
        let n_max = if q > 0.5 { 400 } else { 60 };
        let model = RateModel::new(q, 1.0, 0.0, 1.0).unwrap();
        let step = model.matrix(n_max).unwrap().transition(0.3).unwrap();
        let mut p = nalgebra::DVector::from_vec(FockDistribution::thermal(2.0, n_max + 1).unwrap().populations);
        for k in 0..=20 {
            let n: f64 = p.iter().enumerate().map(|(i, x)| i as f64 * x).sum();
            mean_err = mean_err.max((n - model.nbar_exponential(2.0, 0.3 * k as f64)).abs());
            p = &step * p;
        }
    }
    outcome(null_err < 1e-10 && mean_err < 1e-6, format!("null vector error {null_err:.1e}, mean error {mean_err:.1e}"))
}

// 3. Linear-response rate of a Markovian semigroup.
fn linear_response() -> Outcome {
    let (ap, am) = (3e3, 1e4);
    let p = RateEquationPropagator { matrix: RateMatrix::new(ap, am, 150).unwrap() };
    let s = extract_maps(&p, 1e-7, 30).unwrap();
    let mut worst = 0.0f64;
    for n0 in [0.5, 1.0, 5.0] {
        for r in generalized_rate(&s, n0, 1e6).unwrap() {
            worst = worst.max((r.rate.unwrap_or(f64::NAN) / (am - ap) - 1.0).abs());
        }
    }
    outcome(worst < 1e-6, format!("worst relative deviation from A- - A+: {worst:.1e}"))
}

fn dark_deit(eta: (f64, f64, f64)) -> CoolingScheme {
    CoolingScheme::double_eit(TrapMode::new(ModeLabel::Axial, 0.1 * G), 3.0 * G, ZeemanField::new(416e-6), 0.3 * G, 1.2 * G, 0.8 * G)
        .with_mode_lamb_dicke(eta.0, eta.1, eta.2)
}

// 4. Master-equation sanity.
fn master_equation() -> Outcome {
    let s = dark_deit((0.1, 0.05, -0.05));
    let dur = 20e-6;
    let (_, _, stats) = cooling_trajectory(&s, CoolingStart::thermal(1.0), dur, 8, &PropagationOptions::with_intervals(20)).unwrap();
    let drift_per_ms = stats.trace_drift / (dur * 1e3);

    let mut off = CoolingScheme::bare(TrapMode::new(ModeLabel::Axial, 0.05 * G), 0.0, ZeemanField::new(0.0));
    off.lasers.clear();
    let p = QuantumState::product(Level::PPlus, &FockDistribution::fock(0, 3).unwrap()).unwrap();
    let (traj, _, _) = propagate_scheme(&off, &p, 5.0 / G, &PropagationOptions::with_intervals(20)).unwrap();
    let decay = traj.times.iter().zip(&traj.p_excited).map(|(t, p)| (p - (-G * t).exp()).abs()).fold(0.0, f64::max);

    let d = dark_deit((0.0, 0.0, 0.0));
    let dark = dark_state_deit(d.omega_pi(), d.omega_sigma(), d.omega_d()).unwrap();
    let start = QuantumState::from_electronic(&dark, &FockDistribution::fock(2, 4).unwrap()).unwrap();
    let opts = PropagationOptions { tolerance: 1e-12, intervals: 10, ..Default::default() };
    let (_, end, _) = propagate_scheme(&d, &start, 20.0 / G, &opts).unwrap();
    let moved = max_abs(&(&end.rho - &start.rho));

    outcome(
        drift_per_ms <= 1e-9 && decay < 1e-6 && moved < 1e-10,
        format!("trace drift {drift_per_ms:.1e}/ms, decay error {decay:.1e}, dark-state change {moved:.1e}"),
    )
}

// 5. Lamb-Dicke limit: master equation against the rate equation.
fn lamb_dicke_limit() -> Outcome {
    let eta = 0.04;
    let s = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, G), G, ZeemanField::new(0.0), G, 7f64.sqrt() * G, 0.0)
        .with_coupling(CouplingModel::Lambda)
        .with_mode_lamb_dicke(eta, 0.0, 0.0);
    let ld = RateModel::from_scheme(&s, 0.0).unwrap();
    let dur = 8.0 / ld.cooling_rate;
    let (traj, _, _) = cooling_trajectory(&s, CoolingStart::thermal(1.0), dur, 17, &PropagationOptions::with_intervals(400)).unwrap();
    let fit = fit_cooling_curve(&traj.times, &traj.nbar).unwrap();
    let n_ss = fit.n_ss.unwrap_or(fit.n_infinity);
    let dr = (fit.rate / ld.cooling_rate - 1.0).abs();
    let dn = (n_ss / ld.n_ss - 1.0).abs();
    outcome(
        eta * s.omega_pi() / s.mode.frequency <= 0.05 && dr < 0.10 && dn < 0.15,
        format!(
            "rate {:.4e}/s vs {:.4e}/s ({:.1}%), n_ss {n_ss:.4} vs {:.4} ({:.1}%)",
            fit.rate,
            ld.cooling_rate,
            100.0 * dr,
            ld.n_ss,
            100.0 * dn
        ),
    )
}

// 6. Beyond the Lamb-Dicke regime.
fn beyond_lamb_dicke() -> Outcome {
    let (nu, delta) = (0.2 * G, 2.0 * G);
    let omega_pi = 0.7 * bright_state_tuning(delta, nu).unwrap();
    let base = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, nu), delta, ZeemanField::new(0.0), omega_pi, 0.0, 0.0)
        .with_coupling(CouplingModel::Lambda)
        .with_mode_lamb_dicke(0.25, 0.0, 0.0);
    let s = tune_single_eit(&base, nu, delta).unwrap();
    let ld = RateModel::from_scheme(&s, 0.0).unwrap();
    let bound = 0.3 * nu * nu / (2.0 * s.gamma());
    let regime = ld.cooling_rate > bound;

    let opts = PropagationOptions::with_intervals(300);
    let (traj, _, _) = cooling_trajectory(&s, CoolingStart::thermal(3.0), 12.0 / ld.cooling_rate, 30, &opts).unwrap();
    let at_one = rate_at_nbar_one(&traj).unwrap_or(f64::NAN);

    let prop = MasterEquationPropagator::new(s.clone(), 20);
    let series = extract_maps(&prop, 0.1 / ld.cooling_rate, 30).unwrap();
    let early = |n0: f64| generalized_rate(&series, n0, nu).unwrap();
    let curves: Vec<Vec<ThermoResponse>> = [0.5, 1.0, 2.0].iter().map(|&n| early(n)).collect();
    let first: Vec<f64> = curves.iter().map(|c| c[0].rate.unwrap_or(f64::NAN)).collect();
    let last: Vec<f64> = curves.iter().map(|c| c.last().unwrap().rate.unwrap_or(f64::NAN)).collect();
    let ordered = first.windows(2).all(|w| w[1] < w[0]);
    let recovers = first.iter().zip(&last).all(|(a, b)| b > a);
    outcome(
        regime && at_one < ld.cooling_rate && ordered && recovers,
        format!(
            "R_LD {:.3e}/s (bound {bound:.3e}), rate at nbar=1 {at_one:.3e}/s; early R(n0=0.5,1,2) = {:.3e}, {:.3e}, {:.3e}; late {:.3e}, {:.3e}, {:.3e}",
            ld.cooling_rate, first[0], first[1], first[2], last[0], last[1], last[2]
        ),
    )
}

const NU_R: f64 = 2.0 * PI * 2.552e6;
const NU_A: f64 = 2.0 * PI * 0.9046e6;

// 7. Structure of the tuned probe scans.
fn scan_structure() -> Outcome {
    let grid: Vec<f64> = (0..=1000).map(|i| 2.0 * PI * (-1e6 + 1e4 * i as f64)).collect();
    let b = CoolingScheme::double_eit(TrapMode::new(ModeLabel::Axial, NU_A), 3.0 * G, ZeemanField::new(416e-6), 2.0 * PI * 2e6, 0.0, 0.0)
        .with_geometry(0.13, 0.079, -0.0595);
    let d = tune_scheme(&b, NU_R, NU_A, 3.0 * G).unwrap();
    let scan = spectrum_scan(&d, &grid, ScanMode::weak_probe(LaserLabel::Sigma397, &d)).unwrap();
    let peak = scan.peak();
    let dark = scan.minima().filter(|m| m.rate <= 1e-6 * peak).count();
    let near = |nu: f64, pump: f64| {
        let w = bright_width(d.delta, pump, nu, d.gamma());
        scan.maxima().any(|m| (m.delta - nu).abs() <= w)
    };
    let bright = near(NU_R, d.omega_sigma()) && near(NU_A, d.omega_d());

    let sb = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, NU_A), 3.0 * G, ZeemanField::new(416e-6), 2.0 * PI * 2e6, 0.0, 2.0 * PI * 10e6)
        .with_geometry(0.13, 0.079, 0.0);
    let se = tune_single_eit(&sb, NU_A, 3.0 * G).unwrap();
    let single = spectrum_scan(&se, &grid, ScanMode::weak_probe(LaserLabel::Pi397, &se)).unwrap();
    let single_max = single.maxima().count();
    outcome(
        dark >= 2 && bright && single_max == 1,
        format!("D-EIT: {dark} dark points, bright maxima at both modes: {bright}; single EIT: {single_max} maxima"),
    )
}

// 8. Thermometry round trip and the cooling-curve fit.
fn thermometry() -> Outcome {
    let (eta, omega) = (0.1, 2.0 * PI * 50e3);
    let t = 0.05 / (eta * omega);
    let mut worst = 0.0f64;
    for nbar in [0.1, 0.5, 1.0, 2.0] {
        let d = FockDistribution::thermal(nbar, 200).unwrap();
        let r = sideband_excitation(&d, eta, omega, t, -1).unwrap();
        let b = sideband_excitation(&d, eta, omega, t, 1).unwrap();
        worst = worst.max((nbar_from_sidebands(r, b).unwrap() / nbar - 1.0).abs());
    }
    let times: Vec<f64> = (0..200).map(|i| 1.5e-3 * i as f64 / 199.0).collect();
    let y: Vec<f64> = times.iter().map(|&x| 3.0 * (-1e4 * x).exp() + 0.1).collect();
    let f = fit_cooling_curve(&times, &y).unwrap();
    let fit_err = (f.amplitude / 3.0 - 1.0).abs().max((f.rate / 1e4 - 1.0).abs()).max((f.n_infinity / 0.1 - 1.0).abs());
    outcome(worst < 0.02 && fit_err < 1e-6, format!("round-trip error {:.2}%, fit error {fit_err:.1e}", 100.0 * worst))
}

fn seit_pulse(name: &str, target: f64) -> Pulse {
    let base = CoolingScheme::single_eit(TrapMode::new(ModeLabel::Axial, target), G, ZeemanField::new(416e-6), 0.3 * G, G, 0.5 * G)
        .with_geometry(0.1, 0.1, 0.0);
    Pulse { name: name.into(), scheme: tune_single_eit(&base, target, G).unwrap(), duration: 20e-6 }
}

fn ld_n_ss(scheme: &CoolingScheme, mode: TrapMode) -> f64 {
    let mut s = scheme.clone();
    s.mode = mode;
    RateModel::from_scheme(&s, 0.0).map_or(f64::INFINITY, |m| m.n_ss)
}

// 9. Reheating in a pulse sequence and the single-pulse D-EIT advantage.
fn sequence() -> Outcome {
    let radial = TrapMode::new(ModeLabel::Radial1, 0.25 * G);
    let axial = TrapMode::new(ModeLabel::Axial, 0.1 * G);
    let opts = PropagationOptions::with_intervals(40);

    let seq = PulseSequence::new(vec![seit_pulse("radial", radial.frequency), seit_pulse("axial", axial.frequency)]);
    let second = ld_n_ss(&seq.pulses[1].scheme, radial);
    let run = run_sequence(&seq, &[(radial, 2.0)], 14, &opts).unwrap();
    let ends = &run[0].pulse_ends;
    let reheats = ends[1].nbar > ends[0].nbar && (ends[1].nbar - second).abs() < (ends[0].nbar - second).abs();
    let off_resonant = [ld_n_ss(&seq.pulses[0].scheme, axial), ld_n_ss(&seq.pulses[1].scheme, radial)];

    let b = CoolingScheme::double_eit(axial, 3.0 * G, ZeemanField::new(416e-6), 0.1 * G, 0.0, 0.0).with_geometry(0.1, 0.1, -0.05);
    // Steady states come from the rate model: the axial D-EIT rate at this
    // scale is far too slow for a propagated pulse to reach its floor.
    let d = tune_scheme(&b, radial.frequency, axial.frequency, 3.0 * G).unwrap();
    let deit = [ld_n_ss(&d, radial), ld_n_ss(&d, axial)];

    outcome(
        reheats && off_resonant.iter().all(|&n| n > 1.0) && deit.iter().all(|&n| n < 0.5),
        format!(
            "radial nbar {:.3} -> {:.3} toward {second:.3}; single-EIT off-resonant n_ss {:.2}, {:.2}; D-EIT n_ss {:.3}, {:.3}",
            ends[0].nbar, ends[1].nbar, off_resonant[0], off_resonant[1], deit[0], deit[1]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("spectrum oracle equivalence", spectrum_oracle),
        ("rate-equation exactness", rate_equation),
        ("linear-response identity", linear_response),
        ("master-equation sanity", master_equation),
        ("Lamb-Dicke limit convergence", lamb_dicke_limit),
        ("beyond Lamb-Dicke behaviour", beyond_lamb_dicke),
        ("D-EIT scan structure", scan_structure),
        ("thermometry round trip", thermometry),
        ("sequential-pulse reheating", sequence),
    ];
    // Numeric arguments select criteria by index; none runs them all.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: Vec<(usize, &str, fn() -> Outcome)> =
        criteria.iter().enumerate().map(|(i, (n, f))| (i + 1, *n, *f)).filter(|c| only.is_empty() || only.contains(&c.0)).collect();
    let results: Vec<(Outcome, f64)> = std::thread::scope(|sc| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, f)| {
                sc.spawn(move || {
                    let t = Instant::now();
                    let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                        outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
                    });
                    (o, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for ((i, name, _), (o, secs)) in criteria.iter().zip(&results) {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {i} {name} ({secs:.1} s): {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
