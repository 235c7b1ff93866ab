//! The six experiment kinds. Each returns a [`Report`]; nothing here touches
//! the file system except reading inputs named in the scenario.

use std::f64::consts::TAU;
use std::path::Path;

use rayon::prelude::*;

use eitcool_core::lambdicke::{deit_response, optimal_rates, resolvent_spectrum, scheme_diffusion, OptimalRates, RateModel};
use eitcool_core::lindblad::{
    find_extrema, propagate_scheme, ExtremumKind, PropagationOptions, QuantumState, RateScanner, ScanMode, ScanPoint,
    Trajectory,
};
use eitcool_core::model::{CoolingScheme, FockDistribution, LaserLabel, Level, TrapMode};
use eitcool_core::sequence::{run_mode, Pulse, PulseSequence};
use eitcool_core::thermometry::{
    default_rabi_time, fit_cooling_curve, nbar_from_sidebands, nbar_series_from_sideband_fits, rate_at_level,
    sideband_excitation, FitResult, SidebandSeries,
};
use eitcool_core::ttm::{
    extract_maps, extrapolate, generalized_rate, transfer_tensors, DynamicalMapSeries, MasterEquationPropagator,
    PopulationPropagator, RateEquationPropagator, DEFAULT_DT_GAMMA, DEFAULT_STEPS,
};

use crate::assemble::{cooling_scheme, emission_eta, frequency, scheme_mode, time, trap_modes};
use crate::config::{ConfigError, Experiment, Readout, Scenario, SchemeConfig, SchemeKind};
use crate::error::{Context, RunError};
use crate::output::{num, opt, Report, Table};

/// Numerical settings shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub fock: usize,
    pub tolerance: f64,
}

impl Settings {
    fn propagation(&self, intervals: usize) -> PropagationOptions {
        PropagationOptions { tolerance: self.tolerance, ..PropagationOptions::with_intervals(intervals) }
    }
}

const DEFAULT_INTERVALS: usize = 200;
const SEQUENCE_CAVEAT: &str = "modes are simulated independently; cross-talk from a hot spectator mode is not included";

fn mhz(x: f64) -> f64 {
    x / TAU / 1e6
}

fn field_err(field: impl Into<String>, reason: impl Into<String>) -> RunError {
    ConfigError::field(field, reason).into()
}

fn label(s: &str, field: &str) -> Result<LaserLabel, RunError> {
    LaserLabel::parse(s).map_err(|e| field_err(field, e.to_string()))
}

fn nbar0_or(explicit: Option<f64>, mode: Option<f64>, field: &str) -> Result<f64, RunError> {
    let n = explicit.or(mode).ok_or_else(|| field_err(field, "initial nbar0 needed (here or on the mode)"))?;
    if !(n >= 0.0) || !n.is_finite() {
        return Err(field_err(field, "must be finite and >= 0"));
    }
    Ok(n)
}

pub fn run_experiment(scn: &Scenario, settings: &Settings, base_dir: &Path) -> Result<Report, RunError> {
    if settings.fock < 2 {
        return Err(field_err("scenario.fock", "need at least 2 Fock states"));
    }
    if !(settings.tolerance > 0.0) {
        return Err(field_err("scenario.tolerance", "must be > 0"));
    }
    match &scn.experiment {
        Experiment::SpectrumScan { start, stop, points, mode, beam, probe_rabi, analytic } => spectrum_scan(
            scn,
            ScanArgs { start, stop, points: *points, mode: mode.as_deref(), beam: beam.as_deref(), probe_rabi: probe_rabi.as_ref(), analytic: analytic.unwrap_or(false) },
        ),
        Experiment::CoolingTrajectory { duration, nbar0, intervals, checkpoint, restore } => {
            let intervals = intervals.unwrap_or(DEFAULT_INTERVALS).max(1);
            if scn.pulses.is_empty() {
                let duration = duration.as_ref().ok_or_else(|| field_err("experiment.duration", "required without pulses"))?;
                let duration = time(duration, "experiment.duration")?;
                let restore = restore.as_ref().map(|r| base_dir.join(r));
                cooling_trajectory(scn, settings, duration, *nbar0, intervals, checkpoint.unwrap_or(false), restore.as_deref())
            } else {
                pulse_sequence(scn, settings, *nbar0, intervals)
            }
        }
        Experiment::RabiMap { pump, probe, duration, nbar0, readout } => {
            rabi_map(scn, settings, pump, probe, time(duration, "experiment.duration")?, *nbar0, readout)
        }
        Experiment::DetuningSweep { deltas, engine, duration, nbar0 } => {
            detuning_sweep(scn, settings, deltas, engine.as_deref(), duration.as_ref(), *nbar0)
        }
        Experiment::TtmRate { nbar0, dt, steps, horizon, engine } => {
            ttm_rate(scn, settings, nbar0, dt.as_ref(), *steps, *horizon, engine.as_deref())
        }
        Experiment::ThermometryReplay { readout, input, duration, nbar0, intervals, pipeline } => thermometry_replay(
            scn,
            settings,
            readout,
            input.as_ref().map(|i| base_dir.join(i)).as_deref(),
            duration.as_ref(),
            *nbar0,
            intervals.unwrap_or(DEFAULT_INTERVALS).max(1),
            pipeline.as_deref(),
        ),
    }
}

fn main_scheme(scn: &Scenario) -> Result<(CoolingScheme, Option<f64>), RunError> {
    let (mode, nbar0) = scheme_mode(scn)?;
    Ok((cooling_scheme(&scn.scheme, mode, "scheme")?, nbar0))
}

fn grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect()
}

struct ScanArgs<'a> {
    start: &'a crate::quantity::Quantity,
    stop: &'a crate::quantity::Quantity,
    points: usize,
    mode: Option<&'a str>,
    beam: Option<&'a str>,
    probe_rabi: Option<&'a crate::quantity::Quantity>,
    analytic: bool,
}

fn spectrum_scan(scn: &Scenario, a: ScanArgs<'_>) -> Result<Report, RunError> {
    let (scheme, _) = main_scheme(scn)?;
    let g = scheme.gamma_total;
    let start = frequency(a.start, g, "experiment.start")?;
    let stop = frequency(a.stop, g, "experiment.stop")?;
    if a.points < 3 {
        return Err(field_err("experiment.points", "need at least 3 points"));
    }
    if !(stop > start) {
        return Err(field_err("experiment.stop", "must exceed start"));
    }
    let beam = label(a.beam.unwrap_or("sigma397"), "experiment.beam")?;
    let mode = match a.mode.unwrap_or("probe") {
        "probe" => {
            let rabi = match a.probe_rabi {
                Some(q) => frequency(q, g, "experiment.probe_rabi")?,
                None => 1e-3 * g,
            };
            ScanMode::Probe { label: beam, rabi }
        }
        "laser" => ScanMode::Laser { label: beam },
        other => return Err(field_err("experiment.mode", format!("`{other}`: expected probe or laser"))),
    };
    let deltas = grid(start, stop, a.points);
    let scanner = RateScanner::new(&scheme, mode).context(|| "spectrum_scan".into())?;
    let points: Vec<ScanPoint> = deltas
        .par_iter()
        .map(|&d| match scanner.rate(d) {
            Ok(r) => ScanPoint { delta: d, rate: Some(r), flag: None },
            Err(e) => ScanPoint { delta: d, rate: None, flag: Some(e.to_string()) },
        })
        .collect();
    let extrema = find_extrema(&points, |d| scanner.rate(d));

    let mut rep = Report::default();
    let mut scan = Table::new("scan", &["delta_rad_s", "delta_mhz", "rate_per_s", "flag"]);
    for p in &points {
        if let Some(f) = &p.flag {
            rep.warnings.push(format!("scan point {:.6} MHz failed: {f}", mhz(p.delta)));
        }
        scan.push(vec![num(p.delta), num(mhz(p.delta)), opt(p.rate), p.flag.clone().unwrap_or_default()]);
    }
    let mut ext = Table::new("extrema", &["kind", "delta_rad_s", "delta_mhz", "rate_per_s"]);
    for e in &extrema {
        let kind = if e.kind == ExtremumKind::Maximum { "maximum" } else { "minimum" };
        ext.push(vec![kind.into(), num(e.delta), num(mhz(e.delta)), num(e.rate)]);
    }
    let peak = points.iter().filter_map(|p| p.rate).fold(0.0, f64::max);
    rep.add_summary("peak_rate_per_s", num(peak));
    rep.add_summary("maxima", extrema.iter().filter(|e| e.kind == ExtremumKind::Maximum).count().to_string());
    rep.add_summary("minima", extrema.iter().filter(|e| e.kind == ExtremumKind::Minimum).count().to_string());
    for (m, _) in trap_modes(scn)? {
        rep.add_summary(&format!("mode_{}_mhz", m.label.name()), num(mhz(m.frequency)));
    }
    scheme_summary(&mut rep, &scheme);
    rep.tables.push(scan);
    rep.tables.push(ext);
    if a.analytic {
        rep.tables.push(analytic_spectrum(&scheme, scn.scheme.kind, &deltas));
    }
    Ok(rep)
}

fn scheme_summary(rep: &mut Report, scheme: &CoolingScheme) {
    rep.add_summary("delta_rad_s", num(scheme.delta));
    rep.add_summary("delta_s_rad_s", num(scheme.delta_s()));
    for l in &scheme.lasers {
        rep.add_summary(&format!("{}_rabi_mhz", l.label), num(mhz(l.rabi_frequency)));
        rep.add_summary(&format!("{}_detuning_mhz", l.label), num(mhz(l.detuning)));
    }
}

/// S(ω) at ω = −δ, with a(ω), b(ω) for D-EIT schemes.
fn analytic_spectrum(scheme: &CoolingScheme, kind: SchemeKind, deltas: &[f64]) -> Table {
    let mut t = Table::new(
        "spectrum",
        &["omega_rad_s", "re_S_s", "im_S_s", "a_re_rad_s", "a_im_rad_s", "b_re_rad_s", "b_im_rad_s"],
    );
    let params = eitcool_core::lambdicke::DeitParams::from_scheme(scheme);
    let rows: Vec<Vec<String>> = deltas
        .par_iter()
        .map(|&d| {
            let w = -d;
            let mut row = vec![num(w)];
            if kind == SchemeKind::DoubleEit {
                match deit_response(w, &params) {
                    Ok(r) => row.extend(
                        [r.s_value.re, r.s_value.im, r.a_value.re, r.a_value.im, r.b_value.re, r.b_value.im].map(num),
                    ),
                    Err(_) => row.extend((0..6).map(|_| String::new())),
                }
            } else {
                match resolvent_spectrum(w, scheme) {
                    Ok(s) => row.extend([num(s.re), num(s.im)]),
                    Err(_) => row.extend([String::new(), String::new()]),
                }
                row.extend((0..4).map(|_| String::new()));
            }
            row
        })
        .collect();
    for r in rows {
        t.push(r);
    }
    t
}

fn trajectory_tables(rep: &mut Report, tag: &str, traj: &Trajectory, fock: usize) {
    let mut tr = Table::new(format!("{tag}trajectory"), &["t_s", "nbar", "p_excited"]);
    for i in 0..traj.len() {
        tr.push_numbers(&[traj.times[i], traj.nbar[i], traj.p_excited[i]]);
    }
    let mut cols = vec!["t_s".to_string()];
    cols.extend((0..fock).map(|n| format!("p{n}")));
    let mut fp = Table::with_columns(format!("{tag}fock"), cols);
    for (t, f) in traj.times.iter().zip(&traj.fock_populations) {
        let mut row = vec![num(*t)];
        row.extend(f.populations.iter().map(|&p| num(p)));
        fp.push(row);
    }
    rep.tables.push(tr);
    rep.tables.push(fp);
    let warns = &traj.truncation_warnings;
    if let Some(worst) = warns.iter().max_by(|a, b| a.top_population.total_cmp(&b.top_population)) {
        rep.warnings.push(format!(
            "{tag}top Fock population exceeds the truncation threshold at {} samples (worst {:.3e} at t = {:.4e} s); raise --fock",
            warns.len(),
            worst.top_population,
            worst.time
        ));
    }
}

fn fit_table(rep: &mut Report, name: &str, times: &[f64], nbar: &[f64]) -> Option<FitResult> {
    match fit_cooling_curve(times, nbar) {
        Ok(f) => {
            let mut t = Table::new(name, &["amplitude", "rate_per_s", "n_infinity", "t_cut_s", "n_ss", "rms_residual"]);
            t.push(vec![num(f.amplitude), num(f.rate), num(f.n_infinity), num(f.t_cut), opt(f.n_ss), num(f.rms_residual)]);
            rep.tables.push(t);
            Some(f)
        }
        Err(e) => {
            rep.warnings.push(format!("{name}: {e}"));
            None
        }
    }
}

/// Fit, n_ss and rate at n̄ = 1 into the summary under `key_prefix`.
fn cooling_summary(rep: &mut Report, key_prefix: &str, fit_name: &str, times: &[f64], nbar: &[f64]) {
    let Some(f) = fit_table(rep, fit_name, times, nbar) else { return };
    let n_ss = f.n_ss.unwrap_or(f.n_infinity);
    rep.add_summary(&format!("{key_prefix}n_ss"), num(n_ss));
    rep.add_summary(&format!("{key_prefix}rate_fit_per_s"), num(f.rate));
    match rate_at_level(times, nbar, n_ss, 1.0, None) {
        Ok(r) => rep.add_summary(&format!("{key_prefix}rate_at_nbar1_per_s"), num(r)),
        Err(e) => rep.warnings.push(format!("{key_prefix}rate at nbar = 1 unavailable: {e}")),
    }
}

/// Lamb-Dicke predictions for a scheme on its own mode.
fn lamb_dicke(scheme: &CoolingScheme, cfg: &SchemeConfig) -> eitcool_core::Result<RateModel> {
    let d = scheme_diffusion(scheme, emission_eta(cfg))?;
    RateModel::from_scheme(scheme, d)
}

fn prediction_summary(rep: &mut Report, scheme: &CoolingScheme, cfg: &SchemeConfig) {
    match lamb_dicke(scheme, cfg) {
        Ok(m) => {
            let mut t = Table::new("prediction", &["a_plus_per_s", "a_minus_per_s", "rate_per_s", "n_ss", "diffusion_per_s"]);
            t.push_numbers(&[m.a_plus, m.a_minus, m.cooling_rate, m.n_ss, m.diffusion]);
            rep.tables.push(t);
            rep.add_summary("ld_rate_per_s", num(m.cooling_rate));
            rep.add_summary("ld_n_ss", num(m.n_ss));
        }
        Err(e) => rep.warnings.push(format!("Lamb-Dicke prediction unavailable: {e}")),
    }
    match optimal_rates(scheme) {
        Ok(OptimalRates::SingleEit { rate, n_ss, n_pi }) => {
            rep.add_summary("optimal_rate_per_s", num(rate));
            rep.add_summary("optimal_n_ss", num(n_ss));
            rep.add_summary("optimal_n_pi", num(n_pi));
        }
        Ok(OptimalRates::DoubleEit { radial_rate, axial_rate, n_ss }) => {
            rep.add_summary("optimal_radial_rate_per_s", num(radial_rate));
            rep.add_summary("optimal_axial_rate_per_s", num(axial_rate));
            rep.add_summary("optimal_n_ss", num(n_ss));
        }
        Err(_) => {}
    }
}

fn cooling_trajectory(
    scn: &Scenario,
    settings: &Settings,
    duration: f64,
    nbar0: Option<f64>,
    intervals: usize,
    checkpoint: bool,
    restore: Option<&Path>,
) -> Result<Report, RunError> {
    let (scheme, mode_nbar0) = main_scheme(scn)?;
    let state = match restore {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| RunError::io(path, e))?;
            let s = QuantumState::from_checkpoint(&bytes).context(|| format!("restoring {}", path.display()))?;
            if s.fock_dim != settings.fock {
                return Err(field_err(
                    "experiment.restore",
                    format!("checkpoint has {} Fock states, run uses {}", s.fock_dim, settings.fock),
                ));
            }
            s
        }
        None => {
            let n0 = nbar0_or(nbar0, mode_nbar0, "experiment.nbar0")?;
            let fock = FockDistribution::thermal(n0, settings.fock).context(|| "initial state".into())?;
            QuantumState::product(Level::SPlus, &fock).context(|| "initial state".into())?
        }
    };
    let (traj, end, stats) = propagate_scheme(&scheme, &state, duration, &settings.propagation(intervals))
        .context(|| format!("cooling_trajectory on {}", scheme.mode.label.name()))?;
    let mut rep = Report::default();
    trajectory_tables(&mut rep, "", &traj, settings.fock);
    cooling_summary(&mut rep, "", "fit", &traj.times, &traj.nbar);
    prediction_summary(&mut rep, &scheme, &scn.scheme);
    rep.add_summary("final_nbar", num(end.nbar()));
    rep.add_summary("steps", stats.steps.to_string());
    rep.add_summary("trace_drift", num(stats.trace_drift));
    if checkpoint {
        rep.files.push(("checkpoint.bin".into(), end.to_checkpoint()));
    }
    Ok(rep)
}

fn pulse_sequence(scn: &Scenario, settings: &Settings, nbar0: Option<f64>, intervals: usize) -> Result<Report, RunError> {
    let modes = trap_modes(scn)?;
    if modes.is_empty() {
        return Err(field_err("modes", "a pulse sequence needs at least one mode"));
    }
    let placeholder = modes[0].0;
    let mut pulses = Vec::with_capacity(scn.pulses.len());
    for (i, p) in scn.pulses.iter().enumerate() {
        let duration = time(&p.duration, &format!("pulses[{i}].duration"))?;
        let scheme = cooling_scheme(&p.scheme, placeholder, &format!("pulses[{i}].scheme"))?;
        pulses.push(Pulse { name: p.name.clone(), scheme, duration });
    }
    let seq = PulseSequence::new(pulses);
    let starts: Vec<(TrapMode, f64)> = modes
        .iter()
        .enumerate()
        .map(|(i, (m, n))| Ok((*m, nbar0_or(nbar0, *n, &format!("modes[{i}].nbar0"))?)))
        .collect::<Result<_, RunError>>()?;
    let opts = settings.propagation(intervals);
    let runs: Vec<_> = starts
        .par_iter()
        .map(|&(m, n0)| run_mode(&seq, m, n0, settings.fock, &opts).context(|| format!("pulse sequence on {}", m.label.name())))
        .collect::<Result<_, _>>()?;

    let mut rep = Report::default();
    rep.warnings.push(SEQUENCE_CAVEAT.into());
    let mut ends = Table::new("pulse_ends", &["mode", "pulse", "t_s", "nbar", "ld_n_ss"]);
    for run in &runs {
        let name = run.mode.label.name();
        trajectory_tables(&mut rep, &format!("{name}_"), &run.trajectory, settings.fock);
        for (pe, (pulse, cfg)) in run.pulse_ends.iter().zip(seq.pulses.iter().zip(&scn.pulses)) {
            let mut s = pulse.scheme.clone();
            s.mode = run.mode;
            let ld = lamb_dicke(&s, &cfg.scheme).ok().map(|m| m.n_ss);
            ends.push(vec![name.into(), pe.name.clone(), num(pe.time), num(pe.nbar), opt(ld)]);
        }
        rep.add_summary(&format!("{name}.final_nbar"), num(run.final_nbar()));
        if let Some(last) = seq.pulses.iter().rposition(|p| p.duration > 0.0) {
            let t0 = seq.pulses[..last].iter().map(|p| p.duration).sum::<f64>();
            let tr = &run.trajectory;
            let k = tr.times.iter().position(|&t| t >= t0 - 1e-15).unwrap_or(0);
            let times: Vec<f64> = tr.times[k..].iter().map(|t| t - t0).collect();
            cooling_summary(&mut rep, &format!("{name}."), &format!("{name}_fit"), &times, &tr.nbar[k..]);
        }
    }
    rep.tables.push(ends);
    Ok(rep)
}

fn readout_params(r: &Readout, nbar_ref: f64) -> Result<(f64, f64, f64), RunError> {
    if !(r.eta > 0.0) {
        return Err(field_err("experiment.readout.eta", "must be > 0"));
    }
    let rabi = frequency(&r.rabi, eitcool_core::units::GAMMA_CA40, "experiment.readout.rabi")?;
    if !(rabi > 0.0) {
        return Err(field_err("experiment.readout.rabi", "must be > 0"));
    }
    let t = match &r.time {
        Some(q) => time(q, "experiment.readout.time")?,
        None => default_rabi_time(r.eta, rabi, nbar_ref),
    };
    Ok((r.eta, rabi, t))
}

fn normalised(f: &FockDistribution) -> eitcool_core::Result<FockDistribution> {
    let total = f.total();
    FockDistribution::new(f.populations.iter().map(|p| p.max(0.0) / total).collect())
}

fn rabi_map(
    scn: &Scenario,
    settings: &Settings,
    pump: &[crate::quantity::Quantity],
    probe: &[crate::quantity::Quantity],
    duration: f64,
    nbar0: Option<f64>,
    readout: &Readout,
) -> Result<Report, RunError> {
    if pump.is_empty() || probe.is_empty() {
        return Err(field_err("experiment.pump", "pump and probe grids must be non-empty"));
    }
    let mut cfg = scn.scheme.clone();
    cfg.tune = None;
    let (mode, mode_nbar0) = scheme_mode(scn)?;
    let base = cooling_scheme(&cfg, mode, "scheme")?;
    if base.laser(LaserLabel::Sigma397).is_none() || base.laser(LaserLabel::Pi397).is_none() {
        return Err(field_err("scheme.lasers", "rabi_map needs pi397 (probe) and sigma397 (pump) beams"));
    }
    let g = base.gamma_total;
    let n0 = nbar0_or(nbar0, mode_nbar0, "experiment.nbar0")?;
    let (eta, rabi, t_r) = readout_params(readout, n0)?;
    let pumps: Vec<f64> =
        pump.iter().enumerate().map(|(i, q)| frequency(q, g, &format!("experiment.pump[{i}]"))).collect::<Result<_, _>>()?;
    let probes: Vec<f64> = probe
        .iter()
        .enumerate()
        .map(|(i, q)| frequency(q, g, &format!("experiment.probe[{i}]")))
        .collect::<Result<_, _>>()?;
    let grid: Vec<(f64, f64)> = pumps.iter().flat_map(|&a| probes.iter().map(move |&b| (a, b))).collect();
    let opts = settings.propagation(1);
    let start = {
        let f = FockDistribution::thermal(n0, settings.fock).context(|| "initial state".into())?;
        QuantumState::product(Level::SPlus, &f).context(|| "initial state".into())?
    };
    let rows: Vec<(f64, f64, f64, f64)> = grid
        .par_iter()
        .map(|&(op, opr)| {
            let mut s = base.clone();
            if let Some(l) = s.laser_mut(LaserLabel::Sigma397) {
                l.rabi_frequency = op;
            }
            if let Some(l) = s.laser_mut(LaserLabel::Pi397) {
                l.rabi_frequency = opr;
            }
            let what = || format!("rabi_map at pump {:.4} MHz, probe {:.4} MHz", mhz(op), mhz(opr));
            let (_, end, _) = propagate_scheme(&s, &start, duration, &opts).context(what)?;
            let f = normalised(&end.fock_populations()).context(what)?;
            let rsb = sideband_excitation(&f, eta, rabi, t_r, -1).context(what)?;
            Ok((op, opr, f.mean(), rsb))
        })
        .collect::<Result<_, RunError>>()?;
    let mut t = Table::new(
        "rabi_map",
        &["pump_rad_s", "probe_rad_s", "pump_mhz", "probe_mhz", "nbar", "rsb", "stark_over_nu"],
    );
    for (op, opr, nbar, rsb) in rows {
        let stark = (op * op + opr * opr) / (4.0 * base.delta * base.mode.frequency);
        t.push_numbers(&[op, opr, mhz(op), mhz(opr), nbar, rsb, stark]);
    }
    let mut rep = Report::default();
    rep.add_summary("readout_time_s", num(t_r));
    rep.add_summary("duration_s", num(duration));
    rep.tables.push(t);
    Ok(rep)
}

fn detuning_sweep(
    scn: &Scenario,
    settings: &Settings,
    deltas: &[crate::quantity::Quantity],
    engine: Option<&str>,
    duration: Option<&crate::quantity::Quantity>,
    nbar0: Option<f64>,
) -> Result<Report, RunError> {
    if deltas.is_empty() {
        return Err(field_err("experiment.deltas", "grid must be non-empty"));
    }
    if scn.scheme.kind == SchemeKind::Custom {
        return Err(field_err("scheme.kind", "detuning_sweep needs single_eit or double_eit detuning rules"));
    }
    let with_me = match engine.unwrap_or("lamb_dicke") {
        "lamb_dicke" => false,
        "master_equation" => true,
        other => return Err(field_err("experiment.engine", format!("`{other}`: expected lamb_dicke or master_equation"))),
    };
    let (mode, mode_nbar0) = scheme_mode(scn)?;
    let me = if with_me {
        let d = duration.ok_or_else(|| field_err("experiment.duration", "required for the master-equation engine"))?;
        Some((time(d, "experiment.duration")?, nbar0_or(nbar0, mode_nbar0, "experiment.nbar0")?))
    } else {
        None
    };
    let configs: Vec<(f64, SchemeConfig)> = deltas
        .iter()
        .map(|q| {
            let mut c = scn.scheme.clone();
            c.delta = *q;
            for l in &mut c.lasers {
                if l.label != "d866" || c.kind == SchemeKind::DoubleEit {
                    l.detuning = None;
                }
            }
            let g = crate::assemble::gamma_total(&c, "scheme")?;
            Ok((frequency(q, g, "experiment.deltas")?, c))
        })
        .collect::<Result<_, ConfigError>>()?;
    let rows: Vec<Vec<String>> = configs
        .par_iter()
        .map(|(delta, c)| {
            let s = cooling_scheme(c, mode, "scheme")?;
            let ld = lamb_dicke(&s, c).context(|| format!("Lamb-Dicke rates at delta = {:.4} MHz", mhz(*delta)))?;
            let mut row = vec![num(*delta), num(delta / s.gamma_total), num(ld.cooling_rate), num(ld.n_ss)];
            if let Some((dur, n0)) = me {
                let f = FockDistribution::thermal(n0, settings.fock).context(|| "initial state".into())?;
                let st = QuantumState::product(Level::SPlus, &f).context(|| "initial state".into())?;
                let (tr, _, _) = propagate_scheme(&s, &st, dur, &settings.propagation(DEFAULT_INTERVALS))
                    .context(|| format!("cooling at delta = {:.4} MHz", mhz(*delta)))?;
                match fit_cooling_curve(&tr.times, &tr.nbar) {
                    Ok(fit) => row.extend([num(fit.rate), num(fit.n_ss.unwrap_or(fit.n_infinity))]),
                    Err(_) => row.extend([String::new(), String::new()]),
                }
            }
            Ok(row)
        })
        .collect::<Result<_, RunError>>()?;
    let mut cols = vec!["delta_rad_s", "delta_gamma", "ld_rate_per_s", "ld_n_ss"];
    if with_me {
        cols.extend(["me_rate_per_s", "me_n_ss"]);
    }
    let mut t = Table::new("detuning_sweep", &cols);
    for r in rows {
        t.push(r);
    }
    let mut rep = Report::default();
    rep.tables.push(t);
    Ok(rep)
}

fn ttm_rate(
    scn: &Scenario,
    settings: &Settings,
    nbar0: &[f64],
    dt: Option<&crate::quantity::Quantity>,
    steps: Option<usize>,
    horizon: Option<usize>,
    engine: Option<&str>,
) -> Result<Report, RunError> {
    if nbar0.is_empty() {
        return Err(field_err("experiment.nbar0", "list must be non-empty"));
    }
    if let Some(i) = nbar0.iter().position(|n| !(*n > 0.0) || !n.is_finite()) {
        return Err(field_err(format!("experiment.nbar0[{i}]"), "must be finite and > 0"));
    }
    let (scheme, _) = main_scheme(scn)?;
    let dt = match dt {
        Some(q) => time(q, "experiment.dt")?,
        None => DEFAULT_DT_GAMMA / scheme.gamma_total,
    };
    if !(dt > 0.0) {
        return Err(field_err("experiment.dt", "must be > 0"));
    }
    let steps = steps.unwrap_or(DEFAULT_STEPS);
    if steps < 3 {
        return Err(field_err("experiment.steps", "need at least 3 steps"));
    }
    let mut series = match engine.unwrap_or("master_equation") {
        "master_equation" => {
            let mut p = MasterEquationPropagator::new(scheme.clone(), settings.fock);
            p.tolerance = settings.tolerance;
            let columns: Vec<Vec<Vec<f64>>> = (0..p.fock_dim())
                .into_par_iter()
                .map(|m| p.column(m, dt, steps).context(|| format!("dynamical map column {m}")))
                .collect::<Result<_, _>>()?;
            DynamicalMapSeries::from_columns(dt, &columns).context(|| "dynamical maps".into())?
        }
        "rate_equation" => {
            let m = lamb_dicke(&scheme, &scn.scheme).context(|| "Lamb-Dicke rates".into())?;
            let p = RateEquationPropagator { matrix: m.matrix(settings.fock - 1).context(|| "rate matrix".into())? };
            extract_maps(&p, dt, steps).context(|| "dynamical maps".into())?
        }
        other => return Err(field_err("experiment.engine", format!("`{other}`: expected master_equation or rate_equation"))),
    };
    let mut rep = Report::default();
    if let Some(h) = horizon.filter(|&h| h > steps) {
        let tt = transfer_tensors(&series).context(|| "transfer tensors".into())?;
        series = extrapolate(&tt, &series, h).context(|| "transfer-tensor extrapolation".into())?;
        rep.add_summary("extrapolated_steps", (h - steps).to_string());
    }
    let nu = scheme.mode.frequency;
    let mut t = Table::new(
        "ttm_rate",
        &["nbar0", "t_s", "capacitance_J_per_K", "conductance_W_per_K", "rate_per_s", "var_dh_J2", "var_transfer_J2"],
    );
    for &n0 in nbar0 {
        let resp = generalized_rate(&series, n0, nu).context(|| format!("rate for nbar0 = {n0}"))?;
        for r in resp {
            t.push(vec![num(n0), num(r.t), num(r.capacitance), num(r.conductance), opt(r.rate), num(r.var_dh), num(r.var_transfer)]);
        }
    }
    rep.tables.push(t);
    match lamb_dicke(&scheme, &scn.scheme) {
        Ok(m) => rep.add_summary("ld_rate_per_s", num(m.cooling_rate)),
        Err(e) => rep.warnings.push(format!("Lamb-Dicke reference unavailable: {e}")),
    }
    Ok(rep)
}

/// Reads a Fock-population table (`t_s, p0, p1, ...`).
fn read_fock_csv(path: &Path) -> Result<(Vec<f64>, Vec<FockDistribution>), RunError> {
    let bad = |reason: String| field_err("experiment.input", format!("{}: {reason}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| RunError::io(path, e.into()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.get(0) != Some("t_s") || header.len() < 3 {
        return Err(bad("expected columns t_s, p0, p1, ...".into()));
    }
    let (mut times, mut dists) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 2)))?;
        times.push(vals[0]);
        dists.push(FockDistribution::new(vals[1..].to_vec()).map_err(|e| bad(format!("row {}: {e}", line + 2)))?);
    }
    if times.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok((times, dists))
}

#[allow(clippy::too_many_arguments)]
fn thermometry_replay(
    scn: &Scenario,
    settings: &Settings,
    readout: &Readout,
    input: Option<&Path>,
    duration: Option<&crate::quantity::Quantity>,
    nbar0: Option<f64>,
    intervals: usize,
    pipeline: Option<&str>,
) -> Result<Report, RunError> {
    let fitted = match pipeline.unwrap_or("direct") {
        "direct" => false,
        "sideband_fit" => true,
        other => return Err(field_err("experiment.pipeline", format!("`{other}`: expected direct or sideband_fit"))),
    };
    let (times, dists) = match input {
        Some(p) => read_fock_csv(p)?,
        None => {
            let (scheme, mode_nbar0) = main_scheme(scn)?;
            let d = duration.ok_or_else(|| field_err("experiment.duration", "required without an input file"))?;
            let d = time(d, "experiment.duration")?;
            let n0 = nbar0_or(nbar0, mode_nbar0, "experiment.nbar0")?;
            let f = FockDistribution::thermal(n0, settings.fock).context(|| "initial state".into())?;
            let st = QuantumState::product(Level::SPlus, &f).context(|| "initial state".into())?;
            let (tr, _, _) = propagate_scheme(&scheme, &st, d, &settings.propagation(intervals))
                .context(|| "thermometry_replay simulation".into())?;
            (tr.times, tr.fock_populations)
        }
    };
    let true_nbar: Vec<f64> = dists.iter().map(|d| d.mean() / d.total()).collect();
    let (eta, rabi, t_r) = readout_params(readout, true_nbar[0])?;
    let mut rsb = Vec::with_capacity(dists.len());
    let mut bsb = Vec::with_capacity(dists.len());
    for (t, d) in times.iter().zip(&dists) {
        let what = || format!("sideband readout at t = {t:e} s");
        let f = normalised(d).context(what)?;
        rsb.push(sideband_excitation(&f, eta, rabi, t_r, -1).context(what)?);
        bsb.push(sideband_excitation(&f, eta, rabi, t_r, 1).context(what)?);
    }
    let mut rep = Report::default();
    let measured: Vec<Option<f64>> = if fitted {
        let series = SidebandSeries { times: times.clone(), rsb: rsb.clone(), bsb: bsb.clone(), rabi_time: t_r, sideband_eta: eta };
        nbar_series_from_sideband_fits(&series).context(|| "sideband fits".into())?.into_iter().map(Some).collect()
    } else {
        rsb.iter()
            .zip(&bsb)
            .zip(&times)
            .map(|((&r, &b), t)| match nbar_from_sidebands(r, b) {
                Ok(n) => Some(n),
                Err(e) => {
                    rep.warnings.push(format!("t = {t:e} s: {e}"));
                    None
                }
            })
            .collect()
    };
    let mut table = Table::new("thermometry", &["t_s", "rsb", "bsb", "nbar_sideband", "nbar_true"]);
    for i in 0..times.len() {
        table.push(vec![num(times[i]), num(rsb[i]), num(bsb[i]), opt(measured[i]), num(true_nbar[i])]);
    }
    rep.tables.push(table);
    let (ts, ns): (Vec<f64>, Vec<f64>) =
        times.iter().zip(&measured).filter_map(|(t, n)| n.map(|n| (*t, n))).unzip();
    cooling_summary(&mut rep, "", "fit", &ts, &ns);
    rep.add_summary("readout_time_s", num(t_r));
    Ok(rep)
}
