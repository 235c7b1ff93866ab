//! Sweeps, the worker pool and report assembly.

use std::path::Path;

use rayon::prelude::*;

use crate::config::{ConfigError, Scenario};
use crate::error::RunError;
use crate::experiments::{run_experiment, Settings};
use crate::output::{num, Report, Table};
use crate::quantity::{Dimension, Quantity};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "EITCOOL_WORKERS";
pub const DEFAULT_FOCK: usize = 17;

pub const SWEEP_PARAMETERS: [&str; 8] =
    ["delta", "omega_pi", "omega_sigma", "omega_d", "field", "mode_frequency", "tune_radial", "tune_axial"];

/// Command-line overrides of the scenario's numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub fock: Option<usize>,
    pub tolerance: Option<f64>,
}

pub fn settings(scn: &Scenario, o: Overrides) -> Settings {
    Settings {
        fock: o.fock.or(scn.scenario.fock).unwrap_or(DEFAULT_FOCK),
        tolerance: o.tolerance.or(scn.scenario.tolerance).unwrap_or(eitcool_core::lindblad::DEFAULT_TOLERANCE),
    }
}

/// `--workers`, else the environment variable, else the number of CPUs.
pub fn worker_count(cli: Option<usize>) -> usize {
    cli.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Copy of `scn` with one scheme parameter replaced.
pub fn apply_sweep(scn: &Scenario, parameter: &str, value: Quantity) -> Result<Scenario, ConfigError> {
    let mut s = scn.clone();
    let field = "sweep.parameter";
    let dim = if parameter == "field" { Dimension::Field } else { Dimension::Frequency };
    value.expect(dim).map_err(|e| ConfigError::field("sweep.values", e.to_string()))?;
    let rabi = |s: &mut Scenario, label: &str| -> Result<(), ConfigError> {
        let l = s
            .scheme
            .lasers
            .iter_mut()
            .find(|l| l.label == label)
            .ok_or_else(|| ConfigError::field(field, format!("scheme has no {label} beam")))?;
        l.rabi = value;
        Ok(())
    };
    match parameter {
        "delta" => s.scheme.delta = value,
        "omega_pi" => rabi(&mut s, "pi397")?,
        "omega_sigma" => rabi(&mut s, "sigma397")?,
        "omega_d" => rabi(&mut s, "d866")?,
        "field" => s.scheme.field = Some(value),
        "mode_frequency" => {
            let label = s.scheme.mode.clone().ok_or_else(|| ConfigError::field("scheme.mode", "required to sweep mode_frequency"))?;
            let m = s
                .modes
                .iter_mut()
                .find(|m| m.label == label)
                .ok_or_else(|| ConfigError::field("scheme.mode", format!("no entry for `{label}` in [[modes]]")))?;
            m.frequency = value;
        }
        "tune_radial" | "tune_axial" => {
            let t = s.scheme.tune.as_mut().ok_or_else(|| ConfigError::field(field, "scheme has no [scheme.tune] section"))?;
            if parameter == "tune_radial" {
                t.radial = Some(value);
            } else {
                t.axial = Some(value);
            }
        }
        other => {
            return Err(ConfigError::field(field, format!("unknown parameter `{other}`; expected one of {}", SWEEP_PARAMETERS.join(", "))))
        }
    }
    Ok(s)
}

/// Runs the scenario, once per sweep value when a sweep is configured.
/// `base_dir` resolves relative input paths.
pub fn run_scenario(scn: &Scenario, settings: &Settings, base_dir: &Path) -> Result<Report, RunError> {
    let Some(sweep) = &scn.sweep else {
        return run_experiment(scn, settings, base_dir);
    };
    if sweep.values.is_empty() {
        return Err(ConfigError::field("sweep.values", "grid must be non-empty").into());
    }
    let variants: Vec<Scenario> =
        sweep.values.iter().map(|v| apply_sweep(scn, &sweep.parameter, *v)).collect::<Result<_, _>>()?;
    let reports: Vec<Report> = variants
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            run_experiment(s, settings, base_dir).map_err(|e| match e {
                RunError::Physics { context, source } => {
                    RunError::Physics { context: format!("sweep point {i} ({} = {}): {context}", sweep.parameter, sweep.values[i]), source }
                }
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut out = Report::default();
    let mut index = Table::new("sweep", &["index", "parameter", "value", "value_si"]);
    for (i, (r, v)) in reports.into_iter().zip(&sweep.values).enumerate() {
        let gamma = crate::assemble::gamma_total(&scn.scheme, "scheme")?;
        index.push(vec![i.to_string(), sweep.parameter.clone(), v.to_string(), num(v.si(gamma))]);
        out.absorb(&format!("sweep{i:03}"), r);
    }
    out.tables.insert(0, index);
    Ok(out)
}

/// Runs `f` on a pool with `workers` threads.
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::io("<thread pool>", std::io::Error::other(e.to_string())))?;
    Ok(pool.install(f))
}
