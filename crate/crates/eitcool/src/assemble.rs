//! Translation of scenario sections into core model types.

use eitcool_core::model::{
    raman_detunings, CoolingScheme, CouplingModel, LaserDrive, LaserLabel, ModeLabel, Polarization, TrapMode,
    ZeemanField,
};
use eitcool_core::tuning::{tune_scheme, tune_single_eit};
use eitcool_core::units::GAMMA_CA40;

use crate::config::{ConfigError, LaserConfig, ModeConfig, Scenario, SchemeConfig, SchemeKind};
use crate::error::{Context, RunError};
use crate::quantity::{Dimension, Quantity};

fn checked(q: &Quantity, dim: Dimension, field: &str) -> Result<Quantity, ConfigError> {
    q.expect(dim).copied().map_err(|e| ConfigError::field(field, e.to_string()))
}

/// Angular frequency in rad/s.
pub fn frequency(q: &Quantity, gamma_total: f64, field: &str) -> Result<f64, ConfigError> {
    Ok(checked(q, Dimension::Frequency, field)?.si(gamma_total))
}

pub fn time(q: &Quantity, field: &str) -> Result<f64, ConfigError> {
    let v = checked(q, Dimension::Time, field)?.si_default();
    if !(v >= 0.0) {
        return Err(ConfigError::field(field, "must be >= 0"));
    }
    Ok(v)
}

pub fn gamma_total(cfg: &SchemeConfig, prefix: &str) -> Result<f64, ConfigError> {
    match &cfg.gamma {
        None => Ok(GAMMA_CA40),
        Some(q) if q.unit == crate::quantity::Unit::Gamma => {
            Err(ConfigError::field(format!("{prefix}.gamma"), "cannot be given in units of Gamma"))
        }
        Some(q) => {
            let g = frequency(q, GAMMA_CA40, &format!("{prefix}.gamma"))?;
            if g > 0.0 {
                Ok(g)
            } else {
                Err(ConfigError::field(format!("{prefix}.gamma"), "must be > 0"))
            }
        }
    }
}

pub fn mode_label(label: &str, field: &str) -> Result<ModeLabel, ConfigError> {
    ModeLabel::parse(label).map_err(|e| ConfigError::field(field, e.to_string()))
}

pub fn trap_mode(m: &ModeConfig, index: usize) -> Result<TrapMode, ConfigError> {
    let f = format!("modes[{index}]");
    let label = mode_label(&m.label, &format!("{f}.label"))?;
    let frequency = frequency(&m.frequency, GAMMA_CA40, &format!("{f}.frequency"))?;
    if !(frequency > 0.0) {
        return Err(ConfigError::field(format!("{f}.frequency"), "must be > 0"));
    }
    let heating = match &m.background_heating {
        None => 0.0,
        Some(q) => checked(q, Dimension::Rate, &format!("{f}.background_heating"))?.si_default(),
    };
    if !(heating >= 0.0) {
        return Err(ConfigError::field(format!("{f}.background_heating"), "must be >= 0"));
    }
    if let Some(n) = m.nbar0 {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(ConfigError::field(format!("{f}.nbar0"), "must be finite and >= 0"));
        }
    }
    Ok(TrapMode { label, frequency, background_heating: heating })
}

/// All configured modes, in file order.
pub fn trap_modes(scn: &Scenario) -> Result<Vec<(TrapMode, Option<f64>)>, ConfigError> {
    let mut out: Vec<(TrapMode, Option<f64>)> = Vec::new();
    for (i, m) in scn.modes.iter().enumerate() {
        let t = trap_mode(m, i)?;
        if out.iter().any(|(o, _)| o.label == t.label) {
            return Err(ConfigError::field(format!("modes[{i}].label"), format!("mode `{}` listed twice", m.label)));
        }
        out.push((t, m.nbar0));
    }
    Ok(out)
}

/// The mode the top-level scheme acts on.
pub fn scheme_mode(scn: &Scenario) -> Result<(TrapMode, Option<f64>), ConfigError> {
    let label = scn
        .scheme
        .mode
        .as_deref()
        .ok_or_else(|| ConfigError::field("scheme.mode", "required for this experiment"))?;
    let want = mode_label(label, "scheme.mode")?;
    trap_modes(scn)?
        .into_iter()
        .find(|(m, _)| m.label == want)
        .ok_or_else(|| ConfigError::field("scheme.mode", format!("no entry for `{label}` in [[modes]]")))
}

fn laser(cfg: &LaserConfig, f: &str, gamma: f64, default_detuning: Option<f64>) -> Result<LaserDrive, ConfigError> {
    let label = LaserLabel::parse(&cfg.label).map_err(|e| ConfigError::field(format!("{f}.label"), e.to_string()))?;
    let rabi = frequency(&cfg.rabi, gamma, &format!("{f}.rabi"))?;
    if !(rabi >= 0.0) {
        return Err(ConfigError::field(format!("{f}.rabi"), "must be >= 0"));
    }
    let detuning = match &cfg.detuning {
        Some(q) => frequency(q, gamma, &format!("{f}.detuning"))?,
        None => default_detuning
            .ok_or_else(|| ConfigError::field(format!("{f}.detuning"), "required for custom schemes"))?,
    };
    for (name, eta) in [("eta_axial", cfg.eta_axial), ("eta_radial", cfg.eta_radial)] {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(ConfigError::field(format!("{f}.{name}"), "must be finite and >= 0"));
        }
    }
    let mut drive = LaserDrive::new(label, rabi, detuning).with_lamb_dicke(cfg.eta_axial, cfg.eta_radial);
    if let Some(p) = &cfg.polarization {
        drive.polarization =
            Polarization::parse(p).map_err(|e| ConfigError::field(format!("{f}.polarization"), e.to_string()))?;
    }
    Ok(drive)
}

/// Builds (and, when `tune` is set, tunes) the scheme acting on `mode`.
/// `prefix` names the section in error messages.
pub fn cooling_scheme(cfg: &SchemeConfig, mode: TrapMode, prefix: &str) -> Result<CoolingScheme, RunError> {
    let gamma = gamma_total(cfg, prefix)?;
    let delta = frequency(&cfg.delta, gamma, &format!("{prefix}.delta"))?;
    let field = match &cfg.field {
        None => 0.0,
        Some(q) => checked(q, Dimension::Field, &format!("{prefix}.field"))?.si_default(),
    };
    let zeeman = ZeemanField::new(field);
    let mut scheme = CoolingScheme::bare(mode, delta, zeeman);
    scheme.gamma_total = gamma;
    if let Some(b) = cfg.branch_s {
        if !(0.0..=1.0).contains(&b) {
            return Err(ConfigError::field(format!("{prefix}.branch_s"), "must lie in [0, 1]").into());
        }
        scheme = scheme.with_branching(b);
    }
    scheme.coupling = match cfg.coupling.as_deref() {
        None | Some("full") => CouplingModel::Full,
        Some("lambda") => CouplingModel::Lambda,
        Some(other) => {
            return Err(ConfigError::field(format!("{prefix}.coupling"), format!("`{other}`: expected full or lambda")).into())
        }
    };
    if let Some(e) = cfg.emission_eta {
        if !(e >= 0.0) {
            return Err(ConfigError::field(format!("{prefix}.emission_eta"), "must be >= 0").into());
        }
    }
    let (dp, ds, dd) = raman_detunings(delta, zeeman.delta_s());
    for (i, l) in cfg.lasers.iter().enumerate() {
        let f = format!("{prefix}.lasers[{i}]");
        let default = match (cfg.kind, l.label.as_str()) {
            (SchemeKind::Custom, _) => None,
            (_, "pi397") => Some(dp),
            (_, "sigma397") => Some(ds),
            (SchemeKind::DoubleEit, "d866") => Some(dd),
            (SchemeKind::SingleEit, "d866") => Some(0.0),
            _ => None,
        };
        scheme.lasers.push(laser(l, &f, gamma, default)?);
    }
    scheme.validate().map_err(|e| ConfigError::field(prefix, e.to_string()))?;
    let Some(tune) = &cfg.tune else { return Ok(scheme) };
    let target = |q: &Option<crate::quantity::Quantity>, name: &str| -> Result<Option<f64>, ConfigError> {
        q.as_ref().map(|q| frequency(q, gamma, &format!("{prefix}.tune.{name}"))).transpose()
    };
    let (radial, axial) = (target(&tune.radial, "radial")?, target(&tune.axial, "axial")?);
    match cfg.kind {
        SchemeKind::DoubleEit => {
            let (Some(r), Some(a)) = (radial, axial) else {
                return Err(ConfigError::field(format!("{prefix}.tune"), "double_eit tuning needs radial and axial").into());
            };
            tune_scheme(&scheme, r, a, delta).context(|| format!("{prefix}: bright-state tuning"))
        }
        SchemeKind::SingleEit => {
            let nu = match (radial, axial) {
                (Some(r), None) => r,
                (None, Some(a)) => a,
                _ => {
                    return Err(ConfigError::field(format!("{prefix}.tune"), "single_eit tuning needs exactly one target").into())
                }
            };
            tune_single_eit(&scheme, nu, delta).context(|| format!("{prefix}: bright-state tuning"))
        }
        SchemeKind::Custom => Err(ConfigError::field(format!("{prefix}.tune"), "custom schemes cannot be tuned").into()),
    }
}

/// Emission Lamb-Dicke factor for the Lamb-Dicke predictions.
pub fn emission_eta(cfg: &SchemeConfig) -> f64 {
    cfg.emission_eta.unwrap_or(0.0)
}
