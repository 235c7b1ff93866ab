//! Physical quantities with explicit units, as written in scenario files:
//! "2.552 MHz", "3.4 Gamma", "416 uT", "200 us", "45 /s".
//!
//! Frequencies in Hz/kHz/MHz/GHz are ordinary frequencies and are converted
//! to angular frequency (×2π). "Gamma" multiplies the scheme's Γ, so it can
//! only be resolved once Γ is known.

use std::fmt;
use std::str::FromStr;

use eitcool_core::units::GAMMA_CA40;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    RadPerS,
    Hz,
    KHz,
    MHz,
    GHz,
    Gamma,
    Tesla,
    Millitesla,
    Microtesla,
    Gauss,
    Second,
    Millisecond,
    Microsecond,
    Nanosecond,
    PerSecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Field,
    Time,
    Rate,
}

impl Dimension {
    pub fn name(self) -> &'static str {
        match self {
            Dimension::Frequency => "frequency",
            Dimension::Field => "magnetic field",
            Dimension::Time => "time",
            Dimension::Rate => "rate",
        }
    }
}

const UNITS: [(Unit, &str); 15] = [
    (Unit::RadPerS, "rad/s"),
    (Unit::Hz, "Hz"),
    (Unit::KHz, "kHz"),
    (Unit::MHz, "MHz"),
    (Unit::GHz, "GHz"),
    (Unit::Gamma, "Gamma"),
    (Unit::Tesla, "T"),
    (Unit::Millitesla, "mT"),
    (Unit::Microtesla, "uT"),
    (Unit::Gauss, "G"),
    (Unit::Second, "s"),
    (Unit::Millisecond, "ms"),
    (Unit::Microsecond, "us"),
    (Unit::Nanosecond, "ns"),
    (Unit::PerSecond, "/s"),
];

impl Unit {
    pub fn symbol(self) -> &'static str {
        UNITS.iter().find(|(u, _)| *u == self).map(|(_, s)| *s).unwrap_or("?")
    }

    fn parse(s: &str) -> Option<Unit> {
        let alias = match s {
            "rad s^-1" | "rad/sec" => "rad/s",
            "khz" | "KHz" => "kHz",
            "mhz" => "MHz",
            "ghz" => "GHz",
            "gamma" | "Γ" => "Gamma",
            "µT" | "μT" => "uT",
            "µs" | "μs" => "us",
            "1/s" | "s^-1" | "phonons/s" => "/s",
            other => other,
        };
        UNITS.iter().find(|(_, sym)| *sym == alias).map(|(u, _)| *u)
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::RadPerS | Unit::Hz | Unit::KHz | Unit::MHz | Unit::GHz | Unit::Gamma => Dimension::Frequency,
            Unit::Tesla | Unit::Millitesla | Unit::Microtesla | Unit::Gauss => Dimension::Field,
            Unit::Second | Unit::Millisecond | Unit::Microsecond | Unit::Nanosecond => Dimension::Time,
            Unit::PerSecond => Dimension::Rate,
        }
    }

    /// Factor to SI (rad/s, T, s, 1/s); `None` for Gamma.
    fn si_factor(self) -> Option<f64> {
        use std::f64::consts::TAU;
        Some(match self {
            Unit::RadPerS => 1.0,
            Unit::Hz => TAU,
            Unit::KHz => TAU * 1e3,
            Unit::MHz => TAU * 1e6,
            Unit::GHz => TAU * 1e9,
            Unit::Gamma => return None,
            Unit::Tesla => 1.0,
            Unit::Millitesla => 1e-3,
            Unit::Microtesla => 1e-6,
            Unit::Gauss => 1e-4,
            Unit::Second => 1.0,
            Unit::Millisecond => 1e-3,
            Unit::Microsecond => 1e-6,
            Unit::Nanosecond => 1e-9,
            Unit::PerSecond => 1.0,
        })
    }
}

/// A number with a unit, kept as written so files round-trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse quantity {input:?}: {reason}")]
pub struct QuantityError {
    pub input: String,
    pub reason: String,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    /// SI value, resolving "Gamma" against `gamma_total` (rad/s).
    pub fn si(&self, gamma_total: f64) -> f64 {
        match self.unit.si_factor() {
            Some(f) => self.value * f,
            None => self.value * gamma_total,
        }
    }

    /// SI value with the default Ca+ linewidth for "Gamma".
    pub fn si_default(&self) -> f64 {
        self.si(GAMMA_CA40)
    }

    pub fn expect(&self, dim: Dimension) -> Result<&Self, QuantityError> {
        if self.unit.dimension() == dim {
            Ok(self)
        } else {
            Err(QuantityError {
                input: self.to_string(),
                reason: format!("expected a {} but the unit is a {}", dim.name(), self.unit.dimension().name()),
            })
        }
    }
}

impl FromStr for Quantity {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| QuantityError { input: s.to_string(), reason: reason.to_string() };
        let t = s.trim();
        let split = t
            .char_indices()
            .find(|(i, c)| {
                !(c.is_ascii_digit() || *c == '.' || *c == '+' || *c == '-' || *c == 'e' || *c == 'E')
                    || (matches!(c, 'e' | 'E') && t[i + 1..].chars().next().is_none_or(|n| !(n.is_ascii_digit() || n == '-' || n == '+')))
            })
            .map_or(t.len(), |(i, _)| i);
        let (num, unit) = t.split_at(split);
        if num.is_empty() {
            return Err(err("missing number"));
        }
        let value: f64 = num.parse().map_err(|_| err("bad number"))?;
        if !value.is_finite() {
            return Err(err("value is not finite"));
        }
        let unit = unit.trim();
        if unit.is_empty() {
            return Err(err("missing unit (every physical quantity needs one)"));
        }
        let unit = Unit::parse(unit).ok_or_else(|| err(&format!("unknown unit {unit:?}")))?;
        Ok(Quantity { value, unit })
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit.symbol())
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
