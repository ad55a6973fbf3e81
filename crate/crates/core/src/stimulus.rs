//! Input waveforms for top-level ports.
//!
//! A signal is a constant, a parametric clock or a drawn pattern of edges.
//! Clocks start low: each period begins with the low phase and the rising
//! edge falls `(1 - duty) * period` into it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logic::LogicValue;
use crate::netlist::json_error_offset;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE", deny_unknown_fields)]
pub enum SignalSpec {
    Constant {
        value: LogicValue,
    },
    Clock {
        freq_hz: f64,
        #[serde(default = "half")]
        duty: f64,
        #[serde(default)]
        phase_ns: u64,
    },
    Pattern {
        edges: Vec<(u64, LogicValue)>,
    },
}

fn half() -> f64 {
    0.5
}

/// Period, high time and low time of a clock in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockTiming {
    pub period_ns: u64,
    pub high_ns: u64,
    pub low_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {reason}")]
pub struct StimulusError {
    /// Dotted field path, or `line L, column C` for syntax errors.
    pub path: String,
    pub reason: String,
}

impl StimulusError {
    fn at(path: impl Into<String>, reason: impl Into<String>) -> Self {
        StimulusError { path: path.into(), reason: reason.into() }
    }
}

impl SignalSpec {
    pub fn constant(value: LogicValue) -> Self {
        SignalSpec::Constant { value }
    }

    pub fn clock(freq_hz: f64) -> Self {
        SignalSpec::Clock { freq_hz, duty: 0.5, phase_ns: 0 }
    }

    pub fn clock_timing(&self) -> Option<ClockTiming> {
        match *self {
            SignalSpec::Clock { freq_hz, duty, .. } => {
                let period_ns = (1e9 / freq_hz).round() as u64;
                let high_ns = (duty * period_ns as f64).round() as u64;
                Some(ClockTiming { period_ns, high_ns, low_ns: period_ns.saturating_sub(high_ns) })
            }
            _ => None,
        }
    }

    /// Checks the invariants; `path` prefixes error locations.
    pub fn validate(&self, path: &str) -> Result<(), StimulusError> {
        match self {
            SignalSpec::Constant { .. } => Ok(()),
            SignalSpec::Clock { freq_hz, duty, .. } => {
                if !(freq_hz.is_finite() && *freq_hz > 0.0) {
                    return Err(StimulusError::at(format!("{path}.freq_hz"), "must be a positive number"));
                }
                if !(duty.is_finite() && *duty > 0.0 && *duty < 1.0) {
                    return Err(StimulusError::at(format!("{path}.duty"), "must lie strictly between 0 and 1"));
                }
                let t = self.clock_timing().expect("clock");
                if t.period_ns < 2 {
                    return Err(StimulusError::at(format!("{path}.freq_hz"), "period rounds to less than 2 ns"));
                }
                if t.high_ns < 1 || t.low_ns < 1 {
                    return Err(StimulusError::at(format!("{path}.duty"), "high and low phases must each last at least 1 ns"));
                }
                Ok(())
            }
            SignalSpec::Pattern { edges } => {
                match edges.first() {
                    None => return Err(StimulusError::at(format!("{path}.edges"), "pattern needs at least one edge")),
                    Some((t, _)) if *t != 0 => {
                        return Err(StimulusError::at(format!("{path}.edges[0]"), "first edge must be at time 0"))
                    }
                    _ => {}
                }
                for (i, w) in edges.windows(2).enumerate() {
                    if w[1].0 <= w[0].0 {
                        return Err(StimulusError::at(
                            format!("{path}.edges[{}]", i + 1),
                            "edge times must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Lazily generated change list on `[0, horizon_ns)`.
    pub fn changes(&self, horizon_ns: u64) -> Box<dyn Iterator<Item = (u64, LogicValue)> + Send + 'static> {
        match self {
            SignalSpec::Constant { value } => Box::new(std::iter::once((0, *value))),
            &SignalSpec::Clock { phase_ns, .. } => {
                let t = self.clock_timing().expect("clock");
                let first_rise = phase_ns + t.low_ns;
                let edges = (0u64..).map(move |k| {
                    let rise = first_rise + k * t.period_ns;
                    [(rise, LogicValue::One), (rise + t.high_ns, LogicValue::Zero)]
                });
                Box::new(
                    std::iter::once((0, LogicValue::Zero))
                        .chain(edges.flatten())
                        .take_while(move |(time, _)| *time < horizon_ns),
                )
            }
            SignalSpec::Pattern { edges } => {
                let mut last = None;
                Box::new(edges.clone().into_iter().take_while(move |(t, _)| *t < horizon_ns).filter(move |(_, v)| {
                    let keep = last != Some(*v);
                    last = Some(*v);
                    keep
                }))
            }
        }
    }
}

/// Expands a signal into its full change list on `[0, horizon_ns)`.
pub fn expand(spec: &SignalSpec, horizon_ns: u64) -> Result<Vec<(u64, LogicValue)>, StimulusError> {
    if horizon_ns == 0 {
        return Err(StimulusError::at("horizon_ns", "must be positive"));
    }
    spec.validate("signal")?;
    Ok(spec.changes(horizon_ns).collect())
}

/// Signals for a circuit's top inputs plus the run length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSet {
    pub horizon_ns: u64,
    pub assignments: BTreeMap<String, SignalSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StimulusFile {
    format_version: u32,
    horizon_ns: u64,
    assignments: BTreeMap<String, SignalSpec>,
}

impl StimulusSet {
    pub fn new(horizon_ns: u64) -> Self {
        StimulusSet { horizon_ns, assignments: BTreeMap::new() }
    }

    pub fn with(mut self, input: impl Into<String>, spec: SignalSpec) -> Self {
        self.assignments.insert(input.into(), spec);
        self
    }

    pub fn validate(&self) -> Result<(), StimulusError> {
        if self.horizon_ns == 0 {
            return Err(StimulusError::at("horizon_ns", "must be positive"));
        }
        for (name, spec) in &self.assignments {
            spec.validate(&format!("assignments.{name}"))?;
        }
        Ok(())
    }

    /// Every instant at which some input changes, sorted and deduplicated.
    pub fn change_times(&self) -> Vec<u64> {
        let mut times: Vec<u64> =
            self.assignments.values().flat_map(|s| s.changes(self.horizon_ns).map(|(t, _)| t)).collect();
        times.sort_unstable();
        times.dedup();
        times
    }
}

pub fn serialize_stimulus(s: &StimulusSet) -> Vec<u8> {
    let file = StimulusFile { format_version: FORMAT_VERSION, horizon_ns: s.horizon_ns, assignments: s.assignments.clone() };
    let mut out = serde_json::to_vec_pretty(&file).expect("stimulus serializes");
    out.push(b'\n');
    out
}

pub fn deserialize_stimulus(bytes: &[u8]) -> Result<StimulusSet, StimulusError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| syntax_error(bytes, &e))?;
    stimulus_from_value(value)
}

/// Builds a stimulus set from an already-parsed JSON object.
pub fn stimulus_from_value(value: serde_json::Value) -> Result<StimulusSet, StimulusError> {
    match value.get("format_version") {
        None => return Err(StimulusError::at("format_version", "missing field")),
        Some(v) if v.as_u64() != Some(FORMAT_VERSION as u64) => {
            return Err(StimulusError::at("format_version", format!("unsupported version {v}")))
        }
        _ => {}
    }
    // Decode field by field so errors carry a path.
    let obj = value.as_object().ok_or_else(|| StimulusError::at("", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "format_version" | "horizon_ns" | "assignments") {
            return Err(StimulusError::at(key.as_str(), "unknown field"));
        }
    }
    let horizon_ns = obj
        .get("horizon_ns")
        .ok_or_else(|| StimulusError::at("horizon_ns", "missing field"))?
        .as_u64()
        .ok_or_else(|| StimulusError::at("horizon_ns", "expected a non-negative integer"))?;
    let raw = obj
        .get("assignments")
        .ok_or_else(|| StimulusError::at("assignments", "missing field"))?
        .as_object()
        .ok_or_else(|| StimulusError::at("assignments", "expected an object"))?;
    let mut assignments = BTreeMap::new();
    for (name, spec) in raw {
        let path = format!("assignments.{name}");
        let spec: SignalSpec =
            serde_json::from_value(spec.clone()).map_err(|e| StimulusError::at(path.as_str(), e.to_string()))?;
        assignments.insert(name.clone(), spec);
    }
    let set = StimulusSet { horizon_ns, assignments };
    set.validate()?;
    Ok(set)
}

fn syntax_error(bytes: &[u8], e: &serde_json::Error) -> StimulusError {
    let offset = json_error_offset(bytes, e.line(), e.column());
    StimulusError::at(format!("line {}, column {} (byte {offset})", e.line(), e.column()), e.to_string())
}
