//! Behavioral models of catalog parts and the registry that holds them.
//!
//! Every part is described by a JSON fixture (see `parts/`): pins, kind,
//! parameters and a behavior section. Combinational outputs are given as
//! boolean expressions or as a prioritized function table with `-` wildcards
//! and are compiled to full truth tables at load time. Sequential parts name
//! one of the built-in update rules and bind its roles to pins.

mod display;
pub mod expr;
mod fixture;
pub mod sequential;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::logic::LogicValue;
use crate::netlist::ParamValue;
use crate::stimulus::SignalSpec;

pub use display::{DisplayState, SegmentState};
pub use expr::BoolExpr;
pub use fixture::parse_model;
pub use sequential::{Edge, SequentialRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PinDirection {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinSpec {
    pub name: String,
    pub direction: PinDirection,
    /// Physical package pin number, for documentation.
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Combinational,
    Sequential,
    Source,
    Display,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Combinational => "COMBINATIONAL",
            ModelKind::Sequential => "SEQUENTIAL",
            ModelKind::Source => "SOURCE",
            ModelKind::Display => "DISPLAY",
        };
        f.write_str(s)
    }
}

/// Declared type and range of one instance parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamType {
    Int { min: i64, max: i64 },
    /// Real number in the open-closed interval `(min, max]`.
    Number { min: f64, max: f64 },
    Logic,
    Choice { choices: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub ty: ParamType,
}

impl ParamSpec {
    /// `Err(reason)` when the value is of the wrong type or out of range.
    pub fn check(&self, value: &ParamValue) -> Result<(), String> {
        match (&self.ty, value) {
            (ParamType::Int { min, max }, ParamValue::Int(v)) => {
                if v < min || v > max {
                    Err(format!("{v} outside [{min}, {max}]"))
                } else {
                    Ok(())
                }
            }
            (ParamType::Number { min, max }, v) => match v.as_f64() {
                Some(x) if x > *min && x <= *max && x.is_finite() => Ok(()),
                Some(x) => Err(format!("{x} outside ({min}, {max}]")),
                None => Err("expected a number".into()),
            },
            (ParamType::Logic, ParamValue::Text(s)) => {
                s.parse::<LogicValue>().map(|_| ()).map_err(|e| e.to_string())
            }
            (ParamType::Logic, ParamValue::Int(0 | 1)) => Ok(()),
            (ParamType::Choice { choices }, ParamValue::Text(s)) => {
                if choices.contains(s) {
                    Ok(())
                } else {
                    Err(format!("{s:?} is not one of {choices:?}"))
                }
            }
            (ty, v) => Err(format!("value {v} does not match declared type {ty:?}")),
        }
    }
}

/// One compiled combinational output.
#[derive(Debug, Clone, PartialEq)]
pub struct CombOutput {
    /// Model pin index of the output.
    pub pin: usize,
    /// Model pin indices of the inputs the output depends on; the first is the
    /// most significant bit of the table index.
    pub support: Vec<usize>,
    pub table: Vec<LogicValue>,
}

impl CombOutput {
    /// Four-valued evaluation: unknown inputs are enumerated and the outcomes
    /// merged, so a controlling value decides the output even next to an `X`.
    pub fn eval(&self, pin_values: &[LogicValue]) -> LogicValue {
        let mut base = 0usize;
        let mut unknown = Vec::new();
        let n = self.support.len();
        for (i, &p) in self.support.iter().enumerate() {
            let bit = n - 1 - i;
            match pin_values.get(p).copied().unwrap_or(LogicValue::X).as_input() {
                LogicValue::One => base |= 1 << bit,
                LogicValue::Zero => {}
                _ => unknown.push(bit),
            }
        }
        let mut acc = self.table[base];
        for combo in 1usize..(1 << unknown.len()) {
            if acc == LogicValue::X {
                break;
            }
            let mut idx = base;
            for (j, &bit) in unknown.iter().enumerate() {
                if combo >> j & 1 == 1 {
                    idx |= 1 << bit;
                }
            }
            acc = acc.merge(self.table[idx]);
        }
        acc
    }
}

/// Source text of a combinational behavior, kept for the VHDL emitter.
#[derive(Debug, Clone, PartialEq)]
pub enum CombSource {
    Exprs { terms: Vec<(String, BoolExpr)>, outputs: Vec<(String, BoolExpr)> },
    Table { inputs: Vec<String>, outputs: Vec<String>, rows: Vec<(String, String)>, default: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombLogic {
    pub outputs: Vec<CombOutput>,
    pub source: CombSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceTemplate {
    /// Fixed level (VCC, GND).
    Constant(LogicValue),
    /// Level taken from the `value` parameter.
    Switch,
    /// Periodic clock from the `freq_hz`, `duty` and `phase_ns` parameters.
    Clock,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    Combinational(CombLogic),
    Sequential(SequentialRule),
    Source(SourceTemplate),
    /// Segment name to input pin index.
    Display(Vec<(String, usize)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentModel {
    pub part: String,
    pub description: String,
    pub pins: Vec<PinSpec>,
    pub kind: ModelKind,
    pub behavior: Behavior,
    pub delay_ns: u64,
    pub params: Vec<ParamSpec>,
    /// Power-on state of sequential parts.
    pub reset_state: Vec<LogicValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("fixture {file}: {reason}")]
    Fixture { file: String, reason: String },
    #[error("{part}: missing value for input pin {pin}")]
    MissingInput { part: String, pin: String },
    #[error("{part} is {actual}, operation requires {expected}")]
    WrongKind { part: String, expected: ModelKind, actual: ModelKind },
    #[error("contract violation: {0}")]
    Contract(String),
}

impl ComponentModel {
    pub fn pin_index(&self, name: &str) -> Option<usize> {
        self.pins.iter().position(|p| p.name == name)
    }

    pub fn pin(&self, name: &str) -> Option<&PinSpec> {
        self.pins.iter().find(|p| p.name == name)
    }

    pub fn input_pins(&self) -> impl Iterator<Item = (usize, &PinSpec)> {
        self.pins.iter().enumerate().filter(|(_, p)| p.direction == PinDirection::Input)
    }

    pub fn output_pins(&self) -> impl Iterator<Item = (usize, &PinSpec)> {
        self.pins.iter().enumerate().filter(|(_, p)| p.direction == PinDirection::Output)
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Input pins whose value can reach the given output pin.
    pub fn support_of(&self, output: usize) -> Vec<usize> {
        match &self.behavior {
            Behavior::Combinational(c) => {
                c.outputs.iter().find(|o| o.pin == output).map(|o| o.support.clone()).unwrap_or_default()
            }
            Behavior::Sequential(rule) => rule.support_of(output),
            Behavior::Source(_) | Behavior::Display(_) => Vec::new(),
        }
    }

    /// Inputs that must be driven for the part to work given which pins are
    /// wired: inputs feeding a connected output, and every input of a display
    /// that has at least one connected input.
    pub fn required_inputs(&self, connected: &dyn Fn(usize) -> bool) -> Vec<usize> {
        let mut req: Vec<usize> = match &self.behavior {
            Behavior::Display(segs) => {
                if segs.iter().any(|(_, p)| connected(*p)) {
                    segs.iter().map(|(_, p)| *p).collect()
                } else {
                    Vec::new()
                }
            }
            _ => self.output_pins().filter(|(i, _)| connected(*i)).flat_map(|(i, _)| self.support_of(i)).collect(),
        };
        req.sort_unstable();
        req.dedup();
        req
    }

    /// Output propagation delay honoring a `delay_ns` parameter override.
    pub fn effective_delay(&self, params: &BTreeMap<String, ParamValue>) -> u64 {
        match params.get("delay_ns") {
            Some(ParamValue::Int(v)) if *v >= 0 => *v as u64,
            _ => self.delay_ns,
        }
    }

    /// Initial driven value of an output pin: an `init.<pin>` override, the
    /// reset state for sequential state pins, otherwise `X`.
    pub fn initial_output(&self, pin: usize, params: &BTreeMap<String, ParamValue>) -> LogicValue {
        let key = format!("init.{}", self.pins[pin].name);
        if let Some(v) = params.get(&key).and_then(ParamValue::as_logic) {
            return v;
        }
        if let Behavior::Sequential(rule) = &self.behavior {
            if let Some(i) = rule.state_pins().iter().position(|&p| p == pin) {
                return self.reset_state[i];
            }
        }
        LogicValue::X
    }

    /// Power-on state vector with `init.<pin>` overrides applied.
    pub fn initial_state(&self, params: &BTreeMap<String, ParamValue>) -> Vec<LogicValue> {
        match &self.behavior {
            Behavior::Sequential(rule) => rule.state_pins().iter().map(|&p| self.initial_output(p, params)).collect(),
            _ => Vec::new(),
        }
    }

    /// The stimulus a source instance produces.
    pub fn source_signal(&self, params: &BTreeMap<String, ParamValue>) -> Option<SignalSpec> {
        let Behavior::Source(t) = &self.behavior else { return None };
        let num = |k: &str, d: f64| params.get(k).and_then(ParamValue::as_f64).unwrap_or(d);
        Some(match t {
            SourceTemplate::Constant(v) => SignalSpec::Constant { value: *v },
            SourceTemplate::Switch => SignalSpec::Constant {
                value: params.get("value").and_then(ParamValue::as_logic).unwrap_or(LogicValue::Zero),
            },
            SourceTemplate::Clock => SignalSpec::Clock {
                freq_hz: num("freq_hz", 50.0),
                duty: num("duty", 0.5),
                phase_ns: num("phase_ns", 0.0) as u64,
            },
        })
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<(), ModelError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(ModelError::WrongKind { part: self.part.clone(), expected: kind, actual: self.kind })
        }
    }

    /// Pin values by index, failing on any missing input pin.
    fn gather_inputs(&self, inputs: &BTreeMap<String, LogicValue>) -> Result<Vec<LogicValue>, ModelError> {
        self.pins
            .iter()
            .map(|p| match p.direction {
                PinDirection::Input => inputs
                    .get(&p.name)
                    .copied()
                    .ok_or_else(|| ModelError::MissingInput { part: self.part.clone(), pin: p.name.clone() }),
                PinDirection::Output => Ok(LogicValue::X),
            })
            .collect()
    }
}

/// Evaluates a combinational part: a value for every output pin.
pub fn eval_combinational(
    model: &ComponentModel,
    inputs: &BTreeMap<String, LogicValue>,
) -> Result<BTreeMap<String, LogicValue>, ModelError> {
    model.expect_kind(ModelKind::Combinational)?;
    let Behavior::Combinational(logic) = &model.behavior else { unreachable!() };
    let values = model.gather_inputs(inputs)?;
    Ok(logic.outputs.iter().map(|o| (model.pins[o.pin].name.clone(), o.eval(&values))).collect())
}

/// Clock activity per clock pin name; pins not listed saw no edge.
pub type ClockEdges = BTreeMap<String, Edge>;

/// Advances a sequential part by one evaluation.
///
/// Returns the next state vector and every output pin value.
pub fn step_sequential(
    model: &ComponentModel,
    state: &[LogicValue],
    inputs: &BTreeMap<String, LogicValue>,
    edges: &ClockEdges,
) -> Result<(Vec<LogicValue>, BTreeMap<String, LogicValue>), ModelError> {
    model.expect_kind(ModelKind::Sequential)?;
    let Behavior::Sequential(rule) = &model.behavior else { unreachable!() };
    let values = model.gather_inputs(inputs)?;
    let mut edge_vec = vec![Edge::None; model.pins.len()];
    for (name, e) in edges {
        let idx = model
            .pin_index(name)
            .ok_or_else(|| ModelError::Contract(format!("{} has no pin {name}", model.part)))?;
        edge_vec[idx] = *e;
    }
    let (next, outs) = rule.step(state, &values, &edge_vec)?;
    Ok((next, outs.into_iter().map(|(p, v)| (model.pins[p].name.clone(), v)).collect()))
}

/// Renders a display part's segments (common cathode: input `1` lights).
pub fn decode_display(
    model: &ComponentModel,
    inputs: &BTreeMap<String, LogicValue>,
) -> Result<DisplayState, ModelError> {
    model.expect_kind(ModelKind::Display)?;
    let Behavior::Display(segs) = &model.behavior else { unreachable!() };
    Ok(DisplayState::from_segments(segs.iter().map(|(name, pin)| {
        let v = inputs.get(&model.pins[*pin].name).copied().unwrap_or(LogicValue::Z);
        (name.clone(), SegmentState::from_input(v))
    })))
}

const BUILTIN_FIXTURES: &[(&str, &str)] = &[
    ("74LS00.json", include_str!("../../parts/74LS00.json")),
    ("74LS02.json", include_str!("../../parts/74LS02.json")),
    ("74LS04.json", include_str!("../../parts/74LS04.json")),
    ("74LS08.json", include_str!("../../parts/74LS08.json")),
    ("74LS32.json", include_str!("../../parts/74LS32.json")),
    ("74LS86.json", include_str!("../../parts/74LS86.json")),
    ("74LS74.json", include_str!("../../parts/74LS74.json")),
    ("74LS138.json", include_str!("../../parts/74LS138.json")),
    ("74LS151.json", include_str!("../../parts/74LS151.json")),
    ("74LS153.json", include_str!("../../parts/74LS153.json")),
    ("74LS163.json", include_str!("../../parts/74LS163.json")),
    ("74LS283.json", include_str!("../../parts/74LS283.json")),
    ("7448.json", include_str!("../../parts/7448.json")),
    ("SEVEN_SEG.json", include_str!("../../parts/SEVEN_SEG.json")),
    ("LED.json", include_str!("../../parts/LED.json")),
    ("CLOCK.json", include_str!("../../parts/CLOCK.json")),
    ("SWITCH.json", include_str!("../../parts/SWITCH.json")),
    ("VCC.json", include_str!("../../parts/VCC.json")),
    ("GND.json", include_str!("../../parts/GND.json")),
];

/// Part name to model. Built once and shared read-only.
#[derive(Debug, Clone, Default)]
pub struct ComponentRegistry {
    models: BTreeMap<String, Arc<ComponentModel>>,
}

impl ComponentRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled catalog.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        for (file, text) in BUILTIN_FIXTURES {
            let model = parse_model(file, text).unwrap_or_else(|e| panic!("bundled fixture is invalid: {e}"));
            reg.insert(model);
        }
        reg
    }

    /// Adds every `*.json` fixture in a directory, replacing same-named parts.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, ModelError> {
        let io_err = |e: std::io::Error| ModelError::Fixture { file: dir.display().to_string(), reason: e.to_string() };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in &paths {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            self.insert(parse_model(&path.display().to_string(), &text)?);
        }
        Ok(paths.len())
    }

    pub fn insert(&mut self, model: ComponentModel) {
        self.models.insert(model.part.clone(), Arc::new(model));
    }

    pub fn get(&self, part: &str) -> Option<&Arc<ComponentModel>> {
        self.models.get(part)
    }

    pub fn parts(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    pub fn models(&self) -> impl Iterator<Item = &Arc<ComponentModel>> {
        self.models.values()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}
