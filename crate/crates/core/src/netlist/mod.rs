//! Circuit data model: component instances, nets and top-level ports.
//!
//! Circuits persist as a versioned JSON netlist. Canvas positions are part of
//! the file so that a drawing round-trips unchanged.

mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::LogicValue;

pub use validate::{validate_circuit, Issue, IssueCode, ValidationReport};

pub const FORMAT_VERSION: u32 = 1;

/// A parameter value on an instance (frequency, initial state, variant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Num(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Num(v) => Some(*v),
            ParamValue::Text(_) => None,
        }
    }

    pub fn as_logic(&self) -> Option<LogicValue> {
        match self {
            ParamValue::Int(0) => Some(LogicValue::Zero),
            ParamValue::Int(1) => Some(LogicValue::One),
            ParamValue::Text(s) => s.parse().ok(),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// A pin on a component instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinRef {
    pub component: String,
    pub pin: String,
}

impl PinRef {
    pub fn new(component: impl Into<String>, pin: impl Into<String>) -> Self {
        PinRef { component: component.into(), pin: pin.into() }
    }
}

impl fmt::Display for PinRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.pin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentInstance {
    pub id: String,
    pub part: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    /// Canvas coordinates in pixels; irrelevant to simulation.
    #[serde(default)]
    pub position: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Net {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub endpoints: Vec<PinRef>,
}

/// An external port bound to a net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopPort {
    pub name: String,
    pub net: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub name: String,
    pub instances: Vec<ComponentInstance>,
    pub nets: Vec<Net>,
    pub top_inputs: Vec<TopPort>,
    pub top_outputs: Vec<TopPort>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistFile {
    format_version: u32,
    name: String,
    instances: Vec<ComponentInstance>,
    nets: Vec<Net>,
    top_inputs: Vec<TopPort>,
    top_outputs: Vec<TopPort>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetlistError {
    #[error("malformed netlist at byte {offset} (line {line}, column {column}): {reason}")]
    Parse { offset: usize, line: usize, column: usize, reason: String },
    #[error("unsupported netlist format_version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("invalid netlist: {0}")]
    Invalid(String),
    #[error("unknown component {0}")]
    UnknownComponent(String),
    #[error("unknown net {0}")]
    UnknownNet(String),
}

/// Converts a serde_json error position to a byte offset into `bytes`.
pub(crate) fn json_error_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut cur_line = 1;
    let mut line_start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if cur_line == line {
            break;
        }
        if b == b'\n' {
            cur_line += 1;
            line_start = i + 1;
        }
    }
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

fn parse_error(bytes: &[u8], e: serde_json::Error) -> NetlistError {
    NetlistError::Parse {
        offset: json_error_offset(bytes, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    }
}

/// Writes the JSON netlist. Output is deterministic for a given circuit.
pub fn serialize_circuit(c: &Circuit) -> Vec<u8> {
    let file = NetlistFile {
        format_version: FORMAT_VERSION,
        name: c.name.clone(),
        instances: c.instances.clone(),
        nets: c.nets.clone(),
        top_inputs: c.top_inputs.clone(),
        top_outputs: c.top_outputs.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("netlist serializes");
    out.push(b'\n');
    out
}

/// Parses a JSON netlist and checks its structural invariants.
pub fn deserialize_circuit(bytes: &[u8]) -> Result<Circuit, NetlistError> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, e))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(NetlistError::UnsupportedVersion(probe.format_version));
    }
    let file: NetlistFile = serde_json::from_slice(bytes).map_err(|e| parse_error(bytes, e))?;
    let c = Circuit {
        name: file.name,
        instances: file.instances,
        nets: file.nets,
        top_inputs: file.top_inputs,
        top_outputs: file.top_outputs,
    };
    c.check_structure()?;
    Ok(c)
}

impl Circuit {
    pub fn new(name: impl Into<String>) -> Self {
        Circuit { name: name.into(), ..Default::default() }
    }

    /// Unique ids, unique port names, ports bound to existing nets, no
    /// duplicate endpoints and at most one net per pin.
    pub fn check_structure(&self) -> Result<(), NetlistError> {
        let mut ids = BTreeSet::new();
        for inst in &self.instances {
            if !ids.insert(inst.id.as_str()) {
                return Err(NetlistError::Invalid(format!("duplicate instance id {}", inst.id)));
            }
        }
        let mut net_ids = BTreeSet::new();
        let mut seen_pins: BTreeMap<&PinRef, &str> = BTreeMap::new();
        for net in &self.nets {
            if !net_ids.insert(net.id.as_str()) {
                return Err(NetlistError::Invalid(format!("duplicate net id {}", net.id)));
            }
            for ep in &net.endpoints {
                if let Some(prev) = seen_pins.insert(ep, &net.id) {
                    return Err(NetlistError::Invalid(if prev == net.id {
                        format!("net {} lists endpoint {ep} twice", net.id)
                    } else {
                        format!("pin {ep} is on both net {prev} and net {}", net.id)
                    }));
                }
            }
        }
        let mut ports = BTreeSet::new();
        for port in self.top_inputs.iter().chain(&self.top_outputs) {
            if !ports.insert(port.name.as_str()) {
                return Err(NetlistError::Invalid(format!("duplicate top port name {}", port.name)));
            }
            if !net_ids.contains(port.net.as_str()) {
                return Err(NetlistError::Invalid(format!("port {} refers to unknown net {}", port.name, port.net)));
            }
        }
        Ok(())
    }

    pub fn instance(&self, id: &str) -> Option<&ComponentInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn net(&self, id: &str) -> Option<&Net> {
        self.nets.iter().find(|n| n.id == id)
    }

    /// The net a pin is wired to, `None` when the pin floats.
    pub fn net_of(&self, pin: &PinRef) -> Result<Option<&Net>, NetlistError> {
        if self.instance(&pin.component).is_none() {
            return Err(NetlistError::UnknownComponent(pin.component.clone()));
        }
        Ok(self.nets.iter().find(|n| n.endpoints.contains(pin)))
    }

    pub fn add_instance(&mut self, id: impl Into<String>, part: impl Into<String>) -> &mut ComponentInstance {
        self.instances.push(ComponentInstance {
            id: id.into(),
            part: part.into(),
            params: BTreeMap::new(),
            position: [0, 0],
        });
        self.instances.last_mut().expect("just pushed")
    }

    /// Adds `pins` to net `net_id`, creating the net if needed.
    ///
    /// Fails if a pin already belongs to another net.
    pub fn connect(&mut self, net_id: &str, pins: &[(&str, &str)]) -> Result<(), NetlistError> {
        for &(comp, pin) in pins {
            let p = PinRef::new(comp, pin);
            if let Some(other) = self.nets.iter().find(|n| n.endpoints.contains(&p)) {
                if other.id != net_id {
                    return Err(NetlistError::Invalid(format!("pin {p} is already on net {}", other.id)));
                }
            }
        }
        let idx = match self.nets.iter().position(|n| n.id == net_id) {
            Some(i) => i,
            None => {
                self.nets.push(Net { id: net_id.to_string(), label: None, endpoints: Vec::new() });
                self.nets.len() - 1
            }
        };
        for &(comp, pin) in pins {
            let p = PinRef::new(comp, pin);
            if !self.nets[idx].endpoints.contains(&p) {
                self.nets[idx].endpoints.push(p);
            }
        }
        Ok(())
    }

    pub fn add_top_input(&mut self, name: impl Into<String>, net: impl Into<String>) {
        self.ensure_net(net.into(), |c, n| c.top_inputs.push(TopPort { name: name.into(), net: n }));
    }

    pub fn add_top_output(&mut self, name: impl Into<String>, net: impl Into<String>) {
        self.ensure_net(net.into(), |c, n| c.top_outputs.push(TopPort { name: name.into(), net: n }));
    }

    fn ensure_net(&mut self, net: String, then: impl FnOnce(&mut Self, String)) {
        if self.net(&net).is_none() {
            self.nets.push(Net { id: net.clone(), label: None, endpoints: Vec::new() });
        }
        then(self, net);
    }

    /// Merges net `from` into net `into`; ports bound to `from` move along.
    pub fn merge_nets(&mut self, into: &str, from: &str) -> Result<(), NetlistError> {
        if into == from {
            return Ok(());
        }
        let from_idx =
            self.nets.iter().position(|n| n.id == from).ok_or_else(|| NetlistError::UnknownNet(from.into()))?;
        if self.net(into).is_none() {
            return Err(NetlistError::UnknownNet(into.into()));
        }
        let moved = self.nets.remove(from_idx);
        let target = self.nets.iter_mut().find(|n| n.id == into).expect("checked above");
        for ep in moved.endpoints {
            if !target.endpoints.contains(&ep) {
                target.endpoints.push(ep);
            }
        }
        if target.label.is_none() {
            target.label = moved.label;
        }
        for port in self.top_inputs.iter_mut().chain(self.top_outputs.iter_mut()) {
            if port.net == from {
                port.net = into.to_string();
            }
        }
        Ok(())
    }

    pub fn top_input(&self, name: &str) -> Option<&TopPort> {
        self.top_inputs.iter().find(|p| p.name == name)
    }

    pub fn top_output(&self, name: &str) -> Option<&TopPort> {
        self.top_outputs.iter().find(|p| p.name == name)
    }
}
