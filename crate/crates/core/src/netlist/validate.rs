//! Edit-time rules checked before a circuit may be simulated.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Circuit, PinRef};
use crate::components::{Behavior, ComponentRegistry, PinDirection, SourceTemplate};
use crate::logic::LogicValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    OutputConflict,
    ShortCircuit,
    DanglingPinRef,
    UnknownPart,
    BadParam,
    FloatingRequiredInput,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::OutputConflict => "OUTPUT_CONFLICT",
            IssueCode::ShortCircuit => "SHORT_CIRCUIT",
            IssueCode::DanglingPinRef => "DANGLING_PIN_REF",
            IssueCode::UnknownPart => "UNKNOWN_PART",
            IssueCode::BadParam => "BAD_PARAM",
            IssueCode::FloatingRequiredInput => "FLOATING_REQUIRED_INPUT",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    /// `net:<id>`, `instance:<id>` or `pin:<instance>.<pin>`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    /// No errors: the circuit may be simulated.
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn count(&self, code: IssueCode) -> usize {
        self.errors.iter().chain(&self.warnings).filter(|i| i.code == code).count()
    }
}

/// What drives a net endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Driver {
    Constant(LogicValue),
    Active,
}

/// Checks a circuit against the registry. Never fails; every problem is a
/// report entry. Entries are sorted, so the result does not depend on the
/// order of instances or nets.
pub fn validate_circuit(c: &Circuit, registry: &ComponentRegistry) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut err = |code, location: String, message: String| report.errors.push(Issue { code, location, message });

    for inst in &c.instances {
        let Some(model) = registry.get(&inst.part) else {
            err(IssueCode::UnknownPart, format!("instance:{}", inst.id), format!("unknown part {:?}", inst.part));
            continue;
        };
        for (key, value) in &inst.params {
            match model.param(key) {
                None => err(
                    IssueCode::BadParam,
                    format!("instance:{}", inst.id),
                    format!("{} has no parameter {key:?}", inst.part),
                ),
                Some(spec) => {
                    if let Err(reason) = spec.check(value) {
                        err(IssueCode::BadParam, format!("instance:{}", inst.id), format!("parameter {key}: {reason}"));
                    }
                }
            }
        }
    }

    // Per net: collect drivers, and remember which pins are wired.
    let mut wired: BTreeMap<&PinRef, &str> = BTreeMap::new();
    for net in &c.nets {
        let mut drivers: Vec<(String, Driver)> = Vec::new();
        for port in c.top_inputs.iter().filter(|p| p.net == net.id) {
            drivers.push((format!("top input {}", port.name), Driver::Active));
        }
        for ep in &net.endpoints {
            wired.insert(ep, &net.id);
            let Some(inst) = c.instance(&ep.component) else {
                err(
                    IssueCode::DanglingPinRef,
                    format!("net:{}", net.id),
                    format!("endpoint {ep} names no instance"),
                );
                continue;
            };
            let Some(model) = registry.get(&inst.part) else { continue };
            let Some(pin) = model.pin(&ep.pin) else {
                err(
                    IssueCode::DanglingPinRef,
                    format!("net:{}", net.id),
                    format!("endpoint {ep}: {} has no pin {:?}", inst.part, ep.pin),
                );
                continue;
            };
            if pin.direction == PinDirection::Output {
                let kind = match &model.behavior {
                    Behavior::Source(SourceTemplate::Constant(v)) => Driver::Constant(*v),
                    Behavior::Source(SourceTemplate::Switch) => Driver::Constant(
                        inst.params.get("value").and_then(|v| v.as_logic()).unwrap_or(LogicValue::Zero),
                    ),
                    _ => Driver::Active,
                };
                drivers.push((ep.to_string(), kind));
            }
        }
        drivers.sort_by(|a, b| a.0.cmp(&b.0));
        let high = drivers.iter().find(|(_, d)| *d == Driver::Constant(LogicValue::One));
        let low = drivers.iter().find(|(_, d)| *d == Driver::Constant(LogicValue::Zero));
        if let (Some(h), Some(l)) = (high, low) {
            err(
                IssueCode::ShortCircuit,
                format!("net:{}", net.id),
                format!("constant high {} is tied to constant low {}", h.0, l.0),
            );
        } else if drivers.len() >= 2 {
            let same_constant =
                drivers.iter().all(|(_, d)| matches!(d, Driver::Constant(_))) && drivers.windows(2).all(|w| w[0].1 == w[1].1);
            if !same_constant {
                let names: Vec<&str> = drivers.iter().map(|(n, _)| n.as_str()).collect();
                err(
                    IssueCode::OutputConflict,
                    format!("net:{}", net.id),
                    format!("{} outputs drive the same net: {}", drivers.len(), names.join(", ")),
                );
            }
        }
    }

    let driven: BTreeMap<&str, bool> = c
        .nets
        .iter()
        .map(|n| {
            let by_port = c.top_inputs.iter().any(|p| p.net == n.id);
            let by_pin = n.endpoints.iter().any(|ep| {
                c.instance(&ep.component)
                    .and_then(|i| registry.get(&i.part))
                    .and_then(|m| m.pin(&ep.pin))
                    .is_some_and(|p| p.direction == PinDirection::Output)
            });
            (n.id.as_str(), by_port || by_pin)
        })
        .collect();
    let observed: Vec<&str> = c.top_outputs.iter().map(|p| p.net.as_str()).collect();

    for inst in &c.instances {
        let Some(model) = registry.get(&inst.part) else { continue };
        let net_at = |i: usize| wired.get(&PinRef::new(&inst.id, &model.pins[i].name)).copied();
        // An output counts as used when its net reaches anything else.
        let connected = |i: usize| match net_at(i) {
            Some(net) => {
                model.pins[i].direction == PinDirection::Input
                    || observed.contains(&net)
                    || c.net(net).is_some_and(|n| n.endpoints.len() > 1)
            }
            None => false,
        };
        for i in model.required_inputs(&connected) {
            let pin = &model.pins[i].name;
            match net_at(i) {
                None => report.warnings.push(Issue {
                    code: IssueCode::FloatingRequiredInput,
                    location: format!("pin:{}.{pin}", inst.id),
                    message: format!("input {pin} of {} is unconnected and reads as X", inst.part),
                }),
                Some(net) if !driven.get(net).copied().unwrap_or(false) => report.warnings.push(Issue {
                    code: IssueCode::FloatingRequiredInput,
                    location: format!("pin:{}.{pin}", inst.id),
                    message: format!("input {pin} of {} is on undriven net {net} and reads as X", inst.part),
                }),
                Some(_) => {}
            }
        }
    }

    report.errors.sort();
    report.warnings.sort();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> ComponentRegistry {
        ComponentRegistry::builtin()
    }

    #[test]
    fn empty_circuit_is_valid() {
        let r = validate_circuit(&Circuit::new("empty"), &reg());
        assert!(r.errors.is_empty());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn two_outputs_on_one_net() {
        let mut c = Circuit::new("bad");
        c.add_instance("u1", "74LS00");
        c.add_instance("u2", "74LS04");
        c.connect("n", &[("u1", "1Y"), ("u2", "1Y")]).unwrap();
        let r = validate_circuit(&c, &reg());
        assert_eq!(r.errors.len(), 1, "{r:?}");
        assert_eq!(r.errors[0].code, IssueCode::OutputConflict);
        assert_eq!(r.errors[0].location, "net:n");
    }

    #[test]
    fn vcc_tied_to_gnd() {
        let mut c = Circuit::new("short");
        c.add_instance("p", "VCC");
        c.add_instance("g", "GND");
        c.connect("rail", &[("p", "Y"), ("g", "Y")]).unwrap();
        let r = validate_circuit(&c, &reg());
        assert_eq!(r.errors.len(), 1, "{r:?}");
        assert_eq!(r.errors[0].code, IssueCode::ShortCircuit);
    }

    #[test]
    fn tied_grounds_are_fine() {
        let mut c = Circuit::new("gnds");
        c.add_instance("g1", "GND");
        c.add_instance("g2", "GND");
        c.connect("rail", &[("g1", "Y"), ("g2", "Y")]).unwrap();
        assert!(validate_circuit(&c, &reg()).is_ok());
    }

    #[test]
    fn floating_input_on_used_gate() {
        let mut c = Circuit::new("float");
        c.add_instance("u1", "74LS00");
        c.connect("a", &[("u1", "1A")]).unwrap();
        c.connect("y", &[("u1", "1Y")]).unwrap();
        c.add_top_input("a", "a");
        c.add_top_output("y", "y");
        let r = validate_circuit(&c, &reg());
        assert!(r.errors.is_empty());
        assert_eq!(r.warnings.len(), 1, "{r:?}");
        assert_eq!(r.warnings[0].code, IssueCode::FloatingRequiredInput);
        assert_eq!(r.warnings[0].location, "pin:u1.1B");
    }

    #[test]
    fn unknown_parts_params_and_pins() {
        let mut c = Circuit::new("junk");
        c.add_instance("u1", "74LS999");
        c.add_instance("u2", "74LS00").params.insert("speed".into(), crate::netlist::ParamValue::Int(3));
        c.add_instance("c1", "CLOCK").params.insert("freq_hz".into(), crate::netlist::ParamValue::Int(-5));
        c.connect("n", &[("u2", "9Z"), ("ghost", "A")]).unwrap();
        let r = validate_circuit(&c, &reg());
        assert_eq!(r.count(IssueCode::UnknownPart), 1);
        assert_eq!(r.count(IssueCode::BadParam), 2);
        assert_eq!(r.count(IssueCode::DanglingPinRef), 2);
    }

    #[test]
    fn top_input_against_gate_output() {
        let mut c = Circuit::new("fight");
        c.add_instance("u1", "74LS04");
        c.connect("n", &[("u1", "1Y")]).unwrap();
        c.add_top_input("a", "n");
        let r = validate_circuit(&c, &reg());
        assert_eq!(r.count(IssueCode::OutputConflict), 1);
    }
}
