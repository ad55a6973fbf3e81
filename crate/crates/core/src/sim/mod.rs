//! Event-driven four-valued simulation of circuits.

pub mod kernel;
pub mod procs;
pub mod trace;
mod vcd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::components::{Behavior, ComponentRegistry, PinDirection};
use crate::logic::LogicValue;
use crate::netlist::{validate_circuit, Circuit, PinRef, ValidationReport};
use crate::stimulus::{SignalSpec, StimulusError, StimulusSet};

use kernel::{KernelConfig, NetId, Network, Watch as KernelWatch};
use procs::{CombProc, PartPins, SeqProc, SourceProc};
pub use trace::{LogEntry, LogLevel, SimFault, SimLog, Trace, TraceError, TraceSignal};
pub use vcd::export_vcd;

pub const DEFAULT_MAX_DELTAS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeTarget {
    Net(String),
    Pin(PinRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub id: String,
    pub target: ProbeTarget,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Watch {
    /// Every top port and every net.
    #[default]
    AllNets,
    Probes(Vec<Probe>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_ns: u64,
    #[serde(default = "default_max_deltas")]
    pub max_deltas_per_instant: u32,
    #[serde(default)]
    pub watch: Watch,
}

fn default_max_deltas() -> u32 {
    DEFAULT_MAX_DELTAS
}

impl SimConfig {
    pub fn new(horizon_ns: u64) -> Self {
        SimConfig { horizon_ns, max_deltas_per_instant: DEFAULT_MAX_DELTAS, watch: Watch::AllNets }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimRun {
    pub trace: Trace,
    pub log: SimLog,
    /// Set when the run stopped early; the trace then ends at the fault.
    pub fault: Option<SimFault>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("circuit has {} validation error(s); first: {}", .0.errors.len(), .0.errors[0])]
    Invalid(ValidationReport),
    #[error("stimulus: {0}")]
    Stimulus(#[from] StimulusError),
    #[error("stimulus drives {0:?}, which is not a top input")]
    UnknownInput(String),
    #[error("probe {0}: {1}")]
    Probe(String, String),
    #[error("configuration: {0}")]
    Config(String),
}

pub(crate) fn check_config(cfg: &SimConfig) -> Result<(), SimError> {
    if cfg.horizon_ns == 0 {
        return Err(SimError::Config("horizon_ns must be at least 1".into()));
    }
    if cfg.max_deltas_per_instant == 0 {
        return Err(SimError::Config("max_deltas_per_instant must be at least 1".into()));
    }
    Ok(())
}

/// Simulates a validated circuit. Top inputs missing from the stimulus are
/// held at `X` with a warning.
pub fn simulate(
    c: &Circuit,
    stim: &StimulusSet,
    cfg: &SimConfig,
    registry: &ComponentRegistry,
) -> Result<SimRun, SimError> {
    check_config(cfg)?;
    let report = validate_circuit(c, registry);
    if !report.is_ok() {
        return Err(SimError::Invalid(report));
    }
    for name in stim.assignments.keys() {
        if c.top_input(name).is_none() {
            return Err(SimError::UnknownInput(name.clone()));
        }
    }
    for (name, spec) in &stim.assignments {
        spec.validate(&format!("assignments.{name}"))?;
    }
    let horizon = cfg.horizon_ns;

    let mut net = Network::new();
    let mut net_ids: BTreeMap<&str, NetId> = BTreeMap::new();
    for n in &c.nets {
        net_ids.insert(&n.id, net.add_net(n.id.clone(), LogicValue::Z));
    }
    let mut pin_net: BTreeMap<&PinRef, NetId> = BTreeMap::new();
    for n in &c.nets {
        for ep in &n.endpoints {
            pin_net.insert(ep, net_ids[n.id.as_str()]);
        }
    }

    let mut pre_log = SimLog::default();
    for w in &report.warnings {
        pre_log.push(LogLevel::Warn, 0, "FLOATING_INPUT", w.message.clone());
    }
    for port in &c.top_inputs {
        let n = net_ids[port.net.as_str()];
        let spec = match stim.assignments.get(&port.name) {
            Some(s) => s.clone(),
            None => {
                pre_log.push(LogLevel::Warn, 0, "UNCOVERED_INPUT", format!("top input {} has no stimulus; held at X", port.name));
                SignalSpec::constant(LogicValue::X)
            }
        };
        let d = net.add_driver(n, LogicValue::Z);
        net.add_process(Box::new(SourceProc::new(d, &spec, horizon)), &[]);
    }

    let mut instances: Vec<_> = c.instances.iter().collect();
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    for inst in instances {
        let model = registry.get(&inst.part).expect("validated").clone();
        let nets: Vec<Option<NetId>> =
            model.pins.iter().map(|p| pin_net.get(&PinRef::new(&inst.id, &p.name)).copied()).collect();
        let mut drivers = vec![None; model.pins.len()];
        for (i, p) in model.pins.iter().enumerate() {
            if p.direction == PinDirection::Output {
                if let Some(n) = nets[i] {
                    let init = match model.behavior {
                        Behavior::Source(_) => LogicValue::Z,
                        _ => model.initial_output(i, &inst.params),
                    };
                    drivers[i] = Some(net.add_driver(n, init));
                }
            }
        }
        let inputs: Vec<NetId> =
            model.input_pins().filter_map(|(i, _)| nets[i]).collect();
        let delay_ns = model.effective_delay(&inst.params);
        match &model.behavior {
            Behavior::Combinational(_) => {
                let p = CombProc { model: model.clone(), pins: PartPins { nets, drivers }, delay_ns };
                net.add_process(Box::new(p), &inputs);
            }
            Behavior::Sequential(_) => {
                let state = model.initial_state(&inst.params);
                let p = SeqProc { model: model.clone(), pins: PartPins { nets, drivers }, delay_ns, state };
                net.add_process(Box::new(p), &inputs);
            }
            Behavior::Source(_) => {
                let spec = model.source_signal(&inst.params).expect("source");
                for d in drivers.into_iter().flatten() {
                    net.add_process(Box::new(SourceProc::new(d, &spec, horizon)), &[]);
                }
            }
            Behavior::Display(_) => {}
        }
    }

    // Watched signals: (label, id, kernel net or None for a floating pin).
    let mut watched: Vec<(String, String, Option<NetId>)> = Vec::new();
    match &cfg.watch {
        Watch::AllNets => {
            let mut taken: BTreeMap<String, ()> = BTreeMap::new();
            for port in c.top_inputs.iter().chain(&c.top_outputs) {
                if taken.insert(port.name.clone(), ()).is_none() {
                    watched.push((port.name.clone(), port.net.clone(), Some(net_ids[port.net.as_str()])));
                }
            }
            for n in &c.nets {
                let already =
                    c.top_inputs.iter().chain(&c.top_outputs).any(|p| p.name == n.id && p.net == n.id);
                if already {
                    continue;
                }
                let label = if taken.contains_key(&n.id) { format!("net:{}", n.id) } else { n.id.clone() };
                taken.insert(label.clone(), ());
                watched.push((label, n.id.clone(), Some(net_ids[n.id.as_str()])));
            }
        }
        Watch::Probes(probes) => {
            for p in probes {
                match &p.target {
                    ProbeTarget::Net(id) => {
                        let n = net_ids
                            .get(id.as_str())
                            .ok_or_else(|| SimError::Probe(p.id.clone(), format!("no net {id:?}")))?;
                        watched.push((p.label.clone(), id.clone(), Some(*n)));
                    }
                    ProbeTarget::Pin(pin) => {
                        let known = c
                            .instance(&pin.component)
                            .and_then(|i| registry.get(&i.part))
                            .is_some_and(|m| m.pin(&pin.pin).is_some());
                        if !known {
                            return Err(SimError::Probe(p.id.clone(), format!("no pin {pin}")));
                        }
                        watched.push((p.label.clone(), pin.to_string(), pin_net.get(pin).copied()));
                    }
                }
            }
        }
    }

    let kwatch = KernelWatch { nets: watched.iter().filter_map(|w| w.2).collect() };
    let out = kernel::run(
        net,
        &kwatch,
        &KernelConfig { horizon_ns: horizon, max_deltas_per_instant: cfg.max_deltas_per_instant },
    );
    let mut recorded = out.changes.into_iter();
    let signals = watched
        .into_iter()
        .map(|(label, id, n)| TraceSignal {
            label,
            id,
            changes: match n {
                Some(_) => recorded.next().expect("one change list per watched net"),
                None => vec![(0, LogicValue::Z)],
            },
        })
        .collect();
    let horizon_ns = out.fault.as_ref().map_or(horizon, |f| f.time_ns);
    let mut log = pre_log;
    log.entries.extend(out.log.entries);
    Ok(SimRun { trace: Trace { horizon_ns, signals }, log, fault: out.fault })
}
