#![allow(dead_code)]

pub mod random;

use std::path::PathBuf;

use dclab::components::ComponentRegistry;
use dclab::design::Design;
use dclab::grader::TestPoint;
use dclab::logic::LogicValue;
use dclab::netlist::{deserialize_circuit, Circuit};
use dclab::stimulus::{deserialize_stimulus, SignalSpec, StimulusSet};
use dclab::vhdl::emit_vhdl;

pub const MS: u64 = 1_000_000;

pub fn fixture(name: &str) -> Vec<u8> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn circuit(name: &str) -> Circuit {
    deserialize_circuit(&fixture(name)).unwrap()
}

pub fn registry() -> ComponentRegistry {
    ComponentRegistry::builtin()
}

/// Counts through every input combination, first input most significant.
pub fn binary_patterns(inputs: &[String], step: u64) -> StimulusSet {
    let n = inputs.len();
    let steps = 1u64 << n;
    let mut s = StimulusSet::new(steps * step);
    for (i, name) in inputs.iter().enumerate() {
        let bit = n - 1 - i;
        let edges = (0..steps).map(|k| (k * step, LogicValue::from_bool(k >> bit & 1 == 1))).collect();
        s = s.with(name.clone(), SignalSpec::Pattern { edges });
    }
    s
}

/// Every valid fixture circuit with a stimulus that exercises it.
pub fn corpus() -> Vec<(&'static str, StimulusSet)> {
    let exhaustive = |file: &str| {
        let c = circuit(file);
        let names: Vec<String> = c.top_inputs.iter().map(|p| p.name.clone()).collect();
        binary_patterns(&names, 100)
    };
    let counter = || deserialize_stimulus(&fixture("counter_stim.json")).unwrap();
    vec![
        ("nand.json", exhaustive("nand.json")),
        ("feedthrough.json", exhaustive("feedthrough.json")),
        ("full_adder.json", exhaustive("full_adder.json")),
        ("adder4.json", exhaustive("adder4.json")),
        ("decoder.json", exhaustive("decoder.json")),
        ("mux8.json", exhaustive("mux8.json")),
        ("ring3.json", StimulusSet::new(200)),
        ("toggle.json", deserialize_stimulus(&fixture("toggle_stim.json")).unwrap()),
        ("counter60.json", counter()),
        ("counter100.json", counter()),
        ("counter_stuck.json", counter()),
    ]
}

/// One test point observing every top output at the default sample times.
pub fn whole_run_test_point(c: &Circuit, stim: &StimulusSet) -> TestPoint {
    TestPoint {
        id: "all".into(),
        stimulus: stim.clone(),
        observed: c.top_outputs.iter().map(|p| p.name.clone()).collect(),
        sample_times_ns: vec![],
    }
}

/// The circuit as emitted VHDL sources, not yet elaborated.
pub fn as_vhdl(c: &Circuit) -> Design {
    Design::Vhdl { units: emit_vhdl(c, &registry()).unwrap(), top: dclab::vhdl::vhdl_identifier(&c.name) }
}
