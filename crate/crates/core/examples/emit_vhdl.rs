//! Translates the NAND demo circuit to VHDL with a testbench, then parses
//! and simulates the result to show the round trip.

use dclab::demo;
use dclab::vhdl::{elaborate, emit_testbench, emit_vhdl, parse_vhdl, simulate_vhdl};
use dclab::sim::SimConfig;
use dclab::stimulus::StimulusSet;
use dclab::ComponentRegistry;

fn main() {
    let reg = ComponentRegistry::builtin();
    let c = demo::circuit(demo::NAND);
    let stim = demo::stimulus(demo::NAND_STIM);
    let mut units = emit_vhdl(&c, &reg).unwrap();
    units.push(emit_testbench(&c, &stim).unwrap());
    for u in units.iter().filter(|u| u.source_name != "dclab_parts.vhd") {
        println!("-- {}\n{}", u.source_name, u.text);
    }
    let (ast, diags) = parse_vhdl(&units);
    assert!(diags.is_empty(), "{diags:?}");
    let top = units.last().unwrap().source_name.trim_end_matches(".vhd").to_string();
    let (design, diags) = elaborate(&ast, &top, &reg);
    assert!(diags.is_empty(), "{diags:?}");
    let horizon = ast.horizon_ns.unwrap();
    let run = simulate_vhdl(&design.unwrap(), &StimulusSet::new(horizon), &SimConfig::new(horizon)).unwrap();
    for s in &run.trace.signals {
        let changes: Vec<String> = s.changes.iter().map(|(t, v)| format!("{t}:{v}")).collect();
        println!("{:>4} {}", s.label, changes.join(" "));
    }
}
