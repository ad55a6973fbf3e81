//! Builds two faulty circuits in code and prints what validation reports.

use dclab::netlist::{validate_circuit, Circuit};
use dclab::ComponentRegistry;

fn main() {
    let reg = ComponentRegistry::builtin();

    // Two NAND outputs wired together, and gate 2's B input left open.
    let mut c = Circuit::new("clash");
    c.add_instance("u1", "74LS00");
    c.add_top_input("a", "a");
    c.add_top_input("b", "b");
    c.connect("a", &[("u1", "1A"), ("u1", "2A")]).unwrap();
    c.connect("b", &[("u1", "1B")]).unwrap();
    c.connect("y", &[("u1", "1Y"), ("u1", "2Y")]).unwrap();
    c.add_top_output("y", "y");

    // A rail tied to both supplies.
    let mut s = Circuit::new("short");
    s.add_instance("p", "VCC");
    s.add_instance("g", "GND");
    s.connect("rail", &[("p", "Y"), ("g", "Y")]).unwrap();

    for circuit in [&c, &s] {
        let report = validate_circuit(circuit, &reg);
        println!("{}: {} error(s), {} warning(s)", circuit.name, report.errors.len(), report.warnings.len());
        for i in &report.errors {
            println!("  error   {i}");
        }
        for i in &report.warnings {
            println!("  warning {i}");
        }
    }
}
