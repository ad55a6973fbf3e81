//! Runs the bundled two-digit counter and prints the displayed number
//! before every clock edge. With a path argument the VCD is written there.
//!
//!     cargo run -p dclab --example counter -- /tmp/counter.vcd

use dclab::components::decode_display;
use dclab::demo;
use dclab::sim::{export_vcd, simulate, SimConfig, Trace};
use dclab::ComponentRegistry;

/// Reads a display from its segment outputs, `?` when unlit or unknown.
fn digit(reg: &ComponentRegistry, trace: &Trace, prefix: &str, t: u64) -> char {
    let model = reg.get("SEVEN_SEG").unwrap();
    let inputs = ["a", "b", "c", "d", "e", "f", "g"]
        .iter()
        .map(|s| (s.to_string(), trace.sample(&format!("{prefix}_{s}"), t).unwrap()))
        .collect();
    match decode_display(model, &inputs).unwrap().digit() {
        Some(d) => char::from(b'0' + d),
        None => '?',
    }
}

fn main() {
    let reg = ComponentRegistry::builtin();
    let c = demo::circuit(demo::COUNTER60);
    let stim = demo::stimulus(demo::COUNTER_STIM);
    let run = simulate(&c, &stim, &SimConfig::new(stim.horizon_ns), &reg).unwrap();
    let mut shown = Vec::new();
    for k in 0..61u64 {
        let t = 10_000_000 + k * 20_000_000 - 1;
        shown.push(format!("{}{}", digit(&reg, &run.trace, "tens", t), digit(&reg, &run.trace, "ones", t)));
    }
    println!("{}", shown.join(" "));
    print!("{}", run.log.to_text());
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, export_vcd(&run.trace)).unwrap();
        println!("wrote {path}");
    }
}
