//! Builds a stimulus set, expands it to change lists and prints the JSON.

use dclab::stimulus::{expand, serialize_stimulus, SignalSpec, StimulusSet};
use dclab::LogicValue::{One, Zero};

fn main() {
    let s = StimulusSet::new(200)
        .with("clk", SignalSpec::Clock { freq_hz: 20_000_000.0, duty: 0.5, phase_ns: 5 })
        .with("reset", SignalSpec::Pattern { edges: vec![(0, One), (30, Zero)] })
        .with("enable", SignalSpec::constant(One));
    s.validate().unwrap();
    for (name, spec) in &s.assignments {
        let changes = expand(spec, s.horizon_ns).unwrap();
        let shown: Vec<String> = changes.iter().map(|(t, v)| format!("{t}:{v}")).collect();
        println!("{name:>6} {}", shown.join(" "));
    }
    println!("{}", String::from_utf8(serialize_stimulus(&s)).unwrap());
}
