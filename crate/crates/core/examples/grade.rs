//! Grades the three bundled counters against the correct one.

use dclab::demo;
use dclab::design::{Design, InternalBackend};
use dclab::grader::{grade, Verdict};

fn main() {
    let backend = InternalBackend::builtin();
    let tps = demo::counter_test_points();
    let reference = Design::Circuit(demo::circuit(demo::COUNTER60));
    let candidates = [
        ("mod 60", Design::Circuit(demo::circuit(demo::COUNTER60))),
        ("mod 100", Design::Circuit(demo::circuit(demo::COUNTER100))),
        ("stuck", Design::Circuit(demo::circuit(demo::COUNTER_STUCK))),
        ("vhdl", Design::Vhdl { units: demo::counter60_vhdl(), top: "counter60".into() }),
    ];
    for (name, design) in &candidates {
        let r = grade(&backend, design, &reference, &tps).unwrap();
        println!("{name}: score {} ({}/{})", r.score, r.passed, r.total);
        for t in &r.per_test_point {
            let v = if t.verdict == Verdict::Pass { "pass" } else { "FAIL" };
            match &t.first_mismatch {
                Some(m) => println!("  {:<6} {v} {} at {} ns: want {} got {}", t.id, m.signal, m.time_ns, m.expected, m.actual),
                None => println!("  {:<6} {v}", t.id),
            }
        }
    }
}
