//! Acceptance run: one PASS/FAIL line per primary criterion. Every
//! expected value here comes from an oracle written in this file or from
//! committed reference data, never from the code under test.

#[path = "../../core/tests/common/random.rs"]
mod random;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::Request;
use chrono::{TimeZone, Utc};
use dclab::components::{eval_combinational, ModelKind};
use dclab::design::{Design, InternalBackend};
use dclab::grader::{default_sample_times, deserialize_test_points, grade, TestPoint, Verdict};
use dclab::logic::LogicValue;
use dclab::netlist::{deserialize_circuit, validate_circuit, Circuit, IssueCode};
use dclab::sim::{export_vcd, simulate, SimConfig, SimRun, Trace};
use dclab::stimulus::{deserialize_stimulus, serialize_stimulus, SignalSpec, StimulusSet};
use dclab::vhdl::{elaborate, emit_testbench, emit_vhdl, emitted_port_names, parse_vhdl, simulate_vhdl, VhdlUnit};
use dclab::ComponentRegistry;
use dclab_service::seed::seed_demo;
use dclab_service::service::{ManualClock, Service};
use http_body_util::BodyExt;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config as PropConfig, RngAlgorithm, TestRng, TestRunner};
use tower::ServiceExt;

const MS: u64 = 1_000_000;
/// Wall-clock budget for the counter run.
const COUNTER_BUDGET_S: f64 = 5.0;
/// Randomized circuits in the kernel comparison.
const RANDOM_CIRCUITS: usize = 24;
const MAX_RANDOM_INPUTS: usize = 12;
const MAX_RANDOM_GATES: usize = 24;
/// 74LS gate delay used for settle bounds.
const GATE_DELAY_NS: u64 = 10;
const RING_PERIOD_NS: u64 = 60;

type Outcome = Result<String, String>;

fn core_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn fixture(name: &str) -> Vec<u8> {
    let p = core_dir().join("fixtures").join(name);
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn circuit(name: &str) -> Circuit {
    deserialize_circuit(&fixture(name)).unwrap()
}

fn stim(name: &str) -> StimulusSet {
    deserialize_stimulus(&fixture(name)).unwrap()
}

fn registry() -> ComponentRegistry {
    ComponentRegistry::builtin()
}

fn run(c: &Circuit, s: &StimulusSet) -> SimRun {
    simulate(c, s, &SimConfig::new(s.horizon_ns), &registry()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Counts through every input combination, first input most significant.
fn binary_patterns(inputs: &[String], step: u64) -> StimulusSet {
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

fn corpus() -> Vec<(&'static str, StimulusSet)> {
    let exhaustive = |file: &str| {
        let names: Vec<String> = circuit(file).top_inputs.iter().map(|p| p.name.clone()).collect();
        binary_patterns(&names, 100)
    };
    vec![
        ("nand.json", exhaustive("nand.json")),
        ("feedthrough.json", exhaustive("feedthrough.json")),
        ("full_adder.json", exhaustive("full_adder.json")),
        ("adder4.json", exhaustive("adder4.json")),
        ("decoder.json", exhaustive("decoder.json")),
        ("mux8.json", exhaustive("mux8.json")),
        ("ring3.json", StimulusSet::new(200)),
        ("toggle.json", stim("toggle_stim.json")),
        ("counter60.json", stim("counter_stim.json")),
        ("counter100.json", stim("counter_stim.json")),
        ("counter_stuck.json", stim("counter_stim.json")),
    ]
}

fn bcd(trace: &Trace, bits: [String; 4], t: u64) -> Option<u32> {
    let mut v = 0;
    for (i, b) in bits.iter().enumerate() {
        match trace.sample(b, t).ok()? {
            LogicValue::One => v |= 1 << i,
            LogicValue::Zero => {}
            _ => return None,
        }
    }
    Some(v)
}

fn digit_bits(digit: &str, style: fn(&str, usize) -> String) -> [String; 4] {
    [0, 1, 2, 3].map(|i| style(digit, i))
}

fn net_bit(digit: &str, i: usize) -> String {
    format!("{digit}_q{i}")
}

fn vector_bit(digit: &str, i: usize) -> String {
    format!("{digit}({i})")
}

/// Instant just before rising edge `k` (1-based) of the 50 Hz clock.
fn before_edge(k: u64) -> u64 {
    10 * MS + (k - 1) * 20 * MS - 1
}

fn count(trace: &Trace, k: u64, style: fn(&str, usize) -> String) -> Option<u32> {
    Some(bcd(trace, digit_bits("tens", style), before_edge(k))? * 10 + bcd(trace, digit_bits("ones", style), before_edge(k))?)
}

fn counter_fixture() -> Outcome {
    let c = circuit("counter60.json");
    let s = stim("counter_stim.json");
    let start = Instant::now();
    let r = run(&c, &s);
    let secs = start.elapsed().as_secs_f64();
    ensure(r.fault.is_none(), || format!("fault {:?}", r.fault))?;
    let changes = s.change_times().len();
    let seq: Vec<Option<u32>> = (1..=61).map(|k| count(&r.trace, k, net_bit)).collect();
    let want: Vec<Option<u32>> = (0..60).chain([0]).map(Some).collect();
    ensure(seq == want, || format!("sampled counts {seq:?}"))?;
    ensure(secs < COUNTER_BUDGET_S, || format!("took {secs:.2} s"))?;
    Ok(format!("61 edges read 0..59 then 0; {secs:.2} s (budget {COUNTER_BUDGET_S} s); {changes} clock changes"))
}

fn truth_tables() -> Outcome {
    let reg = registry();
    let dir = core_dir().join("tests/fixtures/truth_tables");
    let (mut parts, mut rows, mut mismatches) = (0, 0, 0);
    for m in reg.models().filter(|m| m.kind == ModelKind::Combinational) {
        let text = std::fs::read_to_string(dir.join(format!("{}.txt", m.part))).map_err(|e| format!("{}: {e}", m.part))?;
        let mut lines = text.lines();
        let header = lines.next().and_then(|h| h.strip_prefix("in: ")).ok_or("bad header")?;
        let (ins, outs) = header.split_once(" | out: ").ok_or("bad header")?;
        let ins: Vec<&str> = ins.split(' ').collect();
        let outs: Vec<&str> = outs.split(' ').collect();
        let mut seen = 0;
        for l in lines {
            let (i, o) = l.split_once(' ').ok_or("bad row")?;
            let vals = ins.iter().zip(i.bytes()).map(|(n, b)| (n.to_string(), LogicValue::from_bool(b == b'1'))).collect();
            let got = eval_combinational(m, &vals).map_err(|e| format!("{}: {e}", m.part))?;
            for (name, b) in outs.iter().zip(o.bytes()) {
                if got.get(*name) != Some(&LogicValue::from_bool(b == b'1')) {
                    mismatches += 1;
                }
            }
            seen += 1;
        }
        ensure(seen == 1usize << ins.len(), || format!("{}: {seen} rows for {} inputs", m.part, ins.len()))?;
        parts += 1;
        rows += seen;
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok(format!("{parts} parts, {rows} rows, 0 mismatches"))
}

fn kernel_oracle() -> Outcome {
    let mut runner = TestRunner::new_with_rng(PropConfig::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = random::recipe(MAX_RANDOM_INPUTS, MAX_RANDOM_GATES);
    let mut checked = 0u64;
    let mut widest = 0;
    for n in 0..RANDOM_CIRCUITS {
        let recipe = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let c = recipe.circuit(&format!("rand{n}"));
        let step = GATE_DELAY_NS * (recipe.depth() as u64 + 2);
        let s = binary_patterns(&recipe.input_names(), step);
        let r = run(&c, &s);
        for k in 0..1u64 << recipe.inputs {
            let bits: Vec<bool> = (0..recipe.inputs).map(|i| k >> (recipe.inputs - 1 - i) & 1 == 1).collect();
            let want = recipe.eval(&bits);
            for (name, w) in recipe.output_names().iter().zip(want) {
                let got = r.trace.sample(name, (k + 1) * step - 1).map_err(|e| e.to_string())?;
                ensure(got == LogicValue::from_bool(w), || format!("rand{n} {name} at input {k:b}: got {got}"))?;
                checked += 1;
            }
        }
        widest = widest.max(recipe.inputs);
    }
    Ok(format!("{RANDOM_CIRCUITS} circuits up to {widest} inputs, {checked} settled samples equal"))
}

fn elaborate_units(units: &[VhdlUnit], top: &str) -> Result<dclab::vhdl::ElaboratedDesign, String> {
    let (ast, diags) = parse_vhdl(units);
    ensure(diags.is_empty(), || format!("{diags:?}"))?;
    let (d, diags) = elaborate(&ast, top, &registry());
    ensure(diags.is_empty(), || format!("{diags:?}"))?;
    d.ok_or_else(|| "no design".into())
}

fn vhdl_round_trip() -> Outcome {
    let mut compared = 0;
    for (file, s) in corpus() {
        let c = circuit(file);
        let net = run(&c, &s);
        let mut units = emit_vhdl(&c, &registry()).map_err(|e| e.to_string())?;
        let tb = emit_testbench(&c, &s).map_err(|e| e.to_string())?;
        let top = tb.source_name.trim_end_matches(".vhd").to_string();
        units.push(tb);
        let d = elaborate_units(&units, &top).map_err(|e| format!("{file}: {e}"))?;
        let vhd = simulate_vhdl(&d, &StimulusSet::new(s.horizon_ns), &SimConfig::new(s.horizon_ns)).map_err(|e| e.to_string())?;
        let names = emitted_port_names(&c);
        for p in &c.top_outputs {
            for t in default_sample_times(&s, 0) {
                let want = net.trace.sample(&p.name, t).map_err(|e| e.to_string())?;
                let got = vhd.trace.sample(&names[&p.name], t).map_err(|e| e.to_string())?;
                ensure(got == want, || format!("{file}: {} at {t} ns: {got} vs {want}", p.name))?;
                compared += 1;
            }
        }
    }
    let text = String::from_utf8(fixture("vhdl/counter60_behavioral.vhd")).unwrap();
    let d = elaborate_units(&[VhdlUnit::new("counter60_behavioral.vhd", text)], "counter60")?;
    let s = stim("counter_stim.json");
    let vhd = simulate_vhdl(&d, &s, &SimConfig::new(s.horizon_ns)).map_err(|e| e.to_string())?;
    let net = run(&circuit("counter60.json"), &s);
    for k in 1..=61 {
        let (v, g) = (count(&vhd.trace, k, vector_bit), count(&net.trace, k, net_bit));
        ensure(v == g && v == Some(((k - 1) % 60) as u32), || format!("behavioral {v:?} vs graphical {g:?} before edge {k}"))?;
    }
    for p in &circuit("counter60.json").top_outputs {
        for t in default_sample_times(&s, 0) {
            ensure(vhd.trace.sample(&p.name, t).ok() == net.trace.sample(&p.name, t).ok(), || format!("{} at {t}", p.name))?;
        }
    }
    Ok(format!("11 corpus circuits, {compared} samples equal; behavioral counter equals graphical at 61 edges"))
}

fn grading_fixtures() -> Outcome {
    let tps = deserialize_test_points(&fixture("counter_testpoints.json")).map_err(|e| e.to_string())?;
    let backend = InternalBackend::builtin();
    let reference = Design::Circuit(circuit("counter60.json"));
    let good = grade(&backend, &reference, &reference, &tps).map_err(|e| e.to_string())?;
    ensure(good.score == 100, || format!("correct counter scored {}", good.score))?;
    let wrong = grade(&backend, &Design::Circuit(circuit("counter100.json")), &reference, &tps).map_err(|e| e.to_string())?;
    ensure(wrong.score == 75 && wrong.total == 4, || format!("mod-100 counter scored {}/{}", wrong.score, wrong.total))?;
    let failed: Vec<_> = wrong.per_test_point.iter().filter(|t| t.verdict == Verdict::Fail).collect();
    ensure(failed.len() == 1, || format!("{} failing points", failed.len()))?;
    let m = failed[0].first_mismatch.as_ref().ok_or("no mismatch recorded")?;
    // The 60th rising edge wraps the right counter to 00 while the wrong
    // one reads 60, so the first differing sample is the one before edge 61.
    let wrap_tp = tps.iter().find(|t| t.id == failed[0].id).unwrap();
    let sample_times =
        if wrap_tp.sample_times_ns.is_empty() { default_sample_times(&wrap_tp.stimulus, 0) } else { wrap_tp.sample_times_ns.clone() };
    ensure(sample_times.contains(&m.time_ns), || format!("mismatch at {} is not a sample time", m.time_ns))?;
    ensure(m.time_ns == before_edge(61), || format!("first mismatch at {} ns, wrap sample is {} ns", m.time_ns, before_edge(61)))?;
    let mut reflexive = 0;
    for (file, s) in corpus() {
        let c = circuit(file);
        let tp = TestPoint {
            id: "all".into(),
            stimulus: s.clone(),
            observed: c.top_outputs.iter().map(|p| p.name.clone()).collect(),
            sample_times_ns: vec![],
        };
        let d = Design::Circuit(c);
        let r = grade(&backend, &d, &d, &[tp]).map_err(|e| format!("{file}: {e}"))?;
        ensure(r.score == 100, || format!("{file} graded against itself: {}", r.score))?;
        reflexive += 1;
    }
    Ok(format!(
        "correct 100; mod-100 75 with first mismatch {} at {} ns (test point {}); {reflexive} designs reflexive",
        m.signal, m.time_ns, failed[0].id
    ))
}

fn validation_rules() -> Outcome {
    let reg = registry();
    let conflict = validate_circuit(&circuit("output_conflict.json"), &reg);
    ensure(conflict.errors.iter().any(|i| i.code == IssueCode::OutputConflict), || format!("{conflict:?}"))?;
    let short = validate_circuit(&circuit("short.json"), &reg);
    ensure(short.errors.iter().any(|i| i.code == IssueCode::ShortCircuit), || format!("{short:?}"))?;
    let clean = validate_circuit(&circuit("counter60.json"), &reg);
    ensure(clean.is_ok(), || format!("{clean:?}"))?;
    Ok(format!("OUTPUT_CONFLICT at {}; SHORT_CIRCUIT at {}", conflict.errors[0].location, short.errors[0].location))
}

fn cohort_statistics(rt: &tokio::runtime::Runtime) -> Outcome {
    let clock = Arc::new(ManualClock::new(Utc.timestamp_opt(0, 0).unwrap()));
    let cfg = dclab_service::Config { course_timezone: chrono::FixedOffset::east_opt(8 * 3600).unwrap(), ..Default::default() };
    let svc = Service::new(
        dclab_service::store::Store::in_memory(),
        dclab_service::store::BlobStore::in_memory(),
        clock.clone(),
        &cfg,
    );
    let summary = seed_demo(&svc, &clock).map_err(|e| e.to_string())?;
    let router = dclab_service::http::router(Arc::new(svc));
    let req = Request::get(format!("/api/assignments/{}/stats", summary.assignment))
        .header("authorization", format!("Bearer {}", summary.instructor_token))
        .body(Body::empty())
        .unwrap();
    let body = rt.block_on(async {
        let resp = router.oneshot(req).await.unwrap();
        ensure(resp.status().is_success(), || format!("status {}", resp.status()))?;
        Ok::<_, String>(resp.into_body().collect().await.unwrap().to_bytes())
    })?;
    let st: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    let ratio = st["submitted_ratio"].as_f64().ok_or("no ratio")?;
    ensure(ratio == 17.0 / 31.0, || format!("submitted_ratio {ratio}"))?;
    ensure(st["roster_size"] == 31 && st["submitted_count"] == 17, || format!("{} of {}", st["submitted_count"], st["roster_size"]))?;
    ensure(st["solved_count"] == 10, || format!("solved_count {}", st["solved_count"]))?;
    let tries: BTreeMap<String, u64> = serde_json::from_value(st["tries_histogram"].clone()).map_err(|e| e.to_string())?;
    ensure(tries.get("1").copied().unwrap_or(0) >= 3, || format!("tries {tries:?}"))?;
    ensure(tries.get("7").copied().unwrap_or(0) >= 1, || format!("tries {tries:?}"))?;
    let hourly: Vec<u64> = serde_json::from_value(st["hourly_histogram"].clone()).map_err(|e| e.to_string())?;
    let total = st["total_submissions"].as_u64().ok_or("no total")?;
    ensure(hourly.len() == 24 && hourly.iter().sum::<u64>() == total, || format!("hourly {hourly:?} vs total {total}"))?;
    let records = st["students"].as_array().ok_or("no students")?;
    let recount: u64 = records.iter().map(|r| r["submission_count"].as_u64().unwrap()).sum();
    ensure(recount == total, || format!("records sum to {recount}, total {total}"))?;
    Ok(format!("ratio 17/31, solved 10, tries {tries:?}, {total} submissions over 24 hourly buckets"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (file, s) in corpus() {
        let c = circuit(file);
        let a = export_vcd(&run(&c, &s).trace);
        let b = export_vcd(&run(&c, &s).trace);
        ensure(a == b, || format!("{file}: two runs differ"))?;
        let sp = dir.path().join(format!("{file}.stim.json"));
        std::fs::write(&sp, serialize_stimulus(&s)).unwrap();
        let net = core_dir().join("fixtures").join(file);
        let args = ["dclab", "simulate", net.to_str().unwrap(), "--stim", sp.to_str().unwrap()];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = dclab_service::cli::run(args, &mut out, &mut err);
        ensure(code == 0 && out == a, || format!("{file}: CLI exit {code}, {} bytes vs {}", out.len(), a.len()))?;
        let bin = std::process::Command::new(env!("CARGO_BIN_EXE_dclab")).args(&args[1..]).output().map_err(|e| e.to_string())?;
        ensure(bin.stdout == a, || format!("{file}: binary output differs"))?;
        files += 1;
    }
    Ok(format!("{files} fixtures byte-identical across runs, in-process CLI and binary"))
}

fn oscillation_guard() -> Outcome {
    let c = circuit("zero_delay_loop.json");
    let mut limits = Vec::new();
    for limit in [dclab::sim::DEFAULT_MAX_DELTAS, 50] {
        let cfg = SimConfig { max_deltas_per_instant: limit, ..SimConfig::new(100) };
        let r = simulate(&c, &StimulusSet::new(100), &cfg, &registry()).map_err(|e| e.to_string())?;
        let f = r.fault.ok_or("no fault")?;
        ensure(f.code == "OSCILLATION" && f.time_ns == 0, || format!("{f:?}"))?;
        ensure(f.message.contains(&format!("more than {limit} delta")), || f.message.clone())?;
        limits.push(limit);
    }
    let horizon = 1000;
    let r = run(&circuit("ring3.json"), &StimulusSet::new(horizon));
    ensure(r.fault.is_none(), || format!("{:?}", r.fault))?;
    ensure(r.trace.horizon_ns == horizon, || "ring stopped early".into())?;
    for sig in &r.trace.signals {
        let rises: Vec<u64> = sig.changes.iter().filter(|c| c.0 > 0 && c.1 == LogicValue::One).map(|c| c.0).collect();
        ensure(rises.len() >= 10, || format!("{}: {rises:?}", sig.label))?;
        ensure(rises.windows(2).all(|w| w[1] - w[0] == RING_PERIOD_NS), || format!("{}: {rises:?}", sig.label))?;
    }
    Ok(format!("loop faults OSCILLATION at 0 ns under limits {limits:?}; ring period {RING_PERIOD_NS} ns to {horizon} ns"))
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("counter fixture", Box::new(counter_fixture)),
        ("component truth tables", Box::new(truth_tables)),
        ("kernel oracle equivalence", Box::new(kernel_oracle)),
        ("VHDL round trip", Box::new(vhdl_round_trip)),
        ("grading fixtures", Box::new(grading_fixtures)),
        ("validation rules", Box::new(validation_rules)),
        ("cohort statistics replay", Box::new(|| cohort_statistics(&rt))),
        ("determinism", Box::new(determinism)),
        ("oscillation guard", Box::new(oscillation_guard)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
