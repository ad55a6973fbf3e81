mod common;

use common::{as_vhdl, circuit, corpus, fixture, whole_run_test_point};
use dclab::design::{Design, InternalBackend};
use dclab::grader::{deserialize_test_points, grade, serialize_test_points, GradeError, TestPoint, Verdict};
use dclab::logic::LogicValue;
use dclab::stimulus::{SignalSpec, StimulusSet};
use dclab::vhdl::VhdlUnit;

fn backend() -> InternalBackend {
    InternalBackend::builtin()
}

fn counter_tps() -> Vec<TestPoint> {
    deserialize_test_points(&fixture("counter_testpoints.json")).unwrap()
}

fn verdicts(r: &dclab::grader::GradeReport) -> Vec<Verdict> {
    r.per_test_point.iter().map(|p| p.verdict).collect()
}

#[test]
fn test_point_file_round_trips() {
    let tps = counter_tps();
    assert_eq!(tps.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["reset", "carry", "wrap", "mid"]);
    assert_eq!(deserialize_test_points(&serialize_test_points(&tps)).unwrap(), tps);
}

#[test]
fn correct_counter_scores_full_marks() {
    let reference = Design::Circuit(circuit("counter60.json"));
    let r = grade(&backend(), &reference, &reference, &counter_tps()).unwrap();
    assert_eq!((r.passed, r.total, r.score), (4, 4, 100));
    assert!(r.diagnostics.is_empty());
}

#[test]
fn wrong_modulus_fails_only_the_wrap_point() {
    let reference = Design::Circuit(circuit("counter60.json"));
    let sub = Design::Circuit(circuit("counter100.json"));
    let r = grade(&backend(), &sub, &reference, &counter_tps()).unwrap();
    assert_eq!((r.passed, r.total, r.score), (3, 4, 75));
    assert_eq!(verdicts(&r), [Verdict::Pass, Verdict::Pass, Verdict::Fail, Verdict::Pass]);
    // Just before the 61st edge the count reads 60 instead of 00. The 7448
    // draws 6 without segment a, so tens_a is the first to differ.
    let m = r.per_test_point[2].first_mismatch.as_ref().unwrap();
    assert_eq!(m.time_ns, 10 * common::MS + 60 * 20 * common::MS - 1);
    assert_eq!((m.signal.as_str(), m.expected, m.actual), ("tens_a", LogicValue::One, LogicValue::Zero));
}

#[test]
fn stuck_counter_loses_carry_dependent_points() {
    let reference = Design::Circuit(circuit("counter60.json"));
    let sub = Design::Circuit(circuit("counter_stuck.json"));
    let r = grade(&backend(), &sub, &reference, &counter_tps()).unwrap();
    assert_eq!(verdicts(&r)[0], Verdict::Pass);
    assert!(r.score < 100);
}

#[test]
fn auto_and_hand_picked_sample_times_agree() {
    let reference = Design::Circuit(circuit("counter60.json"));
    let hand = counter_tps();
    let auto: Vec<TestPoint> = hand.iter().cloned().map(|t| TestPoint { sample_times_ns: vec![], ..t }).collect();
    for file in ["counter60.json", "counter100.json", "counter_stuck.json"] {
        let sub = Design::Circuit(circuit(file));
        let a = grade(&backend(), &sub, &reference, &hand).unwrap();
        let b = grade(&backend(), &sub, &reference, &auto).unwrap();
        assert_eq!(verdicts(&a), verdicts(&b), "{file}");
    }
}

#[test]
fn reflexive_over_the_corpus() {
    for (file, stim) in corpus() {
        let c = circuit(file);
        if c.top_outputs.is_empty() {
            continue;
        }
        let tps = [whole_run_test_point(&c, &stim)];
        let d = Design::Circuit(c.clone());
        let r = grade(&backend(), &d, &d, &tps).unwrap();
        assert_eq!(r.score, 100, "{file}: {r:?}");
        let v = as_vhdl(&c);
        let r = grade(&backend(), &v, &v, &tps).unwrap();
        assert_eq!(r.score, 100, "{file} as VHDL: {r:?}");
    }
}

#[test]
fn representation_does_not_change_the_report() {
    let tps = counter_tps();
    for reference in ["counter60.json", "counter100.json"] {
        let reference = Design::Circuit(circuit(reference));
        for file in ["counter60.json", "counter100.json", "counter_stuck.json"] {
            let c = circuit(file);
            let a = grade(&backend(), &Design::Circuit(c.clone()), &reference, &tps).unwrap();
            let b = grade(&backend(), &as_vhdl(&c), &reference, &tps).unwrap();
            assert_eq!(a, b, "{file}");
        }
    }
    for (file, stim) in corpus() {
        let c = circuit(file);
        if c.top_outputs.is_empty() {
            continue;
        }
        let tps = [whole_run_test_point(&c, &stim)];
        let reference = Design::Circuit(c.clone());
        let a = grade(&backend(), &reference, &reference, &tps).unwrap();
        let b = grade(&backend(), &as_vhdl(&c), &reference, &tps).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn uncompilable_submission_fails_everything_with_diagnostics() {
    let reference = Design::Circuit(circuit("counter60.json"));
    let broken = Design::Vhdl { units: vec![VhdlUnit::new("s.vhd", "entity counter60 is port (clk : in std_logic);")], top: "counter60".into() };
    let r = grade(&backend(), &broken, &reference, &counter_tps()).unwrap();
    assert_eq!((r.passed, r.total, r.score), (0, 4, 0));
    assert!(r.per_test_point.iter().all(|p| p.verdict == Verdict::Fail && p.first_mismatch.is_none()));
    assert!(r.diagnostics[0].starts_with("s.vhd:"), "{:?}", r.diagnostics);

    let invalid = Design::Circuit(circuit("output_conflict.json"));
    let r = grade(&backend(), &invalid, &reference, &counter_tps()).unwrap();
    assert_eq!(r.score, 0);
    assert!(r.diagnostics.iter().any(|d| d.contains("OUTPUT_CONFLICT")), "{:?}", r.diagnostics);
}

#[test]
fn missing_submission_output_reads_as_unknown() {
    let reference = Design::Circuit(circuit("nand.json"));
    let src = "entity nand_gate is port (a, b : in std_logic; z : out std_logic); end;
architecture r of nand_gate is begin z <= a nand b; end;";
    let sub = Design::Vhdl { units: vec![VhdlUnit::new("n.vhd", src)], top: "nand_gate".into() };
    let c = circuit("nand.json");
    let stim = StimulusSet::new(100).with("a", SignalSpec::constant(LogicValue::One)).with("b", SignalSpec::constant(LogicValue::One));
    let r = grade(&backend(), &sub, &reference, &[whole_run_test_point(&c, &stim)]).unwrap();
    let m = r.per_test_point[0].first_mismatch.as_ref().unwrap();
    assert_eq!((m.expected, m.actual), (LogicValue::Zero, LogicValue::X));
    assert!(r.diagnostics[0].contains("no output named y"));
}

#[test]
fn reference_problems_are_not_the_students_fault() {
    let good = Design::Circuit(circuit("counter60.json"));
    let tps = counter_tps();
    let err = grade(&backend(), &good, &Design::Circuit(circuit("short.json")), &tps).unwrap_err();
    assert!(matches!(err, GradeError::Reference(_)), "{err:?}");

    let mut missing = tps.clone();
    missing[1].observed.push("tens_dp".into());
    let err = grade(&backend(), &good, &good, &missing).unwrap_err();
    assert!(matches!(&err, GradeError::Reference(m) if m.contains("tens_dp")), "{err:?}");

    let err = grade(&backend(), &good, &Design::Circuit(circuit("zero_delay_loop.json")), &[TestPoint {
        id: "osc".into(),
        stimulus: StimulusSet::new(100),
        observed: vec!["loop".into()],
        sample_times_ns: vec![],
    }])
    .unwrap_err();
    assert!(matches!(&err, GradeError::Reference(m) if m.contains("OSCILLATION")), "{err:?}");

    let mut bad = tps;
    bad[0].sample_times_ns = vec![5, 5];
    assert!(matches!(grade(&backend(), &good, &good, &bad), Err(GradeError::TestPoint { .. })));
}

#[test]
fn no_test_points_is_full_marks() {
    let d = Design::Circuit(circuit("nand.json"));
    let r = grade(&backend(), &d, &d, &[]).unwrap();
    assert_eq!((r.passed, r.total, r.score), (0, 0, 100));
}
