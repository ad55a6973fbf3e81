mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use common::registry;
use dclab::components::{eval_combinational, step_sequential, Edge, ModelKind};
use dclab::logic::LogicValue;
use proptest::prelude::*;

struct Table {
    inputs: Vec<String>,
    outputs: Vec<String>,
    rows: Vec<(Vec<bool>, Vec<bool>)>,
}

fn table_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/truth_tables")
}

fn load_table(part: &str) -> Table {
    let text = std::fs::read_to_string(table_dir().join(format!("{part}.txt"))).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().strip_prefix("in: ").unwrap();
    let (ins, outs) = header.split_once(" | out: ").unwrap();
    let bits = |s: &str| s.bytes().map(|b| b == b'1').collect::<Vec<_>>();
    let rows = lines
        .map(|l| {
            let (i, o) = l.split_once(' ').unwrap();
            (bits(i), bits(o))
        })
        .collect();
    Table {
        inputs: ins.split(' ').map(String::from).collect(),
        outputs: outs.split(' ').map(String::from).collect(),
        rows,
    }
}

fn combinational_parts() -> Vec<String> {
    registry().models().filter(|m| m.kind == ModelKind::Combinational).map(|m| m.part.clone()).collect()
}

#[test]
fn every_combinational_part_has_a_table() {
    let tables: BTreeSet<String> = std::fs::read_dir(table_dir())
        .unwrap()
        .filter_map(|e| e.unwrap().file_name().to_str()?.strip_suffix(".txt").map(String::from))
        .collect();
    assert_eq!(tables, combinational_parts().into_iter().collect());
}

#[test]
fn exhaustive_evaluation_matches_reference_tables() {
    let reg = registry();
    let mut mismatches = 0;
    for part in combinational_parts() {
        let m = reg.get(&part).unwrap();
        let t = load_table(&part);
        let declared: BTreeSet<&str> = m.input_pins().map(|(_, p)| p.name.as_str()).collect();
        assert_eq!(declared, t.inputs.iter().map(String::as_str).collect(), "{part} inputs");
        assert_eq!(t.rows.len(), 1 << t.inputs.len());
        for (ins, outs) in &t.rows {
            let vals = t.inputs.iter().zip(ins).map(|(n, &b)| (n.clone(), LogicValue::from_bool(b))).collect();
            let got = eval_combinational(m, &vals).unwrap();
            for (name, &want) in t.outputs.iter().zip(outs) {
                if got[name] != LogicValue::from_bool(want) {
                    mismatches += 1;
                    eprintln!("{part} {name} at {ins:?}: got {}", got[name]);
                }
            }
        }
    }
    assert_eq!(mismatches, 0);
}

fn known() -> impl Strategy<Value = LogicValue> {
    prop_oneof![Just(LogicValue::Zero), Just(LogicValue::One)]
}

proptest! {
    #[test]
    fn unknown_input_never_flips_a_known_output(
        part in prop::sample::select(combinational_parts()),
        seed in prop::collection::vec(known(), 16),
        which in any::<prop::sample::Index>(),
    ) {
        let reg = registry();
        let m = reg.get(&part).unwrap();
        let names: Vec<String> = m.input_pins().map(|(_, p)| p.name.clone()).collect();
        let mut vals: BTreeMap<String, LogicValue> = names.iter().cloned().zip(seed).collect();
        let before = eval_combinational(m, &vals).unwrap();
        vals.insert(names[which.index(names.len())].clone(), LogicValue::X);
        let after = eval_combinational(m, &vals).unwrap();
        for (pin, v) in &after {
            prop_assert!(*v == LogicValue::X || *v == before[pin], "{} {} {} -> {}", part, pin, before[pin], v);
        }
    }

    #[test]
    fn sequential_steps_are_pure(
        part in prop::sample::select(vec!["74LS74", "74LS163"]),
        values in prop::collection::vec(prop_oneof![known(), Just(LogicValue::X)], 16),
        state in prop::collection::vec(known(), 8),
        rising in any::<bool>(),
    ) {
        let reg = registry();
        let m = reg.get(part).unwrap();
        let inputs: BTreeMap<String, LogicValue> =
            m.input_pins().map(|(_, p)| p.name.clone()).zip(values).collect();
        let state = &state[..m.initial_state(&BTreeMap::new()).len()];
        let edge = if rising { Edge::Rising } else { Edge::None };
        let edges = m.input_pins().filter(|(_, p)| p.name.ends_with("CLK"))
            .map(|(_, p)| (p.name.clone(), edge)).collect();
        let a = step_sequential(m, state, &inputs, &edges).unwrap();
        let b = step_sequential(m, state, &inputs, &edges).unwrap();
        prop_assert_eq!(a, b);
    }
}
