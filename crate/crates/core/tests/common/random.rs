//! Random combinational circuits of single-gate instances, with a
//! brute-force evaluator that does not touch the library.

use dclab::netlist::Circuit;
use proptest::prelude::*;
use proptest::sample::Index;

#[derive(Debug, Clone, Copy)]
pub enum Gate {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Not,
}

impl Gate {
    fn part(self) -> &'static str {
        match self {
            Gate::And => "74LS08",
            Gate::Or => "74LS32",
            Gate::Nand => "74LS00",
            Gate::Nor => "74LS02",
            Gate::Xor => "74LS86",
            Gate::Not => "74LS04",
        }
    }

    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Gate::And => a && b,
            Gate::Or => a || b,
            Gate::Nand => !(a && b),
            Gate::Nor => !(a || b),
            Gate::Xor => a != b,
            Gate::Not => !a,
        }
    }
}

/// Gate k reads from signals `0..inputs + k`: top inputs first, then the
/// outputs of earlier gates.
#[derive(Debug, Clone)]
pub struct Recipe {
    pub inputs: usize,
    pub gates: Vec<(Gate, usize, usize)>,
    pub outputs: Vec<usize>,
}

pub fn recipe(max_inputs: usize, max_gates: usize) -> impl Strategy<Value = Recipe> {
    recipe_with_inputs(1..=max_inputs, max_gates)
}

pub fn recipe_with_inputs(
    inputs: impl Strategy<Value = usize>,
    max_gates: usize,
) -> impl Strategy<Value = Recipe> {
    let gate = prop_oneof![
        Just(Gate::And),
        Just(Gate::Or),
        Just(Gate::Nand),
        Just(Gate::Nor),
        Just(Gate::Xor),
        Just(Gate::Not)
    ];
    (inputs, prop::collection::vec((gate, any::<Index>(), any::<Index>()), 1..=max_gates), prop::collection::vec(any::<Index>(), 1..4))
        .prop_map(|(inputs, raw, outs)| {
            let gates: Vec<_> =
                raw.into_iter().enumerate().map(|(k, (g, a, b))| (g, a.index(inputs + k), b.index(inputs + k))).collect();
            let n = gates.len();
            let mut outputs: Vec<usize> = outs.iter().map(|i| inputs + i.index(n)).collect();
            outputs.sort_unstable();
            outputs.dedup();
            Recipe { inputs, gates, outputs }
        })
}

impl Recipe {
    fn net(&self, s: usize) -> String {
        if s < self.inputs {
            format!("in{s}")
        } else {
            format!("g{}", s - self.inputs)
        }
    }

    pub fn input_names(&self) -> Vec<String> {
        (0..self.inputs).map(|i| format!("in{i}")).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        (0..self.outputs.len()).map(|i| format!("out{i}")).collect()
    }

    pub fn circuit(&self, name: &str) -> Circuit {
        let mut c = Circuit::new(name);
        for i in 0..self.inputs {
            c.add_top_input(format!("in{i}"), self.net(i));
        }
        for (k, &(g, a, b)) in self.gates.iter().enumerate() {
            let id = format!("u{k}");
            c.add_instance(&id, g.part());
            c.connect(&self.net(a), &[(&id, "1A")]).unwrap();
            if !matches!(g, Gate::Not) {
                c.connect(&self.net(b), &[(&id, "1B")]).unwrap();
            }
            c.connect(&format!("g{k}"), &[(&id, "1Y")]).unwrap();
        }
        for (i, &s) in self.outputs.iter().enumerate() {
            c.add_top_output(format!("out{i}"), self.net(s));
        }
        c
    }

    /// Output values for one input assignment.
    pub fn eval(&self, inputs: &[bool]) -> Vec<bool> {
        let mut v = inputs.to_vec();
        for &(g, a, b) in &self.gates {
            let x = g.apply(v[a], v[b]);
            v.push(x);
        }
        self.outputs.iter().map(|&s| v[s]).collect()
    }

    /// Longest gate chain to any signal, for settle-time bounds.
    pub fn depth(&self) -> usize {
        let mut d = vec![0; self.inputs];
        for &(g, a, b) in &self.gates {
            let x = d[a].max(if matches!(g, Gate::Not) { 0 } else { d[b] }) + 1;
            d.push(x);
        }
        d.into_iter().max().unwrap_or(0)
    }
}
