//! Prints the function table of a catalog part.
//!
//!     cargo run -p dclab --example truth_table -- 74LS86

use std::collections::BTreeMap;

use dclab::components::{eval_combinational, ModelKind};
use dclab::{ComponentRegistry, LogicValue};

fn main() {
    let part = std::env::args().nth(1).unwrap_or_else(|| "74LS00".into());
    let reg = ComponentRegistry::builtin();
    let Some(model) = reg.get(&part) else {
        eprintln!("unknown part {part}; known: {}", reg.parts().collect::<Vec<_>>().join(" "));
        std::process::exit(2);
    };
    if model.kind != ModelKind::Combinational {
        eprintln!("{part} is not combinational");
        std::process::exit(2);
    }
    let ins: Vec<String> = model.input_pins().map(|(_, p)| p.name.clone()).collect();
    let outs: Vec<String> = model.output_pins().map(|(_, p)| p.name.clone()).collect();
    println!("{} | {}", ins.join(" "), outs.join(" "));
    for k in 0..1u32 << ins.len() {
        let vals: BTreeMap<String, LogicValue> =
            ins.iter().enumerate().map(|(i, n)| (n.clone(), LogicValue::from_bool(k >> (ins.len() - 1 - i) & 1 == 1))).collect();
        let got = eval_combinational(model, &vals).unwrap();
        let row: String = ins.iter().map(|n| vals[n].to_char()).collect();
        let out: String = outs.iter().map(|n| got[n].to_char()).collect();
        println!("{row} {out}");
    }
}
