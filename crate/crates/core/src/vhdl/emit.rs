//! Netlist to VHDL: a structural top entity per circuit, a behavioral
//! library entity per catalog part, and a stimulus testbench.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::components::{
    Behavior, BoolExpr, CombSource, ComponentModel, ComponentRegistry, PinDirection, SequentialRule, SourceTemplate,
};
use crate::logic::LogicValue;
use crate::netlist::{validate_circuit, Circuit, ParamValue, PinRef};
use crate::stimulus::{SignalSpec, StimulusError, StimulusSet};

use super::lexer::is_reserved;
use super::VhdlUnit;

/// File name of the emitted part library.
pub const PARTS_FILE: &str = "dclab_parts.vhd";

const GENERATOR: &str = concat!("dclab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmitError {
    #[error("circuit has {count} validation error(s); first: {first}")]
    Invalid { count: usize, first: String },
    #[error("top input {0} has no stimulus")]
    Unbound(String),
    #[error("stimulus names {0}, which is not a top input")]
    UnknownInput(String),
    #[error(transparent)]
    Stimulus(#[from] StimulusError),
}

/// Turns an arbitrary name into a legal basic identifier: lowercase,
/// letters, digits and single underscores, starting with a letter and not
/// a reserved word.
pub fn vhdl_identifier(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        let c = if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' };
        if c == '_' && (s.is_empty() || s.ends_with('_')) {
            continue;
        }
        s.push(c);
    }
    while s.ends_with('_') {
        s.pop();
    }
    if s.is_empty() {
        s.push('x');
    }
    if s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert_str(0, "x_");
    }
    if is_reserved(&s) {
        s.push_str("_i");
    }
    s
}

/// Entity name of a catalog part: `74LS00` becomes `ttl_74ls00`.
pub fn part_entity_name(part: &str) -> String {
    let id = vhdl_identifier(part);
    match id.strip_prefix("x_") {
        Some(rest) if part.starts_with(|c: char| c.is_ascii_digit()) => format!("ttl_{rest}"),
        _ => id,
    }
}

/// Port name of a part pin. A leading gate number moves to a suffix so
/// that `1A` becomes `a_1`; reserved words get `_p`.
pub fn pin_identifier(pin: &str) -> String {
    let digits: String = pin.chars().take_while(char::is_ascii_digit).collect();
    let rest = &pin[digits.len()..];
    let mut base = if rest.is_empty() { format!("p{digits}") } else { vhdl_identifier(rest) };
    if let Some(stripped) = base.strip_suffix("_i") {
        if is_reserved(stripped) {
            base = format!("{stripped}_p");
        }
    }
    if !digits.is_empty() && !rest.is_empty() {
        base = format!("{base}_{digits}");
    }
    base
}

/// Hands out unique identifiers in one declarative region.
#[derive(Default)]
struct Names {
    taken: BTreeSet<String>,
}

impl Names {
    fn claim(&mut self, want: String) -> String {
        let mut name = want.clone();
        let mut k = 2;
        while !self.taken.insert(name.clone()) {
            name = format!("{want}_{k}");
            k += 1;
        }
        name
    }
}

fn header(out: &mut String) {
    let _ = writeln!(out, "-- Generated by {GENERATOR}");
    out.push_str("library ieee;\nuse ieee.std_logic_1164.all;\n");
}

fn lit(v: LogicValue) -> String {
    format!("'{}'", v.to_char())
}

/// Largest unit that expresses `ns` exactly.
fn time_lit(ns: u64) -> String {
    if ns == 0 {
        return "0 ns".into();
    }
    for (unit, scale) in [("sec", 1_000_000_000), ("ms", 1_000_000), ("us", 1_000)] {
        if ns % scale == 0 {
            return format!("{} {unit}", ns / scale);
        }
    }
    format!("{ns} ns")
}

#[derive(Clone, Copy, PartialEq)]
enum Prec {
    Top,
    Operand,
}

/// Renders a fixture expression with VHDL operators. `name` maps variables.
fn expr_text(e: &BoolExpr, name: &dyn Fn(&str) -> String, prec: Prec) -> String {
    fn chain<'a>(e: &'a BoolExpr, same: &dyn Fn(&'a BoolExpr) -> Option<(&'a BoolExpr, &'a BoolExpr)>, out: &mut Vec<&'a BoolExpr>) {
        match same(e) {
            Some((a, b)) => {
                chain(a, same, out);
                chain(b, same, out);
            }
            None => out.push(e),
        }
    }
    let binary = |op: &str, parts: Vec<&BoolExpr>, prec: Prec| {
        let body = parts.iter().map(|p| expr_text(p, name, Prec::Operand)).collect::<Vec<_>>().join(&format!(" {op} "));
        if prec == Prec::Operand {
            format!("({body})")
        } else {
            body
        }
    };
    match e {
        BoolExpr::Const(b) => lit(LogicValue::from_bool(*b)),
        BoolExpr::Var(v) => name(v),
        BoolExpr::Not(inner) => match &**inner {
            BoolExpr::And(a, b) => binary("nand", vec![a, b], prec),
            BoolExpr::Or(a, b) => binary("nor", vec![a, b], prec),
            BoolExpr::Xor(a, b) => binary("xnor", vec![a, b], prec),
            other => format!("not {}", expr_text(other, name, Prec::Operand)),
        },
        BoolExpr::And(..) => {
            let mut parts = Vec::new();
            chain(e, &|x| if let BoolExpr::And(a, b) = x { Some((a, b)) } else { None }, &mut parts);
            binary("and", parts, prec)
        }
        BoolExpr::Or(..) => {
            let mut parts = Vec::new();
            chain(e, &|x| if let BoolExpr::Or(a, b) = x { Some((a, b)) } else { None }, &mut parts);
            binary("or", parts, prec)
        }
        BoolExpr::Xor(..) => {
            let mut parts = Vec::new();
            chain(e, &|x| if let BoolExpr::Xor(a, b) = x { Some((a, b)) } else { None }, &mut parts);
            binary("xor", parts, prec)
        }
    }
}

/// One part entity. `params` supplies `delay_ns` and `init.<pin>` overrides.
fn part_entity(out: &mut String, model: &ComponentModel, entity: &str, params: &BTreeMap<String, ParamValue>) {
    let delay = model.effective_delay(params);
    let after = time_lit(delay);
    let pin = |i: usize| pin_identifier(&model.pins[i].name);
    let _ = writeln!(out, "\n-- {}: {}", model.part, model.description);
    let _ = writeln!(out, "entity {entity} is\n  port (");
    let n = model.pins.len();
    for (i, p) in model.pins.iter().enumerate() {
        let sep = if i + 1 == n { "" } else { ";" };
        match p.direction {
            PinDirection::Input => {
                let _ = writeln!(out, "    {} : in std_logic{sep}", pin(i));
            }
            PinDirection::Output => {
                let init = match model.behavior {
                    Behavior::Source(_) => LogicValue::X,
                    _ => model.initial_output(i, params),
                };
                let default = if init == LogicValue::X { String::new() } else { format!(" := {}", lit(init)) };
                let _ = writeln!(out, "    {} : out std_logic{default}{sep}", pin(i));
            }
        }
    }
    let _ = writeln!(out, "  );\nend entity {entity};\n");
    let _ = writeln!(out, "architecture behavioral of {entity} is");
    match &model.behavior {
        Behavior::Combinational(logic) => match &logic.source {
            CombSource::Exprs { terms, outputs } => {
                let term_names: BTreeMap<&str, String> =
                    terms.iter().map(|(t, _)| (t.as_str(), format!("t_{}", vhdl_identifier(t)))).collect();
                let name = |v: &str| match term_names.get(v) {
                    Some(t) => t.clone(),
                    None => model.pin_index(v).map_or_else(|| vhdl_identifier(v), pin),
                };
                for t in term_names.values() {
                    let _ = writeln!(out, "  signal {t} : std_logic;");
                }
                out.push_str("begin\n");
                for (t, e) in terms {
                    let _ = writeln!(out, "  {} <= {};", term_names[t.as_str()], expr_text(e, &name, Prec::Top));
                }
                for (o, e) in outputs {
                    let target = name(o);
                    let text = expr_text(e, &name, Prec::Top);
                    let _ = writeln!(out, "  {target} <= transport {text} after {after};");
                }
            }
            CombSource::Table { inputs, outputs, rows, default } => {
                let ins: Vec<String> = inputs.iter().map(|p| name_of(model, p)).collect();
                let width = outputs.len();
                out.push_str("begin\n");
                let _ = writeln!(out, "  process ({})", ins.join(", "));
                let _ = writeln!(out, "    variable v : std_logic_vector(0 to {});", width - 1);
                out.push_str("  begin\n");
                for (k, (pattern, outs)) in rows.iter().enumerate() {
                    let conds: Vec<String> = pattern
                        .chars()
                        .zip(&ins)
                        .filter(|(c, _)| *c != '-')
                        .map(|(c, p)| format!("{p} = '{c}'"))
                        .collect();
                    let cond = if conds.is_empty() { "true".to_string() } else { conds.join(" and ") };
                    let kw = if k == 0 { "if" } else { "elsif" };
                    let _ = writeln!(out, "    {kw} {cond} then\n      v := \"{}\";", outs.to_ascii_uppercase());
                }
                if rows.is_empty() {
                    let _ = writeln!(out, "    v := \"{}\";", default.to_ascii_uppercase());
                } else {
                    let _ = writeln!(out, "    else\n      v := \"{}\";\n    end if;", default.to_ascii_uppercase());
                }
                for (k, o) in outputs.iter().enumerate() {
                    let _ = writeln!(out, "    {} <= transport v({k}) after {after};", name_of(model, o));
                }
                out.push_str("  end process;\n");
            }
        },
        Behavior::Sequential(SequentialRule::Counter(c)) => {
            let w = c.q.len();
            let state: String = model.initial_state(params).iter().rev().map(|v| v.to_char()).collect();
            let _ = writeln!(out, "  signal st : std_logic_vector({} downto 0) := \"{state}\";", w - 1);
            out.push_str("begin\n");
            let (clk, clr, load) = (pin(c.clk), pin(c.clr), pin(c.load));
            let data: Vec<String> = c.data.iter().rev().map(|&p| pin(p)).collect();
            if c.async_clear {
                let _ = writeln!(out, "  process ({clk}, {clr})\n  begin\n    if {clr} = '0' then\n      st <= (others => '0');");
                let _ = writeln!(out, "    elsif rising_edge({clk}) then\n      if {load} = '0' then");
            } else {
                let _ = writeln!(out, "  process ({clk})\n  begin\n    if rising_edge({clk}) then");
                let _ = writeln!(out, "      if {clr} = '0' then\n        st <= (others => '0');\n      elsif {load} = '0' then");
            }
            let _ = writeln!(out, "        st <= {};", data.join(" & "));
            let _ = writeln!(out, "      elsif {} = '1' and {} = '1' then\n        st <= st + 1;", pin(c.enp), pin(c.ent));
            out.push_str("      end if;\n    end if;\n  end process;\n");
            for (i, &q) in c.q.iter().enumerate() {
                let _ = writeln!(out, "  {} <= transport st({i}) after {after};", pin(q));
            }
            let bits: Vec<String> = (0..w).rev().map(|i| format!("st({i})")).collect();
            let _ = writeln!(out, "  {} <= transport ({} and {}) after {after};", pin(c.rco), pin(c.ent), bits.join(" and "));
        }
        Behavior::Sequential(SequentialRule::DFlipFlop(slots)) => {
            let state = model.initial_state(params);
            for (k, _) in slots.iter().enumerate() {
                let _ = writeln!(out, "  signal s{} : std_logic := {};", k + 1, lit(state[k]));
            }
            out.push_str("begin\n");
            for (k, s) in slots.iter().enumerate() {
                let st = format!("s{}", k + 1);
                let (d, clk, clr, pre) = (pin(s.d), pin(s.clk), pin(s.clr), pin(s.pre));
                let _ = writeln!(out, "  process ({clk}, {clr}, {pre})\n  begin");
                let _ = writeln!(out, "    if {pre} = '0' and {clr} = '0' then\n      {st} <= 'X';");
                let _ = writeln!(out, "    elsif {pre} = '0' then\n      {st} <= '1';");
                let _ = writeln!(out, "    elsif {clr} = '0' then\n      {st} <= '0';");
                let _ = writeln!(out, "    elsif rising_edge({clk}) then\n      {st} <= {d};");
                out.push_str("    end if;\n  end process;\n");
                let both = format!("{pre} = '0' and {clr} = '0'");
                let _ = writeln!(out, "  {} <= transport '1' after {after} when {both} else {st} after {after};", pin(s.q));
                let _ = writeln!(out, "  {} <= transport '1' after {after} when {both} else not {st} after {after};", pin(s.qn));
            }
        }
        Behavior::Display(_) | Behavior::Source(_) => out.push_str("begin\n"),
    }
    let _ = writeln!(out, "end architecture behavioral;");
}

fn name_of(model: &ComponentModel, pin: &str) -> String {
    model.pin_index(pin).map_or_else(|| vhdl_identifier(pin), |i| pin_identifier(&model.pins[i].name))
}

fn emits_entity(model: &ComponentModel) -> bool {
    !matches!(model.behavior, Behavior::Source(_))
}

/// The behavioral library: one entity per non-source catalog part, sorted
/// by part name.
pub fn emit_parts_library(registry: &ComponentRegistry) -> VhdlUnit {
    let mut out = String::new();
    header(&mut out);
    let mut models: Vec<_> = registry.models().filter(|m| emits_entity(m)).collect();
    models.sort_by(|a, b| a.part.cmp(&b.part));
    for m in models {
        part_entity(&mut out, m, &part_entity_name(&m.part), &BTreeMap::new());
        out.push_str("\nlibrary ieee;\nuse ieee.std_logic_1164.all;\n");
    }
    // Drop the trailing context clause that opens no unit.
    let trimmed = out.trim_end_matches("\nlibrary ieee;\nuse ieee.std_logic_1164.all;\n").to_string() + "\n";
    VhdlUnit::new(PARTS_FILE, trimmed)
}

fn has_overrides(params: &BTreeMap<String, ParamValue>) -> bool {
    params.keys().any(|k| k == "delay_ns" || k.starts_with("init."))
}

fn check(c: &Circuit, registry: &ComponentRegistry) -> Result<(), EmitError> {
    let report = validate_circuit(c, registry);
    match report.errors.first() {
        None => Ok(()),
        Some(first) => Err(EmitError::Invalid { count: report.errors.len(), first: first.message.clone() }),
    }
}

/// Port names of the emitted top entity, by circuit port name.
fn port_names(c: &Circuit) -> (Names, BTreeMap<String, String>) {
    let mut names = Names::default();
    let mut map = BTreeMap::new();
    for p in c.top_inputs.iter().chain(&c.top_outputs) {
        if !map.contains_key(&p.name) {
            let n = names.claim(vhdl_identifier(&p.name));
            map.insert(p.name.clone(), n);
        }
    }
    (names, map)
}

/// The VHDL name each circuit port gets; stimulus and trace labels of the
/// emitted design use these names.
pub fn emitted_port_names(c: &Circuit) -> BTreeMap<String, String> {
    port_names(c).1
}

/// Emits the part library and the structural design (specialized part
/// entities first, then the top entity). The top entity is named after the
/// circuit.
pub fn emit_vhdl(c: &Circuit, registry: &ComponentRegistry) -> Result<Vec<VhdlUnit>, EmitError> {
    check(c, registry)?;
    let top = vhdl_identifier(&c.name);
    let (mut names, ports) = port_names(c);
    names.taken.insert(top.clone());

    let mut net_name: BTreeMap<&str, String> = BTreeMap::new();
    for p in &c.top_inputs {
        net_name.entry(p.net.as_str()).or_insert_with(|| ports[&p.name].clone());
    }
    let mut nets: Vec<_> = c.nets.iter().collect();
    nets.sort_by(|a, b| a.id.cmp(&b.id));
    let mut declared = Vec::new();
    for n in &nets {
        if !net_name.contains_key(n.id.as_str()) {
            let name = names.claim(format!("n_{}", vhdl_identifier(&n.id)));
            declared.push(name.clone());
            net_name.insert(n.id.as_str(), name);
        }
    }
    let mut pin_net: BTreeMap<&PinRef, &str> = BTreeMap::new();
    for n in &c.nets {
        for ep in &n.endpoints {
            pin_net.insert(ep, net_name[n.id.as_str()].as_str());
        }
    }

    let mut instances: Vec<_> = c.instances.iter().collect();
    instances.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::new();
    header(&mut out);
    let mut body = String::new();
    let mut needs_parts = false;
    for inst in &instances {
        let model = registry.get(&inst.part).expect("validated circuit");
        let pin_target = |i: usize| pin_net.get(&PinRef::new(&inst.id, &model.pins[i].name)).copied();
        match &model.behavior {
            Behavior::Source(t) => {
                let spec = model.source_signal(&inst.params).expect("source part");
                for (i, _) in model.output_pins() {
                    let Some(target) = pin_target(i) else { continue };
                    let _ = writeln!(body, "  -- {} ({})", inst.id, inst.part);
                    match (t, &spec) {
                        (SourceTemplate::Clock, SignalSpec::Clock { phase_ns, .. }) => {
                            let ct = spec.clock_timing().expect("clock");
                            clock_process(&mut body, target, *phase_ns + ct.low_ns, ct.high_ns, ct.low_ns);
                        }
                        (_, SignalSpec::Constant { value }) => {
                            let _ = writeln!(body, "  {target} <= {};", lit(*value));
                        }
                        _ => {}
                    }
                }
            }
            _ => {
                let label = names.claim(vhdl_identifier(&inst.id));
                let entity = if has_overrides(&inst.params) {
                    let e = names.claim(format!("{}_{label}", part_entity_name(&model.part)));
                    part_entity(&mut out, model, &e, &inst.params);
                    out.push_str("\nlibrary ieee;\nuse ieee.std_logic_1164.all;\n");
                    e
                } else {
                    needs_parts = true;
                    part_entity_name(&model.part)
                };
                let assoc: Vec<String> = model
                    .pins
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let actual = match (pin_target(i), p.direction) {
                            (Some(n), _) => n.to_string(),
                            (None, PinDirection::Input) => "'Z'".into(),
                            (None, PinDirection::Output) => "open".into(),
                        };
                        format!("{} => {actual}", pin_identifier(&p.name))
                    })
                    .collect();
                let _ = writeln!(body, "  {label} : entity work.{entity}\n    port map ({});", assoc.join(", "));
            }
        }
    }
    for p in &c.top_outputs {
        let src = &net_name[p.net.as_str()];
        let _ = writeln!(body, "  {} <= {src};", ports[&p.name]);
    }

    let _ = writeln!(out, "\nentity {top} is");
    let port_decls: Vec<String> = c
        .top_inputs
        .iter()
        .map(|p| format!("    {} : in std_logic", ports[&p.name]))
        .chain(c.top_outputs.iter().map(|p| format!("    {} : out std_logic", ports[&p.name])))
        .collect();
    if !port_decls.is_empty() {
        let _ = writeln!(out, "  port (\n{}\n  );", port_decls.join(";\n"));
    }
    let _ = writeln!(out, "end entity {top};\n\narchitecture structural of {top} is");
    for d in &declared {
        let _ = writeln!(out, "  signal {d} : std_logic := 'Z';");
    }
    let _ = writeln!(out, "begin\n{body}end architecture structural;");

    let mut units = Vec::new();
    if needs_parts {
        units.push(emit_parts_library(registry));
    }
    units.push(VhdlUnit::new(format!("{top}.vhd"), out));
    Ok(units)
}

fn clock_process(out: &mut String, target: &str, first_rise: u64, high: u64, low: u64) {
    let _ = writeln!(out, "  process\n  begin\n    {target} <= '0';\n    wait for {};", time_lit(first_rise));
    let _ = writeln!(out, "    loop\n      {target} <= '1';\n      wait for {};", time_lit(high));
    let _ = writeln!(out, "      {target} <= '0';\n      wait for {};\n    end loop;\n  end process;", time_lit(low));
}

/// Testbench `tb_<circuit>` that instantiates the emitted top and drives
/// every top input from `stim`, with one process per input.
pub fn emit_testbench(c: &Circuit, stim: &StimulusSet) -> Result<VhdlUnit, EmitError> {
    for name in stim.assignments.keys() {
        if c.top_input(name).is_none() {
            return Err(EmitError::UnknownInput(name.clone()));
        }
    }
    for p in &c.top_inputs {
        match stim.assignments.get(&p.name) {
            None => return Err(EmitError::Unbound(p.name.clone())),
            Some(s) => s.validate(&format!("assignments.{}", p.name))?,
        }
    }
    let top = vhdl_identifier(&c.name);
    let (mut names, ports) = port_names(c);
    let tb = names.claim(format!("tb_{top}"));
    let uut = names.claim("uut".into());
    let horizon = stim.horizon_ns;

    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(out, "-- dclab:horizon_ns={horizon}");
    let _ = writeln!(out, "\nentity {tb} is\nend entity {tb};\n\narchitecture sim of {tb} is");
    for p in c.top_inputs.iter().chain(&c.top_outputs) {
        let _ = writeln!(out, "  signal {} : std_logic := 'Z';", ports[&p.name]);
    }
    out.push_str("begin\n");
    let assoc: Vec<String> = c
        .top_inputs
        .iter()
        .chain(&c.top_outputs)
        .map(|p| format!("{0} => {0}", ports[&p.name]))
        .collect();
    if assoc.is_empty() {
        let _ = writeln!(out, "  {uut} : entity work.{top};");
    } else {
        let _ = writeln!(out, "  {uut} : entity work.{top}\n    port map ({});", assoc.join(", "));
    }
    for p in &c.top_inputs {
        let name = &ports[&p.name];
        let spec = &stim.assignments[&p.name];
        match spec {
            SignalSpec::Constant { value } => {
                let _ = writeln!(out, "  process\n  begin\n    {name} <= {};\n    wait;\n  end process;", lit(*value));
            }
            SignalSpec::Clock { phase_ns, .. } => {
                let t = spec.clock_timing().expect("validated clock");
                clock_process(&mut out, name, phase_ns + t.low_ns, t.high_ns, t.low_ns);
            }
            SignalSpec::Pattern { .. } => {
                out.push_str("  process\n  begin\n");
                let mut now = 0;
                for (t, v) in spec.changes(horizon) {
                    if t > now {
                        let _ = writeln!(out, "    wait for {};", time_lit(t - now));
                        now = t;
                    }
                    let _ = writeln!(out, "    {name} <= {};", lit(v));
                }
                out.push_str("    wait;\n  end process;\n");
            }
        }
    }
    let _ = writeln!(out, "end architecture sim;");
    Ok(VhdlUnit::testbench(format!("{tb}.vhd"), out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert_eq!(vhdl_identifier("Nand"), "nand_i");
        assert_eq!(vhdl_identifier("3-bit__sum_"), "x_3_bit_sum");
        assert_eq!(vhdl_identifier(""), "x");
        assert_eq!(part_entity_name("74LS00"), "ttl_74ls00");
        assert_eq!(part_entity_name("SEVEN_SEG"), "seven_seg");
        assert_eq!(pin_identifier("1A"), "a_1");
        assert_eq!(pin_identifier("2CLR"), "clr_2");
        assert_eq!(pin_identifier("OF"), "of_p");
        assert_eq!(pin_identifier("G2A"), "g2a");
    }

    #[test]
    fn time_units() {
        assert_eq!(time_lit(10_000_000), "10 ms");
        assert_eq!(time_lit(1_500), "1500 ns");
        assert_eq!(time_lit(2_000_000_000), "2 sec");
        assert_eq!(time_lit(3_000), "3 us");
    }

    #[test]
    fn expression_rendering() {
        let e = BoolExpr::parse("!(A & B)").unwrap();
        assert_eq!(expr_text(&e, &|v| v.to_lowercase(), Prec::Top), "a nand b");
        let e = BoolExpr::parse("A & B & !C | D").unwrap();
        assert_eq!(expr_text(&e, &|v| v.to_lowercase(), Prec::Top), "(a and b and not c) or d");
    }
}
