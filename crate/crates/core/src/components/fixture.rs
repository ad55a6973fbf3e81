//! Loader for part fixture files.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use super::expr::BoolExpr;
use super::sequential::{CounterPins, DffSlot, SequentialRule};
use super::{
    Behavior, CombLogic, CombOutput, CombSource, ComponentModel, ModelError, ModelKind, ParamSpec, ParamType,
    PinDirection, PinSpec, SourceTemplate,
};
use crate::logic::LogicValue;

/// Widest support set a compiled truth table may have.
const MAX_SUPPORT: usize = 16;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    format_version: u32,
    part: String,
    #[serde(default)]
    description: String,
    kind: ModelKind,
    #[serde(default)]
    delay_ns: Option<u64>,
    pins: Vec<PinSpec>,
    #[serde(default)]
    params: Vec<ParamSpec>,
    behavior: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExprs {
    #[serde(default)]
    terms: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    inputs: Vec<String>,
    outputs: Vec<String>,
    rows: Vec<(String, String)>,
    default: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComb {
    #[serde(default)]
    exprs: Option<RawExprs>,
    #[serde(default)]
    table: Option<RawTable>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDffSlot {
    d: String,
    clk: String,
    clr: String,
    pre: String,
    q: String,
    qn: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCounter {
    clk: String,
    clr: String,
    load: String,
    enp: String,
    ent: String,
    data: Vec<String>,
    q: Vec<String>,
    rco: String,
    #[serde(default)]
    async_clear: bool,
}

#[derive(Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
enum RawSeq {
    DFlipFlop { slots: Vec<RawDffSlot>, reset: Vec<LogicValue> },
    Counter {
        #[serde(flatten)]
        pins: RawCounter,
        reset: Vec<LogicValue>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
enum RawSource {
    Constant { value: LogicValue },
    Switch,
    Clock,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisplay {
    segments: Vec<(String, String)>,
}

/// Parses one part fixture.
pub fn parse_model(file: &str, text: &str) -> Result<ComponentModel, ModelError> {
    let fail = |reason: String| ModelError::Fixture { file: file.to_string(), reason };
    let raw: RawModel = serde_json::from_str(text).map_err(|e| fail(e.to_string()))?;
    if raw.format_version != 1 {
        return Err(fail(format!("unsupported format_version {}", raw.format_version)));
    }
    if raw.pins.is_empty() {
        return Err(fail("a model needs at least one pin".into()));
    }
    for (i, p) in raw.pins.iter().enumerate() {
        if raw.pins[..i].iter().any(|q| q.name == p.name) {
            return Err(fail(format!("duplicate pin name {}", p.name)));
        }
    }
    let pin_of = |name: &str| -> Result<usize, ModelError> {
        raw.pins.iter().position(|p| p.name == name).ok_or_else(|| fail(format!("unknown pin {name}")))
    };
    let pins_of = |names: &[String]| names.iter().map(|n| pin_of(n)).collect::<Result<Vec<_>, _>>();

    let behavior_err = |e: serde_json::Error| fail(format!("behavior: {e}"));
    let mut reset_state = Vec::new();
    let behavior = match raw.kind {
        ModelKind::Combinational => {
            let comb: RawComb = serde_json::from_value(raw.behavior.clone()).map_err(behavior_err)?;
            Behavior::Combinational(compile_comb(&raw.pins, comb).map_err(fail)?)
        }
        ModelKind::Sequential => {
            let seq: RawSeq = serde_json::from_value(raw.behavior.clone()).map_err(behavior_err)?;
            let rule = match seq {
                RawSeq::DFlipFlop { slots, reset } => {
                    reset_state = reset;
                    SequentialRule::DFlipFlop(
                        slots
                            .iter()
                            .map(|s| {
                                Ok(DffSlot {
                                    d: pin_of(&s.d)?,
                                    clk: pin_of(&s.clk)?,
                                    clr: pin_of(&s.clr)?,
                                    pre: pin_of(&s.pre)?,
                                    q: pin_of(&s.q)?,
                                    qn: pin_of(&s.qn)?,
                                })
                            })
                            .collect::<Result<_, ModelError>>()?,
                    )
                }
                RawSeq::Counter { pins, reset } => {
                    reset_state = reset;
                    if pins.data.len() != pins.q.len() || pins.q.is_empty() || pins.q.len() > 16 {
                        return Err(fail("counter data and q lists must have equal length 1..=16".into()));
                    }
                    SequentialRule::Counter(CounterPins {
                        clk: pin_of(&pins.clk)?,
                        clr: pin_of(&pins.clr)?,
                        load: pin_of(&pins.load)?,
                        enp: pin_of(&pins.enp)?,
                        ent: pin_of(&pins.ent)?,
                        data: pins_of(&pins.data)?,
                        q: pins_of(&pins.q)?,
                        rco: pin_of(&pins.rco)?,
                        async_clear: pins.async_clear,
                    })
                }
            };
            if reset_state.len() != rule.state_len() {
                return Err(fail(format!("reset vector needs {} bits", rule.state_len())));
            }
            Behavior::Sequential(rule)
        }
        ModelKind::Source => {
            let src: RawSource = serde_json::from_value(raw.behavior.clone()).map_err(behavior_err)?;
            Behavior::Source(match src {
                RawSource::Constant { value } => SourceTemplate::Constant(value),
                RawSource::Switch => SourceTemplate::Switch,
                RawSource::Clock => SourceTemplate::Clock,
            })
        }
        ModelKind::Display => {
            let d: RawDisplay = serde_json::from_value(raw.behavior.clone()).map_err(behavior_err)?;
            let segs = d
                .segments
                .into_iter()
                .map(|(seg, pin)| Ok((seg, pin_of(&pin)?)))
                .collect::<Result<Vec<_>, ModelError>>()?;
            Behavior::Display(segs)
        }
    };

    // Every pin that the behavior reads must be an input and every pin it
    // drives must be an output.
    check_directions(&raw.pins, &behavior).map_err(fail)?;

    let has_outputs = raw.pins.iter().any(|p| p.direction == PinDirection::Output);
    let mut params = raw.params;
    if matches!(raw.kind, ModelKind::Combinational | ModelKind::Sequential) && has_outputs {
        params.push(ParamSpec { name: "delay_ns".into(), ty: ParamType::Int { min: 0, max: 1_000_000_000 } });
        for p in raw.pins.iter().filter(|p| p.direction == PinDirection::Output) {
            params.push(ParamSpec { name: format!("init.{}", p.name), ty: ParamType::Logic });
        }
    }
    let delay_ns = match raw.kind {
        ModelKind::Combinational | ModelKind::Sequential => raw.delay_ns.unwrap_or(10),
        _ => raw.delay_ns.unwrap_or(0),
    };

    Ok(ComponentModel {
        part: raw.part,
        description: raw.description,
        pins: raw.pins,
        kind: raw.kind,
        behavior,
        delay_ns,
        params,
        reset_state,
    })
}

fn check_directions(pins: &[PinSpec], behavior: &Behavior) -> Result<(), String> {
    let want = |idx: usize, dir: PinDirection| {
        if pins[idx].direction == dir {
            Ok(())
        } else {
            Err(format!("pin {} must be {:?}", pins[idx].name, dir))
        }
    };
    match behavior {
        Behavior::Combinational(c) => {
            for o in &c.outputs {
                want(o.pin, PinDirection::Output)?;
                for &s in &o.support {
                    want(s, PinDirection::Input)?;
                }
            }
        }
        Behavior::Sequential(rule) => {
            for p in rule.state_pins() {
                want(p, PinDirection::Output)?;
            }
            for c in rule.clock_pins() {
                want(c, PinDirection::Input)?;
            }
        }
        Behavior::Display(segs) => {
            for (_, p) in segs {
                want(*p, PinDirection::Input)?;
            }
        }
        Behavior::Source(_) => {
            if pins.iter().any(|p| p.direction == PinDirection::Input) {
                return Err("sources have no inputs".into());
            }
        }
    }
    Ok(())
}

fn compile_comb(pins: &[PinSpec], comb: RawComb) -> Result<CombLogic, String> {
    let pin_of = |name: &str| pins.iter().position(|p| p.name == name).ok_or_else(|| format!("unknown pin {name}"));
    match (comb.exprs, comb.table) {
        (Some(ex), None) => {
            let mut terms = BTreeMap::new();
            let mut term_list = Vec::new();
            for (name, src) in &ex.terms {
                if pins.iter().any(|p| &p.name == name) {
                    return Err(format!("term {name} shadows a pin"));
                }
                let e = BoolExpr::parse(src).map_err(|e| e.to_string())?;
                // terms may only refer to pins and earlier terms
                for v in e.vars() {
                    if !terms.contains_key(&v) {
                        pin_of(&v).map_err(|_| format!("term {name}: unknown name {v}"))?;
                    }
                }
                terms.insert(name.clone(), e.clone());
                term_list.push((name.clone(), e));
            }
            let mut outputs = Vec::new();
            let mut out_list = Vec::new();
            for (name, src) in &ex.outputs {
                let pin = pin_of(name)?;
                let e = BoolExpr::parse(src).map_err(|e| e.to_string())?;
                let flat = e.inline_terms(&terms);
                let vars = flat.vars();
                let support: Vec<usize> = vars.iter().map(|v| pin_of(v)).collect::<Result<_, _>>()?;
                if support.len() > MAX_SUPPORT {
                    return Err(format!("output {name} depends on too many inputs"));
                }
                let n = support.len();
                let table = (0..1usize << n)
                    .map(|idx| {
                        let look = |v: &str| {
                            let i = vars.iter().position(|x| x == v).expect("var in support");
                            idx >> (n - 1 - i) & 1 == 1
                        };
                        LogicValue::from_bool(flat.eval(&look))
                    })
                    .collect();
                outputs.push(CombOutput { pin, support, table });
                out_list.push((name.clone(), e));
            }
            Ok(CombLogic { outputs, source: CombSource::Exprs { terms: term_list, outputs: out_list } })
        }
        (None, Some(t)) => {
            let n = t.inputs.len();
            if n > MAX_SUPPORT {
                return Err("function table has too many inputs".into());
            }
            let support: Vec<usize> = t.inputs.iter().map(|v| pin_of(v)).collect::<Result<_, _>>()?;
            let out_pins: Vec<usize> = t.outputs.iter().map(|v| pin_of(v)).collect::<Result<_, _>>()?;
            let parse_out = |s: &str| -> Result<Vec<LogicValue>, String> {
                if s.chars().count() != out_pins.len() {
                    return Err(format!("output pattern {s:?} needs {} values", out_pins.len()));
                }
                s.chars().map(|c| LogicValue::from_char(c).ok_or_else(|| format!("bad output value {c:?}"))).collect()
            };
            let default = parse_out(&t.default)?;
            let mut rows = Vec::new();
            for (pat, outs) in &t.rows {
                if pat.chars().count() != n || pat.chars().any(|c| !matches!(c, '0' | '1' | '-')) {
                    return Err(format!("input pattern {pat:?} must be {n} characters of 0, 1 or -"));
                }
                rows.push((pat.as_bytes().to_vec(), parse_out(outs)?));
            }
            let mut tables = vec![Vec::with_capacity(1 << n); out_pins.len()];
            for idx in 0..1usize << n {
                let hit = rows.iter().find(|(pat, _)| {
                    pat.iter().enumerate().all(|(i, &c)| {
                        let bit = idx >> (n - 1 - i) & 1 == 1;
                        c == b'-' || (c == b'1') == bit
                    })
                });
                let vals = hit.map(|(_, o)| o).unwrap_or(&default);
                for (k, v) in vals.iter().enumerate() {
                    tables[k].push(*v);
                }
            }
            let outputs = out_pins
                .iter()
                .zip(tables)
                .map(|(&pin, table)| CombOutput { pin, support: support.clone(), table })
                .collect();
            Ok(CombLogic {
                outputs,
                source: CombSource::Table { inputs: t.inputs, outputs: t.outputs, rows: t.rows, default: t.default },
            })
        }
        _ => Err("combinational behavior needs exactly one of `exprs` or `table`".into()),
    }
}
