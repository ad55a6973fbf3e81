//! Compiled process code and its interpreter, plus the runner that maps an
//! elaborated design onto the event kernel.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::logic::LogicValue;
use crate::sim::kernel::{self, Ctx, DelayMode, DriverId, KernelConfig, NetId, Network, Process};
use crate::sim::procs::{CombProc, PartPins, SeqProc, SourceProc};
use crate::sim::{check_config, LogLevel, ProbeTarget, SimConfig, SimError, SimLog, SimRun, Trace, TraceSignal, Watch};
use crate::components::Behavior;
use crate::stimulus::{SignalSpec, StimulusSet};

use super::elab::{ElaboratedDesign, PortDir, ProcessKind};

/// Static type of a compiled expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Bit,
    Bits(usize),
    Int,
    Bool,
}

impl std::fmt::Display for Ty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ty::Bit => write!(f, "std_logic"),
            Ty::Bits(n) => write!(f, "std_logic_vector of {n} bits"),
            Ty::Int => write!(f, "integer"),
            Ty::Bool => write!(f, "boolean"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Bit(LogicValue),
    /// Most significant (leftmost) bit first.
    Bits(Vec<LogicValue>),
    Int(i64),
    Bool(bool),
}

impl Val {
    pub fn bits(&self) -> Vec<LogicValue> {
        match self {
            Val::Bit(v) => vec![*v],
            Val::Bits(v) => v.clone(),
            Val::Int(_) | Val::Bool(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
}

impl LogicOp {
    fn bit(self, a: LogicValue, b: LogicValue) -> LogicValue {
        match self {
            LogicOp::And => a.and(b),
            LogicOp::Or => a.or(b),
            LogicOp::Nand => a.and(b).not(),
            LogicOp::Nor => a.or(b).not(),
            LogicOp::Xor => a.xor(b),
            LogicOp::Xnor => a.xor(b).not(),
        }
    }

    fn boolean(self, a: bool, b: bool) -> bool {
        match self {
            LogicOp::And => a && b,
            LogicOp::Or => a || b,
            LogicOp::Nand => !(a && b),
            LogicOp::Nor => !(a || b),
            LogicOp::Xor => a != b,
            LogicOp::Xnor => a == b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CExpr {
    Lit(Val),
    Net(NetId),
    Nets(Vec<NetId>),
    Var(usize),
    /// Selected positions of a vector variable; one position yields a bit.
    VarBits(usize, Vec<usize>, bool),
    Not(Box<CExpr>),
    Logic(LogicOp, Box<CExpr>, Box<CExpr>),
    /// Equality; the flag negates.
    Eq(bool, Box<CExpr>, Box<CExpr>),
    Rel(RelOp, Box<CExpr>, Box<CExpr>),
    /// Modular add or subtract (flag) giving a vector of the given width.
    AddBits(bool, Box<CExpr>, Box<CExpr>, usize),
    AddInt(bool, Box<CExpr>, Box<CExpr>),
    Neg(Box<CExpr>),
    Concat(Vec<CExpr>),
    Replicate(Box<CExpr>, usize),
    IntToBits(Box<CExpr>, usize),
    BitsToInt(Box<CExpr>),
    Edge(NetId, bool),
    Event(NetId),
    /// std_logic used as a condition: true only for '1'.
    Cond(Box<CExpr>),
}

impl CExpr {
    pub fn is_const(&self) -> bool {
        match self {
            CExpr::Lit(_) => true,
            CExpr::Net(_) | CExpr::Nets(_) | CExpr::Var(_) | CExpr::VarBits(..) | CExpr::Edge(..) | CExpr::Event(_) => {
                false
            }
            CExpr::Not(a) | CExpr::Neg(a) | CExpr::Replicate(a, _) | CExpr::IntToBits(a, _) | CExpr::BitsToInt(a)
            | CExpr::Cond(a) => a.is_const(),
            CExpr::Logic(_, a, b)
            | CExpr::Eq(_, a, b)
            | CExpr::Rel(_, a, b)
            | CExpr::AddBits(_, a, b, _)
            | CExpr::AddInt(_, a, b) => a.is_const() && b.is_const(),
            CExpr::Concat(v) => v.iter().all(CExpr::is_const),
        }
    }

    /// Nets whose value the expression reads.
    pub fn reads(&self, out: &mut BTreeSet<NetId>) {
        match self {
            CExpr::Lit(_) | CExpr::Var(_) | CExpr::VarBits(..) => {}
            CExpr::Net(n) | CExpr::Edge(n, _) | CExpr::Event(n) => {
                out.insert(*n);
            }
            CExpr::Nets(v) => out.extend(v),
            CExpr::Not(a) | CExpr::Neg(a) | CExpr::Replicate(a, _) | CExpr::IntToBits(a, _) | CExpr::BitsToInt(a)
            | CExpr::Cond(a) => a.reads(out),
            CExpr::Logic(_, a, b)
            | CExpr::Eq(_, a, b)
            | CExpr::Rel(_, a, b)
            | CExpr::AddBits(_, a, b, _)
            | CExpr::AddInt(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            CExpr::Concat(v) => v.iter().for_each(|e| e.reads(out)),
        }
    }
}

pub trait Env {
    fn net(&self, n: NetId) -> LogicValue;
    fn event(&self, n: NetId) -> bool;
    fn last(&self, n: NetId) -> LogicValue;
    fn var(&self, slot: usize) -> &Val;
}

/// Environment for constant folding; never consulted by constant expressions.
pub struct NoEnv;

impl Env for NoEnv {
    fn net(&self, _: NetId) -> LogicValue {
        LogicValue::X
    }
    fn event(&self, _: NetId) -> bool {
        false
    }
    fn last(&self, _: NetId) -> LogicValue {
        LogicValue::X
    }
    fn var(&self, _: usize) -> &Val {
        &Val::Int(0)
    }
}

/// Unsigned comparison, leftmost bit most significant; `None` if any bit is unknown.
fn cmp_unsigned(a: &[LogicValue], b: &[LogicValue]) -> Option<Ordering> {
    let n = a.len().max(b.len());
    let pad = |v: &[LogicValue]| -> Option<Vec<bool>> {
        let mut out = vec![false; n - v.len()];
        for x in v {
            out.push(x.as_input().to_bool()?);
        }
        Some(out)
    };
    Some(pad(a)?.cmp(&pad(b)?))
}

/// `k` modulo 2^width, most significant bit first.
pub fn int_to_bits(k: i64, width: usize) -> Vec<LogicValue> {
    (0..width)
        .rev()
        .map(|i| LogicValue::from_bool(if i >= 64 { k < 0 } else { (k >> i) & 1 == 1 }))
        .collect()
}

fn bits_to_int(v: &[LogicValue]) -> Option<i64> {
    let mut acc: i64 = 0;
    for x in v {
        acc = acc.wrapping_mul(2).wrapping_add(x.as_input().to_bool()? as i64);
    }
    Some(acc)
}

fn add_bits(a: &[LogicValue], b: &[LogicValue], sub: bool, width: usize) -> Vec<LogicValue> {
    let ext = |v: &[LogicValue]| -> Option<Vec<bool>> {
        let mut out: Vec<bool> = v.iter().map(|x| x.as_input().to_bool()).collect::<Option<_>>()?;
        while out.len() < width {
            out.insert(0, false);
        }
        Some(out[out.len() - width..].to_vec())
    };
    let (Some(x), Some(mut y)) = (ext(a), ext(b)) else { return vec![LogicValue::X; width] };
    let mut carry = false;
    if sub {
        y.iter_mut().for_each(|b| *b = !*b);
        carry = true;
    }
    let mut out = vec![LogicValue::Zero; width];
    for i in (0..width).rev() {
        let s = x[i] as u8 + y[i] as u8 + carry as u8;
        out[i] = LogicValue::from_bool(s & 1 == 1);
        carry = s >= 2;
    }
    out
}

fn as_bits(v: Val, width: usize) -> Vec<LogicValue> {
    match v {
        Val::Int(k) => int_to_bits(k, width),
        other => other.bits(),
    }
}

fn val_eq(a: &Val, b: &Val) -> bool {
    match (a, b) {
        (Val::Bits(x), Val::Bits(y)) if x.len() != y.len() => cmp_unsigned(x, y) == Some(Ordering::Equal),
        (Val::Bits(x), Val::Int(k)) | (Val::Int(k), Val::Bits(x)) => {
            *k >= 0 && cmp_unsigned(x, &int_to_bits(*k, 64)) == Some(Ordering::Equal)
        }
        _ => a == b,
    }
}

fn val_cmp(a: &Val, b: &Val) -> Option<Ordering> {
    match (a, b) {
        (Val::Int(x), Val::Int(y)) => Some(x.cmp(y)),
        (Val::Bits(x), Val::Bits(y)) => cmp_unsigned(x, y),
        (Val::Bits(x), Val::Int(k)) => {
            if *k < 0 {
                bits_to_int(x).map(|_| Ordering::Greater)
            } else {
                cmp_unsigned(x, &int_to_bits(*k, 64))
            }
        }
        (Val::Int(_), Val::Bits(_)) => val_cmp(b, a).map(Ordering::reverse),
        _ => None,
    }
}

pub fn eval(e: &CExpr, env: &dyn Env) -> Val {
    match e {
        CExpr::Lit(v) => v.clone(),
        CExpr::Net(n) => Val::Bit(env.net(*n)),
        CExpr::Nets(v) => Val::Bits(v.iter().map(|n| env.net(*n)).collect()),
        CExpr::Var(s) => env.var(*s).clone(),
        CExpr::VarBits(s, pos, single) => {
            let bits = env.var(*s).bits();
            let sel: Vec<LogicValue> = pos.iter().map(|&p| bits.get(p).copied().unwrap_or(LogicValue::X)).collect();
            if *single {
                Val::Bit(sel[0])
            } else {
                Val::Bits(sel)
            }
        }
        CExpr::Not(a) => match eval(a, env) {
            Val::Bit(v) => Val::Bit(v.not()),
            Val::Bits(v) => Val::Bits(v.into_iter().map(LogicValue::not).collect()),
            Val::Bool(b) => Val::Bool(!b),
            other => other,
        },
        CExpr::Logic(op, a, b) => match (eval(a, env), eval(b, env)) {
            (Val::Bool(x), Val::Bool(y)) => Val::Bool(op.boolean(x, y)),
            (Val::Bit(x), Val::Bit(y)) => Val::Bit(op.bit(x, y)),
            (x, y) => Val::Bits(x.bits().into_iter().zip(y.bits()).map(|(p, q)| op.bit(p, q)).collect()),
        },
        CExpr::Eq(neg, a, b) => Val::Bool(val_eq(&eval(a, env), &eval(b, env)) != *neg),
        CExpr::Rel(op, a, b) => {
            let o = val_cmp(&eval(a, env), &eval(b, env));
            Val::Bool(match (op, o) {
                (_, None) => false,
                (RelOp::Lt, Some(o)) => o == Ordering::Less,
                (RelOp::Le, Some(o)) => o != Ordering::Greater,
                (RelOp::Gt, Some(o)) => o == Ordering::Greater,
                (RelOp::Ge, Some(o)) => o != Ordering::Less,
            })
        }
        CExpr::AddBits(sub, a, b, w) => {
            let x = as_bits(eval(a, env), *w);
            let y = as_bits(eval(b, env), *w);
            Val::Bits(add_bits(&x, &y, *sub, *w))
        }
        CExpr::AddInt(sub, a, b) => match (eval(a, env), eval(b, env)) {
            (Val::Int(x), Val::Int(y)) => Val::Int(if *sub { x.wrapping_sub(y) } else { x.wrapping_add(y) }),
            _ => Val::Int(0),
        },
        CExpr::Neg(a) => match eval(a, env) {
            Val::Int(x) => Val::Int(x.wrapping_neg()),
            other => other,
        },
        CExpr::Concat(parts) => Val::Bits(parts.iter().flat_map(|p| eval(p, env).bits()).collect()),
        CExpr::Replicate(a, n) => {
            let b = eval(a, env).bits();
            Val::Bits((0..*n).flat_map(|_| b.clone()).collect())
        }
        CExpr::IntToBits(a, w) => match eval(a, env) {
            Val::Int(k) => Val::Bits(int_to_bits(k, *w)),
            _ => Val::Bits(vec![LogicValue::X; *w]),
        },
        CExpr::BitsToInt(a) => Val::Int(bits_to_int(&eval(a, env).bits()).unwrap_or(0)),
        CExpr::Edge(n, rising) => {
            let (now, last) = (env.net(*n).as_input(), env.last(*n).as_input());
            let (to, from) = if *rising { (LogicValue::One, LogicValue::Zero) } else { (LogicValue::Zero, LogicValue::One) };
            Val::Bool(env.event(*n) && now == to && last == from)
        }
        CExpr::Event(n) => Val::Bool(env.event(*n)),
        CExpr::Cond(a) => Val::Bool(matches!(eval(a, env), Val::Bit(v) if v.as_input() == LogicValue::One)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instr {
    /// Signal assignment; `targets` are local driver indices, one per bit.
    Sig { targets: Vec<usize>, wave: Vec<(CExpr, u64)>, transport: bool },
    Var { slot: usize, bits: Option<Vec<usize>>, value: CExpr },
    JumpIfNot(CExpr, usize),
    Jump(usize),
    Case { sel: CExpr, arms: Vec<(Vec<Val>, usize)>, default: usize },
    Wait { on: Vec<NetId>, until: Option<CExpr>, timeout: Option<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub code: Vec<Instr>,
    pub var_init: Vec<Val>,
}

/// Instructions one activation may execute before the process is stopped.
pub const STEP_BUDGET: usize = 1_000_000;

pub struct ProgramProc {
    name: String,
    prog: Arc<Program>,
    drivers: Vec<DriverId>,
    vars: Vec<Val>,
    pc: usize,
    halted: bool,
}

struct CtxEnv<'a, 'b> {
    ctx: &'a Ctx<'b>,
    vars: &'a [Val],
}

impl Env for CtxEnv<'_, '_> {
    fn net(&self, n: NetId) -> LogicValue {
        self.ctx.value(n)
    }
    fn event(&self, n: NetId) -> bool {
        self.ctx.event(n)
    }
    fn last(&self, n: NetId) -> LogicValue {
        self.ctx.last_value(n)
    }
    fn var(&self, slot: usize) -> &Val {
        &self.vars[slot]
    }
}

impl ProgramProc {
    pub fn new(name: String, prog: Arc<Program>, drivers: Vec<DriverId>) -> Self {
        let vars = prog.var_init.clone();
        ProgramProc { name, prog, drivers, vars, pc: 0, halted: false }
    }

    fn exec(&mut self, ctx: &mut Ctx<'_>) {
        let prog = self.prog.clone();
        for _ in 0..STEP_BUDGET {
            let Some(ins) = prog.code.get(self.pc) else {
                self.halted = true;
                return;
            };
            match ins {
                Instr::Sig { targets, wave, transport } => {
                    for (k, (e, delay)) in wave.iter().enumerate() {
                        let bits = eval(e, &CtxEnv { ctx, vars: &self.vars }).bits();
                        let mode =
                            if *transport || k > 0 { DelayMode::Transport } else { DelayMode::Inertial };
                        for (t, v) in targets.iter().zip(bits) {
                            ctx.drive_with(self.drivers[*t], v, *delay, mode);
                        }
                    }
                    self.pc += 1;
                }
                Instr::Var { slot, bits, value } => {
                    let v = eval(value, &CtxEnv { ctx, vars: &self.vars });
                    match bits {
                        None => self.vars[*slot] = v,
                        Some(pos) => {
                            if let Val::Bits(cur) = &mut self.vars[*slot] {
                                for (p, b) in pos.iter().zip(v.bits()) {
                                    cur[*p] = b;
                                }
                            }
                        }
                    }
                    self.pc += 1;
                }
                Instr::JumpIfNot(c, to) => {
                    let v = eval(c, &CtxEnv { ctx, vars: &self.vars });
                    self.pc = if v == Val::Bool(true) { self.pc + 1 } else { *to };
                }
                Instr::Jump(to) => self.pc = *to,
                Instr::Case { sel, arms, default } => {
                    let v = eval(sel, &CtxEnv { ctx, vars: &self.vars });
                    self.pc = arms.iter().find(|(vals, _)| vals.iter().any(|c| val_eq(c, &v))).map_or(*default, |a| a.1);
                }
                Instr::Wait { on, until, timeout } => {
                    match timeout {
                        Some(t) => ctx.wake_after(*t),
                        None if on.is_empty() && until.is_none() => self.halted = true,
                        None => {}
                    }
                    return;
                }
            }
        }
        ctx.log(
            LogLevel::Error,
            "MODEL_ERROR",
            format!("process {} ran {STEP_BUDGET} steps without reaching a wait; stopped", self.name),
        );
        self.halted = true;
    }
}

impl Process for ProgramProc {
    fn run(&mut self, ctx: &mut Ctx<'_>) {
        if ctx.is_init() {
            self.exec(ctx);
            return;
        }
        if self.halted {
            return;
        }
        let prog = self.prog.clone();
        let Some(Instr::Wait { on, until, timeout }) = prog.code.get(self.pc) else { return };
        let resume = if timeout.is_some() && ctx.timer_fired() {
            true
        } else if on.iter().any(|&n| ctx.event(n)) {
            until.as_ref().is_none_or(|c| eval(c, &CtxEnv { ctx, vars: &self.vars }) == Val::Bool(true))
        } else {
            false
        };
        if resume {
            ctx.cancel_timer();
            self.pc += 1;
            self.exec(ctx);
        }
    }
}

/// Runs an elaborated design. Top-level input bits are driven from `stim`
/// by port name (`name` for std_logic, `name(i)` for vector bits); bits
/// without a stimulus are held at `X`.
pub fn simulate_vhdl(design: &ElaboratedDesign, stim: &StimulusSet, cfg: &SimConfig) -> Result<SimRun, SimError> {
    check_config(cfg)?;
    let mut inputs: BTreeMap<&str, NetId> = BTreeMap::new();
    for p in design.ports.iter().filter(|p| p.dir != PortDir::Out) {
        for (label, &n) in p.labels.iter().zip(&p.nets) {
            inputs.insert(label, n);
        }
    }
    for (name, spec) in &stim.assignments {
        if !inputs.contains_key(name.as_str()) {
            return Err(SimError::UnknownInput(name.clone()));
        }
        spec.validate(&format!("assignments.{name}"))?;
    }
    let horizon = cfg.horizon_ns;
    let mut net = Network::new();
    for n in &design.nets {
        net.add_net(n.label.clone(), n.init);
    }
    let mut log = SimLog::default();
    for p in design.ports.iter().filter(|p| p.dir == PortDir::In) {
        for (label, &n) in p.labels.iter().zip(&p.nets) {
            let spec = match stim.assignments.get(label) {
                Some(s) => s.clone(),
                None => {
                    log.push(LogLevel::Warn, 0, "UNCOVERED_INPUT", format!("top input {label} has no stimulus; held at X"));
                    SignalSpec::constant(LogicValue::X)
                }
            };
            let d = net.add_driver(n, LogicValue::Z);
            net.add_process(Box::new(SourceProc::new(d, &spec, horizon)), &[]);
        }
    }
    for p in design.ports.iter().filter(|p| p.dir == PortDir::Inout) {
        for (label, &n) in p.labels.iter().zip(&p.nets) {
            if let Some(spec) = stim.assignments.get(label) {
                let d = net.add_driver(n, LogicValue::Z);
                net.add_process(Box::new(SourceProc::new(d, spec, horizon)), &[]);
            }
        }
    }
    for p in &design.processes {
        let drivers: Vec<DriverId> = p.drivers.iter().map(|&(n, init)| net.add_driver(n, init)).collect();
        match &p.kind {
            ProcessKind::Drivers => {}
            ProcessKind::Native { model, pins, outputs, delay_ns, state } => {
                let pins =
                    PartPins { nets: pins.clone(), drivers: outputs.iter().map(|o| o.map(|i| drivers[i])).collect() };
                match &model.behavior {
                    Behavior::Combinational(_) => {
                        net.add_process(Box::new(CombProc { model: model.clone(), pins, delay_ns: *delay_ns }), &p.sensitivity);
                    }
                    Behavior::Sequential(_) => {
                        let proc =
                            SeqProc { model: model.clone(), pins, delay_ns: *delay_ns, state: state.clone() };
                        net.add_process(Box::new(proc), &p.sensitivity);
                    }
                    Behavior::Source(_) | Behavior::Display(_) => {}
                }
            }
            ProcessKind::Program(prog) => {
                net.add_process(Box::new(ProgramProc::new(p.name.clone(), prog.clone(), drivers)), &p.sensitivity);
            }
        }
    }

    let mut watched: Vec<(String, String, NetId)> = Vec::new();
    match &cfg.watch {
        Watch::AllNets => {
            let mut seen = BTreeSet::new();
            for p in &design.ports {
                for (label, &n) in p.labels.iter().zip(&p.nets) {
                    if seen.insert(n) {
                        watched.push((label.clone(), label.clone(), n));
                    }
                }
            }
            for (n, info) in design.nets.iter().enumerate() {
                if seen.insert(n) {
                    watched.push((info.label.clone(), info.label.clone(), n));
                }
            }
        }
        Watch::Probes(probes) => {
            for p in probes {
                match &p.target {
                    ProbeTarget::Net(name) => {
                        let n = design
                            .net_by_label(name)
                            .ok_or_else(|| SimError::Probe(p.id.clone(), format!("no signal {name:?}")))?;
                        watched.push((p.label.clone(), name.clone(), n));
                    }
                    ProbeTarget::Pin(pin) => {
                        return Err(SimError::Probe(p.id.clone(), format!("pin probe {pin} on a VHDL design")));
                    }
                }
            }
        }
    }
    let kwatch = kernel::Watch { nets: watched.iter().map(|w| w.2).collect() };
    let out = kernel::run(net, &kwatch, &KernelConfig { horizon_ns: horizon, max_deltas_per_instant: cfg.max_deltas_per_instant });
    let signals = watched
        .into_iter()
        .zip(out.changes)
        .map(|((label, id, _), changes)| TraceSignal { label, id, changes })
        .collect();
    let horizon_ns = out.fault.as_ref().map_or(horizon, |f| f.time_ns);
    log.entries.extend(out.log.entries);
    Ok(SimRun { trace: Trace { horizon_ns, signals }, log, fault: out.fault })
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    #[test]
    fn vector_arithmetic_wraps() {
        let nine = int_to_bits(9, 4);
        assert_eq!(nine, vec![One, Zero, Zero, One]);
        assert_eq!(add_bits(&int_to_bits(15, 4), &int_to_bits(1, 4), false, 4), int_to_bits(0, 4));
        assert_eq!(add_bits(&int_to_bits(0, 4), &int_to_bits(1, 4), true, 4), int_to_bits(15, 4));
        assert_eq!(add_bits(&[X, One], &int_to_bits(1, 2), false, 2), vec![X, X]);
    }

    #[test]
    fn comparisons_are_unsigned_and_false_on_unknowns() {
        let e = |a: Val, b: Val| eval(&CExpr::Eq(false, Box::new(CExpr::Lit(a)), Box::new(CExpr::Lit(b))), &NoEnv);
        assert_eq!(e(Val::Bits(int_to_bits(9, 4)), Val::Int(9)), Val::Bool(true));
        assert_eq!(e(Val::Bits(vec![X, One]), Val::Int(1)), Val::Bool(false));
        assert_eq!(e(Val::Bit(X), Val::Bit(X)), Val::Bool(true));
        let lt = eval(
            &CExpr::Rel(RelOp::Lt, Box::new(CExpr::Lit(Val::Bits(int_to_bits(3, 4)))), Box::new(CExpr::Lit(Val::Int(10)))),
            &NoEnv,
        );
        assert_eq!(lt, Val::Bool(true));
    }

    #[test]
    fn logic_on_vectors_is_bitwise() {
        let v = eval(
            &CExpr::Logic(
                LogicOp::Nand,
                Box::new(CExpr::Lit(Val::Bits(vec![One, One, Zero]))),
                Box::new(CExpr::Lit(Val::Bits(vec![One, X, X]))),
            ),
            &NoEnv,
        );
        assert_eq!(v, Val::Bits(vec![Zero, X, One]));
    }
}
