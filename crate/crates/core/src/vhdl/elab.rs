//! Elaboration: name and type checks, binding of instances to parsed
//! entities or catalog parts, and flattening into kernel processes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::components::{Behavior, ComponentModel, ComponentRegistry, PinDirection};
use crate::logic::LogicValue;
use crate::sim::kernel::NetId;

use super::ast::*;
use super::interp::{eval, int_to_bits, CExpr, Instr, LogicOp, NoEnv, Program, RelOp, Ty, Val};
use super::{closest, part_entity_name, pin_identifier, Category, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetInfo {
    /// Hierarchical signal name; vector bits as `name(i)`.
    pub label: String,
    /// Value while no driver exists.
    pub init: LogicValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDir {
    In,
    Out,
    Inout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignPort {
    pub name: String,
    pub dir: PortDir,
    /// One net per bit, leftmost first.
    pub nets: Vec<NetId>,
    /// Stimulus and trace label per bit.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum ProcessKind {
    /// Static drivers only (constant port actuals).
    Drivers,
    /// A catalog part bound by entity name. `outputs` maps each pin to an
    /// index into the process's drivers.
    Native {
        model: Arc<ComponentModel>,
        pins: Vec<Option<NetId>>,
        outputs: Vec<Option<usize>>,
        delay_ns: u64,
        state: Vec<LogicValue>,
    },
    Program(Arc<Program>),
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub name: String,
    /// (net, initial value) per driver.
    pub drivers: Vec<(NetId, LogicValue)>,
    pub sensitivity: Vec<NetId>,
    pub kind: ProcessKind,
}

/// A flattened design ready for [`super::simulate_vhdl`].
#[derive(Debug, Clone)]
pub struct ElaboratedDesign {
    pub top: String,
    pub nets: Vec<NetInfo>,
    pub ports: Vec<DesignPort>,
    pub processes: Vec<ProcessSpec>,
    /// Every declared signal by hierarchical name, bits leftmost first.
    pub signal_map: BTreeMap<String, Vec<NetId>>,
    /// Run length requested by a testbench pragma.
    pub horizon_ns: Option<u64>,
}

impl ElaboratedDesign {
    pub fn net_by_label(&self, label: &str) -> Option<NetId> {
        if let Some(p) = self.ports.iter().find_map(|p| p.labels.iter().position(|l| l == label).map(|i| p.nets[i])) {
            return Some(p);
        }
        match self.signal_map.get(label) {
            Some(v) if v.len() == 1 => Some(v[0]),
            _ => self.nets.iter().position(|n| n.label == label),
        }
    }

    pub fn port(&self, name: &str) -> Option<&DesignPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Labels of top-level input bits.
    pub fn input_labels(&self) -> Vec<&str> {
        self.ports.iter().filter(|p| p.dir != PortDir::Out).flat_map(|p| p.labels.iter().map(String::as_str)).collect()
    }

    pub fn output_labels(&self) -> Vec<&str> {
        self.ports.iter().filter(|p| p.dir != PortDir::In).flat_map(|p| p.labels.iter().map(String::as_str)).collect()
    }
}

const MAX_DEPTH: usize = 32;
const MAX_WIDTH: i64 = 1024;
const FS_PER_NS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Scalar,
    Vector { left: i64, right: i64, desc: bool },
}

impl Shape {
    fn width(self) -> usize {
        match self {
            Shape::Scalar => 1,
            Shape::Vector { left, right, desc } => {
                let w = if desc { left - right + 1 } else { right - left + 1 };
                w.max(0) as usize
            }
        }
    }

    fn ty(self) -> Ty {
        match self {
            Shape::Scalar => Ty::Bit,
            Shape::Vector { .. } => Ty::Bits(self.width()),
        }
    }

    /// Position of index `i` counted from the left.
    fn pos(self, i: i64) -> Option<usize> {
        match self {
            Shape::Scalar => None,
            Shape::Vector { left, right, desc } => {
                let p = if desc { left - i } else { i - left };
                let lo = left.min(right);
                let hi = left.max(right);
                (i >= lo && i <= hi).then_some(p as usize)
            }
        }
    }

    fn index_at(self, pos: usize) -> i64 {
        match self {
            Shape::Scalar => 0,
            Shape::Vector { left, desc, .. } => {
                if desc {
                    left - pos as i64
                } else {
                    left + pos as i64
                }
            }
        }
    }

    fn labels(self, name: &str) -> Vec<String> {
        match self {
            Shape::Scalar => vec![name.to_string()],
            Shape::Vector { .. } => (0..self.width()).map(|p| format!("{name}({})", self.index_at(p))).collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct Sig {
    nets: Vec<NetId>,
    shape: Shape,
    /// Driver initial value per bit (the declared default).
    init: Vec<LogicValue>,
    mode: Option<Mode>,
}

#[derive(Debug, Clone)]
struct PortInfo {
    name: String,
    mode: Mode,
    shape: Shape,
    default: Option<Vec<LogicValue>>,
}

struct Scope<'a> {
    prefix: String,
    sigs: BTreeMap<String, Sig>,
    components: BTreeMap<String, &'a [PortDecl]>,
}

enum Unit<'a> {
    Parsed(&'a EntityDecl, &'a ArchBody),
    Native(Arc<ComponentModel>),
}

struct Elab<'a> {
    ast: &'a Ast,
    entities: BTreeMap<String, &'a EntityDecl>,
    archs: BTreeMap<String, &'a ArchBody>,
    catalog: BTreeMap<String, Arc<ComponentModel>>,
    diags: Vec<Diagnostic>,
    nets: Vec<NetInfo>,
    procs: Vec<ProcessSpec>,
    signal_map: BTreeMap<String, Vec<NetId>>,
}

/// Elaborates `top` into a flat design. Instances bind to a parsed entity
/// of the same name first, otherwise to the catalog part whose emitted
/// entity name matches. Returns `None` when any error was reported.
pub fn elaborate(ast: &Ast, top: &str, registry: &ComponentRegistry) -> (Option<ElaboratedDesign>, Vec<Diagnostic>) {
    let catalog = registry
        .models()
        .filter(|m| !matches!(m.behavior, Behavior::Source(_)))
        .map(|m| (part_entity_name(&m.part), m.clone()))
        .collect();
    let mut el = Elab {
        ast,
        entities: BTreeMap::new(),
        archs: BTreeMap::new(),
        catalog,
        diags: Vec::new(),
        nets: Vec::new(),
        procs: Vec::new(),
        signal_map: BTreeMap::new(),
    };
    for u in &ast.units {
        match u {
            DesignUnit::Entity(e) => {
                if el.entities.insert(e.name.name.clone(), e).is_some() {
                    el.err(Category::Name, e.name.span, format!("entity '{}' is declared more than once", e.name.name));
                }
            }
            DesignUnit::Architecture(_) => {}
            DesignUnit::Unsupported { what, span } => {
                el.err(Category::Elaboration, *span, format!("unsupported construct: {what}"))
            }
        }
    }
    for u in &ast.units {
        if let DesignUnit::Architecture(a) = u {
            if !el.entities.contains_key(&a.entity.name) {
                let hint = el.hint(&a.entity.name, el.entities.keys().map(String::as_str).collect());
                el.err(Category::Name, a.entity.span, format!("entity '{}' is not declared{hint}", a.entity.name));
            }
            // The last architecture of an entity wins, as with a default binding.
            el.archs.insert(a.entity.name.clone(), a);
        }
    }
    let top_lc = top.to_ascii_lowercase();
    let ports = match el.entities.get(top_lc.as_str()).copied() {
        None => {
            let hint = el.hint(&top_lc, el.entities.keys().map(String::as_str).collect());
            el.err(Category::Name, el.first_span(), format!("top entity '{top_lc}' is not declared{hint}"));
            None
        }
        Some(ent) => match el.archs.get(top_lc.as_str()).copied() {
            None => {
                el.err(Category::Elaboration, ent.name.span, format!("entity '{top_lc}' has no architecture"));
                None
            }
            Some(arch) => Some(el.top(ent, arch)),
        },
    };
    let failed = el.diags.iter().any(Diagnostic::is_error);
    let design = match (ports, failed) {
        (Some(ports), false) => Some(ElaboratedDesign {
            top: top_lc,
            nets: el.nets,
            ports,
            processes: el.procs,
            signal_map: el.signal_map,
            horizon_ns: ast.horizon_ns,
        }),
        _ => None,
    };
    (design, el.diags)
}

fn char_value(c: char) -> Option<LogicValue> {
    match c.to_ascii_uppercase() {
        '0' | 'L' => Some(LogicValue::Zero),
        '1' | 'H' => Some(LogicValue::One),
        'Z' => Some(LogicValue::Z),
        'U' | 'X' | 'W' | '-' => Some(LogicValue::X),
        _ => None,
    }
}

fn fold(e: CExpr) -> CExpr {
    if !matches!(e, CExpr::Lit(_)) && e.is_const() {
        CExpr::Lit(eval(&e, &NoEnv))
    } else {
        e
    }
}

impl<'a> Elab<'a> {
    fn err(&mut self, cat: Category, span: Span, msg: impl Into<String>) {
        let file = self.ast.files.get(span.file).map_or("", String::as_str);
        self.diags.push(Diagnostic::error(cat, file, span, msg));
    }

    fn first_span(&self) -> Span {
        Span { file: 0, offset: 0, len: 0, line: 1, column: 1 }
    }

    fn hint(&self, name: &str, candidates: Vec<&str>) -> String {
        match closest(name, candidates) {
            Some(c) => format!("; did you mean '{c}'?"),
            None => String::new(),
        }
    }

    fn new_net(&mut self, label: String, init: LogicValue) -> NetId {
        self.nets.push(NetInfo { label, init });
        self.nets.len() - 1
    }

    fn shape(&mut self, ty: &TypeMark) -> Option<Shape> {
        match ty {
            TypeMark::StdLogic(_) => Some(Shape::Scalar),
            TypeMark::Vector { left, right, descending, span } => {
                let s = Shape::Vector { left: *left, right: *right, desc: *descending };
                let w = if *descending { left - right + 1 } else { right - left + 1 };
                if w < 1 || w > MAX_WIDTH {
                    self.err(Category::Type, *span, format!("vector range gives {w} bits; expected 1 to {MAX_WIDTH}"));
                    return None;
                }
                Some(s)
            }
            TypeMark::Other(id) if id.name == "bit" => Some(Shape::Scalar),
            TypeMark::Other(id) => {
                self.err(
                    Category::Type,
                    id.span,
                    format!("type '{}' is not supported; use std_logic or std_logic_vector", id.name),
                );
                None
            }
        }
    }

    /// Static value of a declaration default or port default.
    fn const_init(&mut self, e: &Expr, shape: Shape) -> Option<Vec<LogicValue>> {
        let ty = shape.ty();
        let scope = Scope { prefix: String::new(), sigs: BTreeMap::new(), components: BTreeMap::new() };
        let mut c = Compiler::new(self, &scope, "init".into());
        let (ce, t) = c.expr(e, Some(ty))?;
        let ce = fold(ce);
        match (ce, t) {
            (CExpr::Lit(Val::Bit(v)), Ty::Bit) if ty == Ty::Bit => Some(vec![v]),
            (CExpr::Lit(Val::Bits(v)), Ty::Bits(n)) if ty == Ty::Bits(n) => Some(v),
            (CExpr::Lit(Val::Int(k)), Ty::Int) if matches!(ty, Ty::Bits(_)) => Some(int_to_bits(k, shape.width())),
            (CExpr::Lit(_), t) => {
                self.err(Category::Type, e.span, format!("initial value has type {t}, expected {ty}"));
                None
            }
            _ => {
                self.err(Category::Elaboration, e.span, "initial value must be a constant");
                None
            }
        }
    }

    fn port_infos(&mut self, decls: &[PortDecl]) -> Vec<(Ident, PortInfo)> {
        let mut out = Vec::new();
        for d in decls {
            let Some(shape) = self.shape(&d.ty) else { continue };
            let default = d.default.as_ref().and_then(|e| self.const_init(e, shape));
            for n in &d.names {
                out.push((n.clone(), PortInfo { name: n.name.clone(), mode: d.mode, shape, default: default.clone() }));
            }
        }
        out
    }

    fn top(&mut self, ent: &'a EntityDecl, arch: &'a ArchBody) -> Vec<DesignPort> {
        for (what, span) in &ent.unsupported {
            self.err(Category::Elaboration, *span, format!("unsupported construct: {what}"));
        }
        let mut ports = Vec::new();
        let mut bindings = BTreeMap::new();
        for (id, p) in self.port_infos(&ent.ports) {
            let labels = p.shape.labels(&p.name);
            let init = p.default.clone().unwrap_or_else(|| vec![LogicValue::X; p.shape.width()]);
            let nets: Vec<NetId> = labels.iter().zip(&init).map(|(l, &v)| self.new_net(l.clone(), v)).collect();
            let dir = match p.mode {
                Mode::In => PortDir::In,
                Mode::Out | Mode::Buffer => PortDir::Out,
                Mode::Inout => PortDir::Inout,
            };
            if bindings.insert(p.name.clone(), nets.clone()).is_some() {
                self.err(Category::Name, id.span, format!("port '{}' is declared more than once", p.name));
                continue;
            }
            self.signal_map.insert(p.name.clone(), nets.clone());
            ports.push(DesignPort { name: p.name.clone(), dir, nets, labels });
        }
        self.arch(ent, arch, String::new(), bindings, 0);
        ports
    }

    /// Elaborates one architecture instance; `bindings` gives the nets of
    /// each port.
    fn arch(
        &mut self,
        ent: &'a EntityDecl,
        arch: &'a ArchBody,
        prefix: String,
        bindings: BTreeMap<String, Vec<NetId>>,
        depth: usize,
    ) {
        let mut scope = Scope { prefix: prefix.clone(), sigs: BTreeMap::new(), components: BTreeMap::new() };
        for (_, p) in self.port_infos(&ent.ports) {
            let Some(nets) = bindings.get(&p.name) else { continue };
            let init = p.default.clone().unwrap_or_else(|| vec![LogicValue::X; p.shape.width()]);
            scope.sigs.insert(p.name.clone(), Sig { nets: nets.clone(), shape: p.shape, init, mode: Some(p.mode) });
        }
        for d in &arch.decls {
            match d {
                Decl::Signal { names, ty, init } => {
                    let Some(shape) = self.shape(ty) else { continue };
                    let init = match init {
                        Some(e) => self.const_init(e, shape),
                        None => None,
                    }
                    .unwrap_or_else(|| vec![LogicValue::X; shape.width()]);
                    for n in names {
                        if scope.sigs.contains_key(&n.name) {
                            self.err(Category::Name, n.span, format!("'{}' is already declared", n.name));
                            continue;
                        }
                        let full = format!("{prefix}{}", n.name);
                        let nets: Vec<NetId> =
                            shape.labels(&full).into_iter().zip(&init).map(|(l, &v)| self.new_net(l, v)).collect();
                        self.signal_map.insert(full, nets.clone());
                        scope.sigs.insert(n.name.clone(), Sig { nets, shape, init: init.clone(), mode: None });
                    }
                }
                Decl::Variable { names, .. } => {
                    self.err(Category::Elaboration, names[0].span, "unsupported construct: variable outside a process")
                }
                Decl::Component { name, ports } => {
                    scope.components.insert(name.name.clone(), ports.as_slice());
                }
                Decl::Unsupported { what, span } => {
                    self.err(Category::Elaboration, *span, format!("unsupported construct: {what}"))
                }
            }
        }
        for s in &arch.stmts {
            match s {
                ConcStmt::Assign { label, target, arms, transport, span } => {
                    let name = self.proc_name(&prefix, label.as_ref(), "assign", *span);
                    let mut c = Compiler::new(self, &scope, name);
                    c.conc_assign(target, arms, *transport);
                    c.finish_conc();
                }
                ConcStmt::Process { label, sensitivity, decls, body, span } => {
                    let name = self.proc_name(&prefix, label.as_ref(), "process", *span);
                    let c = Compiler::new(self, &scope, name);
                    c.process(sensitivity.as_deref(), decls, body, *span);
                }
                ConcStmt::Instance { label, unit, ports, span } => {
                    self.instance(&scope, label, unit, ports, *span, depth);
                }
                ConcStmt::Unsupported { what, span } => {
                    self.err(Category::Elaboration, *span, format!("unsupported construct: {what}"))
                }
            }
        }
    }

    fn proc_name(&self, prefix: &str, label: Option<&Ident>, kind: &str, span: Span) -> String {
        match label {
            Some(l) => format!("{prefix}{}", l.name),
            None => format!("{prefix}{kind}@{}", span.line),
        }
    }

    fn resolve_unit(&mut self, scope: &Scope<'a>, unit: &InstUnit) -> Option<Unit<'a>> {
        let (id, is_component) = match unit {
            InstUnit::Entity(id) => (id, false),
            InstUnit::Component(id) => (id, true),
        };
        if is_component && !scope.components.contains_key(&id.name) {
            let hint = self.hint(&id.name, scope.components.keys().map(String::as_str).collect());
            let hint = if hint.is_empty() {
                format!("; declare it with: component {} port (...); end component;", id.name)
            } else {
                hint
            };
            self.err(Category::Name, id.span, format!("component '{}' is not declared{hint}", id.name));
            return None;
        }
        if let Some(&e) = self.entities.get(&id.name) {
            return match self.archs.get(&id.name) {
                Some(&a) => Some(Unit::Parsed(e, a)),
                None => {
                    self.err(Category::Elaboration, id.span, format!("entity '{}' has no architecture", id.name));
                    None
                }
            };
        }
        if let Some(m) = self.catalog.get(&id.name) {
            return Some(Unit::Native(m.clone()));
        }
        if is_component {
            self.err(Category::Elaboration, id.span, format!("no entity named '{}' to bind the component to", id.name));
        } else {
            let cands: Vec<&str> =
                self.entities.keys().map(String::as_str).chain(self.catalog.keys().map(String::as_str)).collect();
            let hint = self.hint(&id.name, cands);
            self.err(Category::Name, id.span, format!("entity '{}' is not declared{hint}", id.name));
        }
        None
    }

    fn instance(
        &mut self,
        scope: &Scope<'a>,
        label: &Ident,
        unit: &InstUnit,
        assocs: &[PortAssoc],
        span: Span,
        depth: usize,
    ) {
        let Some(unit) = self.resolve_unit(scope, unit) else { return };
        if depth >= MAX_DEPTH {
            self.err(Category::Elaboration, span, format!("instances nest deeper than {MAX_DEPTH} levels (recursive design?)"));
            return;
        }
        let formals: Vec<PortInfo> = match &unit {
            Unit::Parsed(e, _) => self.port_infos(&e.ports).into_iter().map(|(_, p)| p).collect(),
            Unit::Native(m) => m
                .pins
                .iter()
                .map(|p| PortInfo {
                    name: pin_identifier(&p.name),
                    mode: if p.direction == PinDirection::Input { Mode::In } else { Mode::Out },
                    shape: Shape::Scalar,
                    default: None,
                })
                .collect(),
        };
        let inst_prefix = format!("{}{}.", scope.prefix, label.name);
        let mut bound: BTreeMap<String, Vec<NetId>> = BTreeMap::new();
        for a in assocs {
            let Some(f) = formals.iter().find(|f| f.name == a.formal.name) else {
                let hint = self.hint(&a.formal.name, formals.iter().map(|f| f.name.as_str()).collect());
                self.err(Category::Name, a.formal.span, format!("'{}' is not a port of this unit{hint}", a.formal.name));
                continue;
            };
            if bound.contains_key(&f.name) {
                self.err(Category::Name, a.formal.span, format!("port '{}' is associated more than once", f.name));
                continue;
            }
            let Some(actual) = &a.actual else { continue };
            if let Some(nets) = self.actual(scope, f, actual, &inst_prefix) {
                bound.insert(f.name.clone(), nets);
            }
        }
        let native = matches!(unit, Unit::Native(_));
        for f in &formals {
            if !bound.contains_key(&f.name) {
                let init = match &f.default {
                    Some(d) => d.clone(),
                    None if native => vec![LogicValue::Z],
                    None => vec![LogicValue::X; f.shape.width()],
                };
                let nets = f
                    .shape
                    .labels(&format!("{inst_prefix}{}", f.name))
                    .into_iter()
                    .zip(init)
                    .map(|(l, v)| self.new_net(l, v))
                    .collect();
                bound.insert(f.name.clone(), nets);
            }
        }
        match unit {
            Unit::Parsed(e, a) => self.arch(e, a, inst_prefix, bound, depth + 1),
            Unit::Native(model) => {
                let pins: Vec<Option<NetId>> =
                    formals.iter().map(|f| bound.get(&f.name).and_then(|v| v.first().copied())).collect();
                let mut drivers = Vec::new();
                let mut outputs = vec![None; pins.len()];
                let no_params = BTreeMap::new();
                for (i, p) in model.pins.iter().enumerate() {
                    if p.direction == PinDirection::Output {
                        if let Some(n) = pins[i] {
                            outputs[i] = Some(drivers.len());
                            drivers.push((n, model.initial_output(i, &no_params)));
                        }
                    }
                }
                let sensitivity = model.input_pins().filter_map(|(i, _)| pins[i]).collect();
                self.procs.push(ProcessSpec {
                    name: format!("{}{}", scope.prefix, label.name),
                    drivers,
                    sensitivity,
                    kind: ProcessKind::Native {
                        delay_ns: model.delay_ns,
                        state: model.initial_state(&no_params),
                        model,
                        pins,
                        outputs,
                    },
                });
            }
        }
    }

    /// Nets for one port actual: a signal (or slice) aliases its nets, a
    /// constant on an input gets a fresh net with a fixed driver.
    fn actual(&mut self, scope: &Scope<'a>, f: &PortInfo, actual: &Expr, inst_prefix: &str) -> Option<Vec<NetId>> {
        let want = f.shape.ty();
        let mut c = Compiler::new(self, scope, format!("{inst_prefix}{}", f.name));
        if let Some((nets, ty, mode)) = c.signal_ref(actual, false) {
            if ty != want && !(matches!((ty, want), (Ty::Bits(1), Ty::Bit) | (Ty::Bit, Ty::Bits(1)))) {
                self.err(Category::Type, actual.span, format!("port '{}' is {want} but the actual is {ty}", f.name));
                return None;
            }
            if mode == Some(Mode::In) && matches!(f.mode, Mode::Out | Mode::Buffer | Mode::Inout) {
                self.err(
                    Category::Type,
                    actual.span,
                    format!("output port '{}' cannot drive an input port of the enclosing entity", f.name),
                );
                return None;
            }
            return Some(nets);
        }
        if matches!(f.mode, Mode::Out | Mode::Buffer | Mode::Inout) {
            self.err(Category::Type, actual.span, format!("output port '{}' must connect to a signal or open", f.name));
            return None;
        }
        let mut c = Compiler::new(self, scope, format!("{inst_prefix}{}", f.name));
        let (ce, ty) = c.expr(actual, Some(want))?;
        let ce = fold(ce);
        let bits = match (&ce, ty) {
            (CExpr::Lit(v), t) if t == want => v.bits(),
            (CExpr::Lit(Val::Int(k)), Ty::Int) if matches!(want, Ty::Bits(_)) => int_to_bits(*k, f.shape.width()),
            (CExpr::Lit(_), t) => {
                self.err(Category::Type, actual.span, format!("port '{}' is {want} but the actual is {t}", f.name));
                return None;
            }
            _ => {
                self.err(
                    Category::Elaboration,
                    actual.span,
                    "unsupported construct: port actual must be a signal name, a slice or a constant",
                );
                return None;
            }
        };
        let labels = f.shape.labels(&format!("{inst_prefix}{}", f.name));
        let nets: Vec<NetId> = labels.into_iter().map(|l| self.new_net(l, LogicValue::Z)).collect();
        self.procs.push(ProcessSpec {
            name: format!("{inst_prefix}{}", f.name),
            drivers: nets.iter().copied().zip(bits).collect(),
            sensitivity: Vec::new(),
            kind: ProcessKind::Drivers,
        });
        Some(nets)
    }
}

/// Compiles one process (or one concurrent assignment) to instructions.
struct Compiler<'e, 'a, 's> {
    el: &'e mut Elab<'a>,
    scope: &'s Scope<'a>,
    name: String,
    vars: BTreeMap<String, (usize, Shape)>,
    var_init: Vec<Val>,
    drivers: Vec<(NetId, LogicValue)>,
    driver_of: BTreeMap<NetId, usize>,
    code: Vec<Instr>,
    reads: BTreeSet<NetId>,
    waits: Vec<Span>,
    in_sensitivity_process: bool,
}

enum Target {
    Sig(Vec<usize>, Ty),
    Var(usize, Option<Vec<usize>>, Ty),
}

impl<'e, 'a, 's> Compiler<'e, 'a, 's> {
    fn new(el: &'e mut Elab<'a>, scope: &'s Scope<'a>, name: String) -> Self {
        Compiler {
            el,
            scope,
            name,
            vars: BTreeMap::new(),
            var_init: Vec::new(),
            drivers: Vec::new(),
            driver_of: BTreeMap::new(),
            code: Vec::new(),
            reads: BTreeSet::new(),
            waits: Vec::new(),
            in_sensitivity_process: false,
        }
    }

    fn err(&mut self, cat: Category, span: Span, msg: impl Into<String>) {
        self.el.err(cat, span, msg)
    }

    fn visible_names(&self) -> Vec<&str> {
        self.vars.keys().chain(self.scope.sigs.keys()).map(String::as_str).collect()
    }

    fn undeclared(&mut self, name: &str, span: Span) {
        let hint = self.el.hint(name, self.visible_names());
        let hint = if hint.is_empty() {
            format!("; declare it with: signal {name} : std_logic;")
        } else {
            hint
        };
        self.err(Category::Name, span, format!("'{name}' is not declared{hint}"));
    }

    fn static_int(&mut self, e: &Expr) -> Option<i64> {
        let (ce, ty) = self.expr(e, Some(Ty::Int))?;
        match (fold(ce), ty) {
            (CExpr::Lit(Val::Int(k)), _) => Some(k),
            (_, Ty::Int) => {
                self.err(Category::Elaboration, e.span, "unsupported construct: index must be a constant");
                None
            }
            (_, t) => {
                self.err(Category::Type, e.span, format!("index has type {t}, expected integer"));
                None
            }
        }
    }

    /// Positions selected by an index or slice argument of `shape`.
    fn select(&mut self, shape: Shape, name: &str, arg: &Expr) -> Option<(Vec<usize>, bool)> {
        if shape == Shape::Scalar {
            self.err(Category::Type, arg.span, format!("'{name}' is std_logic and cannot be indexed"));
            return None;
        }
        let check = |c: &mut Self, i: i64, span: Span| -> Option<usize> {
            let p = shape.pos(i);
            if p.is_none() {
                c.err(Category::Type, span, format!("index {i} is outside the range of '{name}'"));
            }
            p
        };
        if let ExprKind::Range { left, right, descending } = &arg.kind {
            let l = self.static_int(left)?;
            let r = self.static_int(right)?;
            let (pl, pr) = (check(self, l, left.span)?, check(self, r, right.span)?);
            if let Shape::Vector { desc, .. } = shape {
                if desc != *descending {
                    self.err(Category::Type, arg.span, format!("slice direction does not match the declaration of '{name}'"));
                    return None;
                }
            }
            if pr < pl {
                self.err(Category::Type, arg.span, "null slice");
                return None;
            }
            return Some(((pl..=pr).collect(), false));
        }
        let i = self.static_int(arg)?;
        Some((vec![check(self, i, arg.span)?], true))
    }

    /// Resolves a signal name, index or slice; `None` (without a diagnostic
    /// unless `report`) if the expression is not a signal reference.
    fn signal_ref(&mut self, e: &Expr, report: bool) -> Option<(Vec<NetId>, Ty, Option<Mode>)> {
        match &e.kind {
            ExprKind::Name(n) => {
                if self.vars.contains_key(n) {
                    if report {
                        self.err(Category::Type, e.span, format!("'{n}' is a variable, not a signal"));
                    }
                    return None;
                }
                match self.scope.sigs.get(n) {
                    Some(s) => Some((s.nets.clone(), s.shape.ty(), s.mode)),
                    None => {
                        if report {
                            self.undeclared(n, e.span);
                        }
                        None
                    }
                }
            }
            ExprKind::Call(callee, args) => {
                let ExprKind::Name(n) = &callee.kind else { return None };
                let s = self.scope.sigs.get(n)?.clone();
                if self.vars.contains_key(n) || args.len() != 1 {
                    return None;
                }
                let (pos, single) = self.select(s.shape, n, &args[0])?;
                let nets = pos.iter().map(|&p| s.nets[p]).collect();
                let ty = if single { Ty::Bit } else { Ty::Bits(pos.len()) };
                Some((nets, ty, s.mode))
            }
            _ => {
                if report {
                    self.err(Category::Type, e.span, "expected a signal name");
                }
                None
            }
        }
    }

    fn read_signal(&mut self, nets: Vec<NetId>, ty: Ty) -> CExpr {
        self.reads.extend(&nets);
        match ty {
            Ty::Bit => CExpr::Net(nets[0]),
            _ => CExpr::Nets(nets),
        }
    }

    fn expr(&mut self, e: &Expr, expect: Option<Ty>) -> Option<(CExpr, Ty)> {
        let r = self.expr_inner(e, expect)?;
        Some((fold(r.0), r.1))
    }

    fn expr_inner(&mut self, e: &Expr, expect: Option<Ty>) -> Option<(CExpr, Ty)> {
        match &e.kind {
            ExprKind::Name(n) => {
                if let Some(&(slot, shape)) = self.vars.get(n) {
                    return Some((CExpr::Var(slot), shape.ty()));
                }
                if let Some(s) = self.scope.sigs.get(n) {
                    let (nets, ty) = (s.nets.clone(), s.shape.ty());
                    return Some((self.read_signal(nets, ty), ty));
                }
                match n.as_str() {
                    "true" => Some((CExpr::Lit(Val::Bool(true)), Ty::Bool)),
                    "false" => Some((CExpr::Lit(Val::Bool(false)), Ty::Bool)),
                    _ => {
                        self.undeclared(n, e.span);
                        None
                    }
                }
            }
            ExprKind::Call(callee, args) => self.call(e, callee, args, expect),
            ExprKind::Range { .. } => {
                self.err(Category::Type, e.span, "a range is only allowed as a slice");
                None
            }
            ExprKind::Attr(prefix, attr) => {
                if attr != "event" {
                    self.err(Category::Elaboration, e.span, format!("unsupported construct: attribute '{attr}"));
                    return None;
                }
                let (nets, ty, _) = self.signal_ref(prefix, true)?;
                if ty != Ty::Bit {
                    self.err(Category::Type, e.span, "'event needs a std_logic signal");
                    return None;
                }
                self.reads.insert(nets[0]);
                Some((CExpr::Event(nets[0]), Ty::Bool))
            }
            ExprKind::Char(c) => match char_value(*c) {
                Some(v) => Some((CExpr::Lit(Val::Bit(v)), Ty::Bit)),
                None => {
                    self.err(Category::Type, e.span, format!("'{c}' is not a std_logic value"));
                    None
                }
            },
            ExprKind::Str(s) => {
                let bits: Option<Vec<LogicValue>> = s.chars().map(char_value).collect();
                match bits {
                    Some(b) if !b.is_empty() => {
                        let n = b.len();
                        Some((CExpr::Lit(Val::Bits(b)), Ty::Bits(n)))
                    }
                    _ => {
                        self.err(Category::Type, e.span, format!("\"{s}\" is not a std_logic_vector literal"));
                        None
                    }
                }
            }
            ExprKind::Int(v) => match i64::try_from(*v) {
                Ok(k) => Some((CExpr::Lit(Val::Int(k)), Ty::Int)),
                Err(_) => {
                    self.err(Category::Type, e.span, "integer literal out of range");
                    None
                }
            },
            ExprKind::Others(inner) => {
                let Some(Ty::Bits(n)) = expect else {
                    self.err(Category::Type, e.span, "cannot tell the width of (others => ...) here");
                    return None;
                };
                let (ce, ty) = self.expr(inner, Some(Ty::Bit))?;
                if ty != Ty::Bit {
                    self.err(Category::Type, inner.span, format!("(others => ...) needs a std_logic element, found {ty}"));
                    return None;
                }
                Some((CExpr::Replicate(Box::new(ce), n), Ty::Bits(n)))
            }
            ExprKind::Not(inner) => {
                let (ce, ty) = self.expr(inner, expect)?;
                if ty == Ty::Int {
                    self.err(Category::Type, e.span, "'not' is not defined for integer");
                    return None;
                }
                Some((CExpr::Not(Box::new(ce)), ty))
            }
            ExprKind::Neg(inner) => {
                let (ce, ty) = self.expr(inner, Some(Ty::Int))?;
                if ty != Ty::Int {
                    self.err(Category::Type, e.span, format!("unary minus is not defined for {ty}"));
                    return None;
                }
                Some((CExpr::Neg(Box::new(ce)), Ty::Int))
            }
            ExprKind::Bin(op, l, r) => self.binary(e, *op, l, r, expect),
        }
    }

    fn operands(&mut self, l: &Expr, r: &Expr, expect: Option<Ty>) -> Option<((CExpr, Ty), (CExpr, Ty))> {
        // An aggregate on the left takes its width from the right operand.
        if matches!(l.kind, ExprKind::Others(_)) {
            let rr = self.expr(r, expect);
            let ll = self.expr(l, rr.as_ref().map(|x| x.1).or(expect));
            return Some((ll?, rr?));
        }
        let ll = self.expr(l, expect);
        let rr = self.expr(r, ll.as_ref().map(|x| x.1).or(expect));
        Some((ll?, rr?))
    }

    fn binary(&mut self, e: &Expr, op: BinOp, l: &Expr, r: &Expr, expect: Option<Ty>) -> Option<(CExpr, Ty)> {
        let logic = match op {
            BinOp::And => Some(LogicOp::And),
            BinOp::Or => Some(LogicOp::Or),
            BinOp::Nand => Some(LogicOp::Nand),
            BinOp::Nor => Some(LogicOp::Nor),
            BinOp::Xor => Some(LogicOp::Xor),
            BinOp::Xnor => Some(LogicOp::Xnor),
            _ => None,
        };
        let sub_expect = match op {
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Concat => None,
            _ => expect,
        };
        let ((a, ta), (b, tb)) = self.operands(l, r, sub_expect)?;
        let bx = |x: CExpr| Box::new(x);
        let mismatch = |c: &mut Self| {
            c.err(Category::Type, e.span, format!("operator '{}' is not defined for {ta} and {tb}", op.text()));
            None
        };
        if let Some(lop) = logic {
            return match (ta, tb) {
                (Ty::Bool, Ty::Bool) | (Ty::Bit, Ty::Bit) => Some((CExpr::Logic(lop, bx(a), bx(b)), ta)),
                (Ty::Bits(n), Ty::Bits(m)) if n == m => Some((CExpr::Logic(lop, bx(a), bx(b)), ta)),
                _ => mismatch(self),
            };
        }
        match op {
            BinOp::Eq | BinOp::Ne => {
                let ok = matches!(
                    (ta, tb),
                    (Ty::Bit, Ty::Bit)
                        | (Ty::Bool, Ty::Bool)
                        | (Ty::Int, Ty::Int)
                        | (Ty::Bits(_), Ty::Bits(_))
                        | (Ty::Bits(_), Ty::Int)
                        | (Ty::Int, Ty::Bits(_))
                );
                if !ok {
                    return mismatch(self);
                }
                Some((CExpr::Eq(op == BinOp::Ne, bx(a), bx(b)), Ty::Bool))
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                if !matches!(ta, Ty::Int | Ty::Bits(_)) || !matches!(tb, Ty::Int | Ty::Bits(_)) {
                    return mismatch(self);
                }
                let rop = match op {
                    BinOp::Lt => RelOp::Lt,
                    BinOp::Le => RelOp::Le,
                    BinOp::Gt => RelOp::Gt,
                    _ => RelOp::Ge,
                };
                Some((CExpr::Rel(rop, bx(a), bx(b)), Ty::Bool))
            }
            BinOp::Add | BinOp::Sub => {
                let sub = op == BinOp::Sub;
                match (ta, tb) {
                    (Ty::Int, Ty::Int) => Some((CExpr::AddInt(sub, bx(a), bx(b)), Ty::Int)),
                    (Ty::Bits(n), Ty::Int) | (Ty::Int, Ty::Bits(n)) | (Ty::Bits(n), Ty::Bit) => {
                        Some((CExpr::AddBits(sub, bx(a), bx(b), n), Ty::Bits(n)))
                    }
                    (Ty::Bits(n), Ty::Bits(m)) => {
                        let w = n.max(m);
                        Some((CExpr::AddBits(sub, bx(a), bx(b), w), Ty::Bits(w)))
                    }
                    _ => mismatch(self),
                }
            }
            BinOp::Concat => {
                let w = |t: Ty| match t {
                    Ty::Bit => Some(1),
                    Ty::Bits(n) => Some(n),
                    _ => None,
                };
                match (w(ta), w(tb)) {
                    (Some(x), Some(y)) => {
                        let mut parts = Vec::new();
                        for p in [a, b] {
                            match p {
                                CExpr::Concat(v) => parts.extend(v),
                                other => parts.push(other),
                            }
                        }
                        Some((CExpr::Concat(parts), Ty::Bits(x + y)))
                    }
                    _ => mismatch(self),
                }
            }
            _ => unreachable!("logic operators handled above"),
        }
    }

    fn call(&mut self, e: &Expr, callee: &Expr, args: &[Expr], expect: Option<Ty>) -> Option<(CExpr, Ty)> {
        let ExprKind::Name(n) = &callee.kind else {
            self.err(Category::Elaboration, e.span, "unsupported construct: call of a non-name");
            return None;
        };
        if let Some(&(slot, shape)) = self.vars.get(n) {
            if args.len() != 1 {
                self.err(Category::Type, e.span, format!("'{n}' takes one index"));
                return None;
            }
            let (pos, single) = self.select(shape, n, &args[0])?;
            let ty = if single { Ty::Bit } else { Ty::Bits(pos.len()) };
            return Some((CExpr::VarBits(slot, pos, single), ty));
        }
        if self.scope.sigs.contains_key(n) {
            let (nets, ty, _) = self.signal_ref(e, true)?;
            return Some((self.read_signal(nets, ty), ty));
        }
        let arity = |c: &mut Self, k: usize| {
            if args.len() != k {
                c.err(Category::Type, e.span, format!("'{n}' takes {k} argument(s), found {}", args.len()));
                false
            } else {
                true
            }
        };
        match n.as_str() {
            "rising_edge" | "falling_edge" => {
                if !arity(self, 1) {
                    return None;
                }
                let (nets, ty, _) = self.signal_ref(&args[0], true)?;
                if ty != Ty::Bit {
                    self.err(Category::Type, args[0].span, format!("{n} needs a std_logic signal, found {ty}"));
                    return None;
                }
                self.reads.insert(nets[0]);
                Some((CExpr::Edge(nets[0], n == "rising_edge"), Ty::Bool))
            }
            "unsigned" | "std_logic_vector" | "std_ulogic_vector" => {
                if !arity(self, 1) {
                    return None;
                }
                let (ce, ty) = self.expr(&args[0], expect)?;
                match ty {
                    Ty::Bits(_) => Some((ce, ty)),
                    _ => {
                        self.err(Category::Type, args[0].span, format!("{n}() needs a vector, found {ty}"));
                        None
                    }
                }
            }
            "to_unsigned" => {
                if !arity(self, 2) {
                    return None;
                }
                let (ce, ty) = self.expr(&args[0], Some(Ty::Int))?;
                if ty != Ty::Int {
                    self.err(Category::Type, args[0].span, format!("to_unsigned needs an integer, found {ty}"));
                    return None;
                }
                let w = self.static_int(&args[1])?;
                if !(1..=MAX_WIDTH).contains(&w) {
                    self.err(Category::Type, args[1].span, format!("width {w} is out of range"));
                    return None;
                }
                Some((CExpr::IntToBits(Box::new(ce), w as usize), Ty::Bits(w as usize)))
            }
            "to_integer" => {
                if !arity(self, 1) {
                    return None;
                }
                let (ce, ty) = self.expr(&args[0], None)?;
                if !matches!(ty, Ty::Bits(_)) {
                    self.err(Category::Type, args[0].span, format!("to_integer needs a vector, found {ty}"));
                    return None;
                }
                Some((CExpr::BitsToInt(Box::new(ce)), Ty::Int))
            }
            _ => {
                self.undeclared(n, callee.span);
                None
            }
        }
    }

    fn driver(&mut self, net: NetId, init: LogicValue) -> usize {
        if let Some(&d) = self.driver_of.get(&net) {
            return d;
        }
        self.drivers.push((net, init));
        self.driver_of.insert(net, self.drivers.len() - 1);
        self.drivers.len() - 1
    }

    fn target(&mut self, e: &Expr, signal: bool) -> Option<Target> {
        let (name, arg) = match &e.kind {
            ExprKind::Name(n) => (n, None),
            ExprKind::Call(c, args) if args.len() == 1 => match &c.kind {
                ExprKind::Name(n) => (n, Some(&args[0])),
                _ => {
                    self.err(Category::Type, e.span, "invalid assignment target");
                    return None;
                }
            },
            _ => {
                self.err(Category::Type, e.span, "invalid assignment target");
                return None;
            }
        };
        if let Some(&(slot, shape)) = self.vars.get(name) {
            if signal {
                self.err(Category::Type, e.span, format!("'{name}' is a variable; assign it with ':='"));
                return None;
            }
            return Some(match arg {
                None => Target::Var(slot, None, shape.ty()),
                Some(a) => {
                    let (pos, single) = self.select(shape, name, a)?;
                    let ty = if single { Ty::Bit } else { Ty::Bits(pos.len()) };
                    Target::Var(slot, Some(pos), ty)
                }
            });
        }
        let Some(s) = self.scope.sigs.get(name).cloned() else {
            self.undeclared(name, e.span);
            return None;
        };
        if !signal {
            self.err(Category::Type, e.span, format!("'{name}' is a signal; assign it with '<='"));
            return None;
        }
        if s.mode == Some(Mode::In) {
            self.err(Category::Type, e.span, format!("cannot assign to input port '{name}'"));
            return None;
        }
        let (pos, ty) = match arg {
            None => ((0..s.nets.len()).collect::<Vec<_>>(), s.shape.ty()),
            Some(a) => {
                let (pos, single) = self.select(s.shape, name, a)?;
                let ty = if single { Ty::Bit } else { Ty::Bits(pos.len()) };
                (pos, ty)
            }
        };
        let drivers = pos.iter().map(|&p| self.driver(s.nets[p], s.init[p])).collect();
        Some(Target::Sig(drivers, ty))
    }

    /// Checks that a value of type `got` may be assigned to `want`.
    fn assignable(&mut self, span: Span, want: Ty, got: Ty, value: CExpr) -> Option<CExpr> {
        match (want, got) {
            _ if want == got => Some(value),
            (Ty::Bits(n), Ty::Int) => Some(CExpr::IntToBits(Box::new(value), n)),
            (Ty::Bits(n), Ty::Bits(m)) => {
                self.err(Category::Type, span, format!("width mismatch: target has {n} bits, value has {m}"));
                None
            }
            _ => {
                self.err(Category::Type, span, format!("cannot assign {got} to a target of type {want}"));
                None
            }
        }
    }

    fn time_ns(&mut self, t: &TimeLit) -> Option<u64> {
        if t.fs == u128::MAX || t.fs % FS_PER_NS != 0 || t.fs / FS_PER_NS > u64::MAX as u128 {
            self.err(Category::Elaboration, t.span, "time must be a whole number of nanoseconds");
            return None;
        }
        Some((t.fs / FS_PER_NS) as u64)
    }

    fn waveform(&mut self, want: Ty, w: &Waveform) -> Option<Vec<(CExpr, u64)>> {
        let mut out = Vec::new();
        let mut last: Option<u64> = None;
        for el in &w.elems {
            let (ce, ty) = self.expr(&el.value, Some(want))?;
            let ce = self.assignable(el.value.span, want, ty, ce)?;
            let delay = match &el.after {
                Some(t) => self.time_ns(t)?,
                None => 0,
            };
            if last.is_some_and(|l| delay <= l) {
                let span = el.after.map_or(el.value.span, |t| t.span);
                self.err(Category::Elaboration, span, "waveform times must increase");
                return None;
            }
            last = Some(delay);
            out.push((ce, delay));
        }
        Some(out)
    }

    fn sig_assign(&mut self, target: &Expr, w: &Waveform) {
        let Some(t) = self.target(target, true) else { return };
        let Target::Sig(targets, ty) = t else { unreachable!("signal targets only") };
        if let Some(wave) = self.waveform(ty, w) {
            self.code.push(Instr::Sig { targets, wave, transport: w.transport });
        }
    }

    fn condition(&mut self, e: &Expr) -> Option<CExpr> {
        let (ce, ty) = self.expr(e, Some(Ty::Bool))?;
        match ty {
            Ty::Bool => Some(ce),
            Ty::Bit => Some(CExpr::Cond(Box::new(ce))),
            t => {
                self.err(Category::Type, e.span, format!("condition has type {t}, expected boolean"));
                None
            }
        }
    }

    fn conc_assign(&mut self, target: &Expr, arms: &[(Waveform, Option<Expr>)], _transport: bool) {
        let mut exits = Vec::new();
        for (w, cond) in arms {
            match cond {
                Some(c) => {
                    let c = self.condition(c).unwrap_or(CExpr::Lit(Val::Bool(false)));
                    let at = self.code.len();
                    self.code.push(Instr::JumpIfNot(c, 0));
                    self.sig_assign(target, w);
                    exits.push(self.code.len());
                    self.code.push(Instr::Jump(0));
                    let next = self.code.len();
                    self.code[at] = Instr::JumpIfNot(self.cond_of(at), next);
                }
                None => self.sig_assign(target, w),
            }
        }
        let end = self.code.len();
        for x in exits {
            self.code[x] = Instr::Jump(end);
        }
    }

    fn cond_of(&self, at: usize) -> CExpr {
        match &self.code[at] {
            Instr::JumpIfNot(c, _) => c.clone(),
            _ => unreachable!("patched instruction is a conditional jump"),
        }
    }

    /// Concurrent assignment: runs once at start, then on every read signal.
    fn finish_conc(mut self) {
        let sens: Vec<NetId> = self.reads.iter().copied().collect();
        self.code.push(Instr::Wait { on: sens.clone(), until: None, timeout: None });
        self.code.push(Instr::Jump(0));
        self.push(sens);
    }

    fn push(self, sensitivity: Vec<NetId>) {
        let prog = Program { code: self.code, var_init: self.var_init };
        self.el.procs.push(ProcessSpec {
            name: self.name,
            drivers: self.drivers,
            sensitivity,
            kind: ProcessKind::Program(Arc::new(prog)),
        });
    }

    fn process(mut self, sensitivity: Option<&[Expr]>, decls: &[Decl], body: &[SeqStmt], span: Span) {
        for d in decls {
            match d {
                Decl::Variable { names, ty, init } => {
                    let Some(shape) = self.el.shape(ty) else { continue };
                    let bits = match init {
                        Some(e) => self.el.const_init(e, shape),
                        None => None,
                    }
                    .unwrap_or_else(|| vec![LogicValue::X; shape.width()]);
                    let v = if shape == Shape::Scalar { Val::Bit(bits[0]) } else { Val::Bits(bits) };
                    for n in names {
                        if self.vars.contains_key(&n.name) {
                            self.err(Category::Name, n.span, format!("'{}' is already declared", n.name));
                            continue;
                        }
                        self.vars.insert(n.name.clone(), (self.var_init.len(), shape));
                        self.var_init.push(v.clone());
                    }
                }
                Decl::Signal { names, .. } => {
                    self.err(Category::Type, names[0].span, "signals cannot be declared inside a process")
                }
                Decl::Component { name, .. } => {
                    self.err(Category::Type, name.span, "components cannot be declared inside a process")
                }
                Decl::Unsupported { what, span } => {
                    self.err(Category::Elaboration, *span, format!("unsupported construct: {what}"))
                }
            }
        }
        let mut sens = Vec::new();
        let mut all = false;
        if let Some(list) = sensitivity {
            self.in_sensitivity_process = true;
            for e in list {
                if matches!(&e.kind, ExprKind::Name(n) if n == "all") {
                    all = true;
                    continue;
                }
                if let Some((nets, _, _)) = self.signal_ref(e, true) {
                    sens.extend(nets);
                }
            }
        }
        self.stmts(body);
        if all {
            sens.extend(self.reads.iter().copied());
        }
        if sensitivity.is_some() {
            sens.sort_unstable();
            sens.dedup();
            self.code.push(Instr::Wait { on: sens.clone(), until: None, timeout: None });
        } else if self.waits.is_empty() {
            self.err(
                Category::Elaboration,
                span,
                "process has neither a sensitivity list nor a wait statement and would never suspend",
            );
            return;
        }
        self.code.push(Instr::Jump(0));
        let mut wake: BTreeSet<NetId> = sens.into_iter().collect();
        for i in &self.code {
            if let Instr::Wait { on, .. } = i {
                wake.extend(on);
            }
        }
        self.push(wake.into_iter().collect());
    }

    fn stmts(&mut self, body: &[SeqStmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &SeqStmt) {
        match s {
            SeqStmt::SigAssign { target, wave, .. } => self.sig_assign(target, wave),
            SeqStmt::VarAssign { target, value, .. } => {
                let Some(Target::Var(slot, bits, ty)) = self.target(target, false) else { return };
                let Some((ce, got)) = self.expr(value, Some(ty)) else { return };
                if let Some(ce) = self.assignable(value.span, ty, got, ce) {
                    self.code.push(Instr::Var { slot, bits, value: ce });
                }
            }
            SeqStmt::If { branches, otherwise, .. } => {
                let mut exits = Vec::new();
                for (cond, body) in branches {
                    let c = self.condition(cond).unwrap_or(CExpr::Lit(Val::Bool(false)));
                    let at = self.code.len();
                    self.code.push(Instr::JumpIfNot(c, 0));
                    self.stmts(body);
                    exits.push(self.code.len());
                    self.code.push(Instr::Jump(0));
                    let next = self.code.len();
                    let c = self.cond_of(at);
                    self.code[at] = Instr::JumpIfNot(c, next);
                }
                if let Some(body) = otherwise {
                    self.stmts(body);
                }
                let end = self.code.len();
                for x in exits {
                    self.code[x] = Instr::Jump(end);
                }
            }
            SeqStmt::Case { selector, arms, .. } => {
                let Some((sel, ty)) = self.expr(selector, None) else { return };
                let at = self.code.len();
                self.code.push(Instr::Jump(0));
                let mut table = Vec::new();
                let mut default = None;
                let mut exits = Vec::new();
                let mut seen: Vec<Val> = Vec::new();
                for (choices, body) in arms {
                    let start = self.code.len();
                    let mut vals = Vec::new();
                    for c in choices {
                        match c {
                            Choice::Others(_) => default = Some(start),
                            Choice::Expr(e) => {
                                let Some((ce, t)) = self.expr(e, Some(ty)) else { continue };
                                match ce {
                                    CExpr::Lit(v) if t == ty || (t == Ty::Int && matches!(ty, Ty::Bits(_))) => {
                                        if seen.contains(&v) {
                                            self.err(Category::Type, e.span, "duplicate case choice");
                                        }
                                        seen.push(v.clone());
                                        vals.push(v);
                                    }
                                    CExpr::Lit(_) => self.err(
                                        Category::Type,
                                        e.span,
                                        format!("choice has type {t}, selector has type {ty}"),
                                    ),
                                    _ => self.err(Category::Type, e.span, "case choice must be a constant"),
                                }
                            }
                        }
                    }
                    table.push((vals, start));
                    self.stmts(body);
                    exits.push(self.code.len());
                    self.code.push(Instr::Jump(0));
                }
                let end = self.code.len();
                for x in exits {
                    self.code[x] = Instr::Jump(end);
                }
                self.code[at] = Instr::Case { sel, arms: table, default: default.unwrap_or(end) };
            }
            SeqStmt::Wait { on, until, timeout, span } => {
                if self.in_sensitivity_process {
                    self.err(Category::Elaboration, *span, "a process with a sensitivity list cannot contain wait");
                    return;
                }
                self.waits.push(*span);
                let mut nets = Vec::new();
                for e in on {
                    if let Some((n, _, _)) = self.signal_ref(e, true) {
                        nets.extend(n);
                    }
                }
                let until = match until {
                    Some(c) => {
                        let before = std::mem::take(&mut self.reads);
                        let ce = self.condition(c);
                        let read = std::mem::replace(&mut self.reads, before);
                        if on.is_empty() {
                            nets.extend(read.iter().copied());
                        }
                        self.reads.extend(read);
                        match ce {
                            Some(ce) => Some(ce),
                            None => return,
                        }
                    }
                    None => None,
                };
                let timeout = match timeout {
                    Some(t) => match self.time_ns(t) {
                        Some(v) => Some(v),
                        None => return,
                    },
                    None => None,
                };
                nets.sort_unstable();
                nets.dedup();
                self.code.push(Instr::Wait { on: nets, until, timeout });
            }
            SeqStmt::Loop { cond, body, .. } => {
                let top = self.code.len();
                let guard = cond.as_ref().map(|c| {
                    let c = self.condition(c).unwrap_or(CExpr::Lit(Val::Bool(false)));
                    self.code.push(Instr::JumpIfNot(c, 0));
                    top
                });
                self.stmts(body);
                self.code.push(Instr::Jump(top));
                if let Some(at) = guard {
                    let end = self.code.len();
                    let c = self.cond_of(at);
                    self.code[at] = Instr::JumpIfNot(c, end);
                }
            }
            SeqStmt::Null(_) => {}
            SeqStmt::Unsupported { what, span } => {
                self.err(Category::Elaboration, *span, format!("unsupported construct: {what}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimConfig;
    use crate::stimulus::{SignalSpec, StimulusSet};
    use crate::vhdl::{parse_vhdl, simulate_vhdl, VhdlUnit};
    use LogicValue::*;

    fn build(src: &str, top: &str) -> (Option<ElaboratedDesign>, Vec<Diagnostic>) {
        let (ast, d) = parse_vhdl(&[VhdlUnit::new("d.vhd", src)]);
        assert!(d.is_empty(), "{d:?}");
        elaborate(&ast, top, &ComponentRegistry::builtin())
    }

    const NAND: &str = "library ieee; use ieee.std_logic_1164.all;
entity nand_gate is port (a, b : in std_logic; y : out std_logic); end;
architecture rtl of nand_gate is begin
  y <= a nand b;
end;";

    #[test]
    fn nand_assignment_is_one_process() {
        let (d, diags) = build(NAND, "nand_gate");
        assert!(diags.is_empty(), "{diags:?}");
        let d = d.unwrap();
        assert_eq!(d.processes.len(), 1);
        let stim = StimulusSet::new(100).with("a", SignalSpec::constant(One)).with("b", SignalSpec::constant(One));
        let run = simulate_vhdl(&d, &stim, &SimConfig::new(100)).unwrap();
        assert_eq!(run.trace.sample("y", 1).unwrap(), Zero);
    }

    #[test]
    fn undeclared_signal_gets_hint() {
        let src = NAND.replace("y <= a nand b;", "y <= a nand bb;");
        let (d, diags) = build(&src, "nand_gate");
        assert!(d.is_none());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].category, Category::Name);
        assert!(diags[0].message.contains("did you mean 'b'"), "{}", diags[0].message);
        assert_eq!(&src[diags[0].offset..diags[0].offset + diags[0].length], "bb");
        let src = NAND.replace("y <= a nand b;", "y <= a nand carry;");
        let (_, diags) = build(&src, "nand_gate");
        assert!(diags[0].message.contains("signal carry : std_logic"), "{}", diags[0].message);
    }

    #[test]
    fn type_errors() {
        let src = "entity e is port (a : in std_logic; v : out std_logic_vector(3 downto 0)); end;
architecture r of e is begin
  v <= \"101\";
  a <= '1';
end;";
        let (_, diags) = build(src, "e");
        let cats: Vec<Category> = diags.iter().map(|d| d.category).collect();
        assert_eq!(cats, vec![Category::Type, Category::Type], "{diags:?}");
        assert!(diags[0].message.contains("width mismatch"));
        assert!(diags[1].message.contains("input port"));
    }

    #[test]
    fn unsupported_constructs_are_elaboration_errors() {
        let src = "entity e is generic (n : integer := 2); port (a : in std_logic); end;
architecture r of e is
  constant k : integer := 3;
  function f return std_logic is begin return '0'; end function;
begin
  g : for i in 0 to 3 generate end generate;
end;";
        let (ast, pd) = parse_vhdl(&[VhdlUnit::new("d.vhd", src)]);
        assert!(pd.is_empty(), "{pd:?}");
        let (_, diags) = elaborate(&ast, "e", &ComponentRegistry::builtin());
        assert_eq!(diags.len(), 4, "{diags:?}");
        assert!(diags.iter().all(|d| d.category == Category::Elaboration && d.message.contains("unsupported")));
    }

    #[test]
    fn catalog_parts_bind_by_entity_name() {
        let src = "entity t is port (a, b : in std_logic; y : out std_logic); end;
architecture s of t is begin
  u1 : entity work.ttl_74ls00 port map (a_1 => a, b_1 => b, y_1 => y);
end;";
        let (d, diags) = build(src, "t");
        assert!(diags.is_empty(), "{diags:?}");
        let stim = StimulusSet::new(100).with("a", SignalSpec::constant(One)).with("b", SignalSpec::constant(Zero));
        let run = simulate_vhdl(&d.unwrap(), &stim, &SimConfig::new(100)).unwrap();
        assert_eq!(run.trace.signal("y").unwrap().changes, vec![(0, X), (10, One)]);
    }

    #[test]
    fn wait_for_clock_generator() {
        let src = "entity tb is end;
architecture a of tb is signal clk : std_logic := '0'; signal n : std_logic_vector(1 downto 0) := \"00\"; begin
  process begin wait for 5 ns; clk <= not clk; end process;
  process (clk) begin if rising_edge(clk) then n <= n + 1; end if; end process;
end;";
        let (d, diags) = build(src, "tb");
        assert!(diags.is_empty(), "{diags:?}");
        let run = simulate_vhdl(&d.unwrap(), &StimulusSet::new(50), &SimConfig::new(50)).unwrap();
        let clk = &run.trace.signal("clk").unwrap().changes;
        assert_eq!(clk[..3], [(0, Zero), (5, One), (10, Zero)]);
        assert_eq!(run.trace.sample("n(0)", 6).unwrap(), One);
        assert_eq!(run.trace.sample("n(1)", 16).unwrap(), One);
        assert_eq!(run.trace.sample("n(0)", 26).unwrap(), One);
        assert_eq!(run.trace.sample("n(1)", 36).unwrap(), Zero);
    }

    #[test]
    fn wait_until_and_case() {
        let src = "entity tb is end;
architecture a of tb is
  signal go : std_logic := '0';
  signal s : std_logic_vector(1 downto 0) := \"00\";
  signal y : std_logic;
begin
  process begin go <= '1' after 7 ns; wait; end process;
  process begin
    wait until go = '1';
    s <= \"10\";
    wait;
  end process;
  process (s) begin
    case s is
      when \"00\" => y <= '0';
      when \"10\" | \"11\" => y <= '1';
      when others => y <= 'X';
    end case;
  end process;
end;";
        let (d, diags) = build(src, "tb");
        assert!(diags.is_empty(), "{diags:?}");
        let run = simulate_vhdl(&d.unwrap(), &StimulusSet::new(20), &SimConfig::new(20)).unwrap();
        assert_eq!(run.trace.signal("y").unwrap().changes, vec![(0, Zero), (7, One)]);
    }

    #[test]
    fn runaway_process_is_stopped() {
        let src = "entity tb is end;
architecture a of tb is signal s : std_logic; begin
  process begin loop s <= '1'; end loop; wait; end process;
end;";
        let (d, diags) = build(src, "tb");
        assert!(diags.is_empty(), "{diags:?}");
        let run = simulate_vhdl(&d.unwrap(), &StimulusSet::new(20), &SimConfig::new(20)).unwrap();
        assert!(run.log.has("MODEL_ERROR"));
    }

    #[test]
    fn hierarchy_and_labels() {
        let src = "entity inv is port (a : in std_logic; y : out std_logic); end;
architecture r of inv is signal t : std_logic; begin t <= not a; y <= t; end;
entity top is port (a : in std_logic; y : out std_logic); end;
architecture r of top is
  signal m : std_logic;
  component inv port (a : in std_logic; y : out std_logic); end component;
begin
  u1 : inv port map (a => a, y => m);
  u2 : entity work.inv port map (a => m, y => y);
end;";
        let (d, diags) = build(src, "top");
        assert!(diags.is_empty(), "{diags:?}");
        let d = d.unwrap();
        assert!(d.signal_map.contains_key("u1.t"));
        let stim = StimulusSet::new(10).with("a", SignalSpec::constant(One));
        let run = simulate_vhdl(&d, &stim, &SimConfig::new(10)).unwrap();
        assert_eq!(run.trace.sample("y", 0).unwrap(), One);
        assert_eq!(run.trace.sample("u1.t", 0).unwrap(), Zero);
    }

    #[test]
    fn missing_top_and_component() {
        let (d, diags) = build(NAND, "nand_gat");
        assert!(d.is_none());
        assert!(diags[0].message.contains("did you mean 'nand_gate'"));
        let src = "entity t is port (a : in std_logic); end;
architecture s of t is begin u1 : widget port map (x => a); end;";
        let (_, diags) = build(src, "t");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].category, Category::Name);
    }
}
