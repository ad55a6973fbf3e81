//! Discrete-event scheduler shared by netlist and VHDL simulation.
//!
//! A [`Network`] is a set of nets, drivers attached to nets and processes.
//! Processes never write nets directly: they schedule transactions on their
//! drivers, and each net's value is the resolution of all its drivers.
//! Every instant is split into delta cycles; a zero-delay transaction lands
//! in the next delta of the same instant.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use crate::logic::{resolve_all, LogicValue};

use super::trace::{LogLevel, SimFault, SimLog};

pub type NetId = usize;
pub type DriverId = usize;
pub type ProcId = usize;

/// A point in simulated time: nanoseconds plus delta-cycle rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Instant {
    pub time_ns: u64,
    pub delta: u32,
}

impl Instant {
    /// The instant a transaction scheduled now with `delay_ns` takes effect.
    fn after(self, delay_ns: u64) -> Instant {
        if delay_ns == 0 {
            Instant { time_ns: self.time_ns, delta: self.delta + 1 }
        } else {
            Instant { time_ns: self.time_ns + delay_ns, delta: 0 }
        }
    }
}

/// Behavior attached to the network. `run` is called once during
/// initialization and afterwards whenever a net in the process's
/// sensitivity set has an event or its timer expires.
pub trait Process: Send {
    fn run(&mut self, ctx: &mut Ctx<'_>);
}

struct NetDecl {
    name: String,
    init: LogicValue,
    drivers: Vec<DriverId>,
    fanout: Vec<ProcId>,
}

struct DriverDecl {
    net: NetId,
    init: LogicValue,
}

/// Static description of what is simulated.
#[derive(Default)]
pub struct Network {
    nets: Vec<NetDecl>,
    drivers: Vec<DriverDecl>,
    procs: Vec<Box<dyn Process>>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    /// `init` is the value the net shows while it has no drivers.
    pub fn add_net(&mut self, name: impl Into<String>, init: LogicValue) -> NetId {
        self.nets.push(NetDecl { name: name.into(), init, drivers: Vec::new(), fanout: Vec::new() });
        self.nets.len() - 1
    }

    pub fn add_driver(&mut self, net: NetId, init: LogicValue) -> DriverId {
        self.drivers.push(DriverDecl { net, init });
        self.nets[net].drivers.push(self.drivers.len() - 1);
        self.drivers.len() - 1
    }

    pub fn add_process(&mut self, process: Box<dyn Process>, sensitivity: &[NetId]) -> ProcId {
        let id = self.procs.len();
        self.procs.push(process);
        let mut seen = BTreeSet::new();
        for &n in sensitivity {
            if seen.insert(n) {
                self.nets[n].fanout.push(id);
            }
        }
        id
    }

    pub fn net_count(&self) -> usize {
        self.nets.len()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.nets[net].name
    }

    pub fn driver_count(&self, net: NetId) -> usize {
        self.nets[net].drivers.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Payload {
    Transaction { driver: DriverId, value: LogicValue },
    Timer { proc: ProcId, token: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    at: Instant,
    seq: u64,
}

struct NetState {
    value: LogicValue,
    last_value: LogicValue,
    event_at: Option<Instant>,
}

struct DriverState {
    value: LogicValue,
    /// Pending transactions in ascending time order: (when, seq, value).
    pending: VecDeque<(Instant, u64, LogicValue)>,
}

struct State {
    net_state: Vec<NetState>,
    driver_state: Vec<DriverState>,
    timers: Vec<Option<u64>>,
    queue: BinaryHeap<Reverse<(Key, PayloadOrd)>>,
    seq: u64,
    now: Instant,
    log: SimLog,
}

/// Heap payload wrapper; ordering is fully decided by `Key`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PayloadOrd(Payload);

impl PartialOrd for PayloadOrd {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PayloadOrd {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}

impl State {
    fn push(&mut self, at: Instant, payload: Payload) -> u64 {
        self.seq += 1;
        self.queue.push(Reverse((Key { at, seq: self.seq }, PayloadOrd(payload))));
        self.seq
    }
}

/// How a new transaction treats earlier pending ones on the same driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMode {
    /// Only transactions at or after the new one are dropped.
    Transport,
    /// Additionally, pending transactions before the new one are dropped
    /// unless they already carry the new value (pulse rejection).
    Inertial,
}

/// A process's view of the simulation while it runs.
pub struct Ctx<'a> {
    state: &'a mut State,
    proc: ProcId,
    timer_fired: bool,
    init: bool,
}

impl Ctx<'_> {
    pub fn now(&self) -> Instant {
        self.state.now
    }

    pub fn is_init(&self) -> bool {
        self.init
    }

    /// True when the run was triggered by this process's timer.
    pub fn timer_fired(&self) -> bool {
        self.timer_fired
    }

    pub fn value(&self, net: NetId) -> LogicValue {
        self.state.net_state[net].value
    }

    /// The net changed in the current delta cycle.
    pub fn event(&self, net: NetId) -> bool {
        self.state.net_state[net].event_at == Some(self.state.now)
    }

    /// The value the net had before its most recent change.
    pub fn last_value(&self, net: NetId) -> LogicValue {
        self.state.net_state[net].last_value
    }

    pub fn drive(&mut self, driver: DriverId, value: LogicValue, delay_ns: u64) {
        self.drive_with(driver, value, delay_ns, DelayMode::Transport)
    }

    pub fn drive_with(&mut self, driver: DriverId, value: LogicValue, delay_ns: u64, mode: DelayMode) {
        let at = self.state.now.after(delay_ns);
        let d = &mut self.state.driver_state[driver];
        while d.pending.back().is_some_and(|(t, _, _)| *t >= at) {
            d.pending.pop_back();
        }
        if mode == DelayMode::Inertial {
            let keep = d.pending.iter().rev().take_while(|(_, _, v)| *v == value).count();
            let drop = d.pending.len() - keep;
            d.pending.drain(..drop);
        }
        let seq = self.state.push(at, Payload::Transaction { driver, value });
        self.state.driver_state[driver].pending.push_back((at, seq, value));
    }

    /// Runs this process again after `delay_ns`, replacing any pending timer.
    pub fn wake_after(&mut self, delay_ns: u64) {
        let at = self.state.now.after(delay_ns);
        let token = self.state.seq + 1;
        self.state.timers[self.proc] = Some(token);
        self.state.push(at, Payload::Timer { proc: self.proc, token });
    }

    pub fn cancel_timer(&mut self) {
        self.state.timers[self.proc] = None;
    }

    pub fn log(&mut self, level: LogLevel, code: &str, message: impl Into<String>) {
        let t = self.state.now.time_ns;
        self.state.log.push(level, t, code, message);
    }
}

/// Which nets are recorded and how they are labelled.
pub struct Watch {
    pub nets: Vec<NetId>,
}

pub struct KernelOutput {
    /// Change list per watched net, in `Watch::nets` order.
    pub changes: Vec<Vec<(u64, LogicValue)>>,
    pub log: SimLog,
    pub fault: Option<SimFault>,
    /// Largest number of delta cycles seen in one instant.
    pub max_delta: u32,
}

pub struct KernelConfig {
    pub horizon_ns: u64,
    pub max_deltas_per_instant: u32,
}

/// Runs the network from time 0 until the first instant at or after
/// `horizon_ns`, or until a fault.
pub fn run(mut network: Network, watch: &Watch, cfg: &KernelConfig) -> KernelOutput {
    let nets = std::mem::take(&mut network.nets);
    let mut procs = std::mem::take(&mut network.procs);
    let driver_state: Vec<DriverState> =
        network.drivers.iter().map(|d| DriverState { value: d.init, pending: VecDeque::new() }).collect();
    let net_state: Vec<NetState> = nets
        .iter()
        .map(|n| {
            let v = if n.drivers.is_empty() {
                n.init
            } else {
                resolve_all(n.drivers.iter().map(|&d| driver_state[d].value))
            };
            NetState { value: v, last_value: v, event_at: None }
        })
        .collect();
    let mut slot_of = vec![None; nets.len()];
    for (i, &n) in watch.nets.iter().enumerate() {
        slot_of[n].get_or_insert(i);
    }
    let mut changes: Vec<Vec<(u64, LogicValue)>> =
        watch.nets.iter().map(|&n| vec![(0, net_state[n].value)]).collect();
    let watched: Vec<bool> = (0..nets.len()).map(|n| slot_of[n].is_some()).collect();
    let mut x_reported = vec![false; nets.len()];
    let mut in_conflict = vec![false; nets.len()];

    let mut state = State {
        net_state,
        driver_state,
        timers: vec![None; procs.len()],
        queue: BinaryHeap::new(),
        seq: 0,
        now: Instant::default(),
        log: SimLog::default(),
    };

    for (i, p) in procs.iter_mut().enumerate() {
        run_proc(p.as_mut(), &mut state, i, false, true);
    }

    let mut fault = None;
    let mut max_delta = 0;
    let mut to_run: BTreeSet<ProcId> = BTreeSet::new();
    let mut timer_runs: BTreeSet<ProcId> = BTreeSet::new();
    let mut dirty: BTreeSet<NetId> = BTreeSet::new();
    let mut changed_last: Vec<NetId> = Vec::new();

    while let Some(Reverse((key, _))) = state.queue.peek() {
        let at = key.at;
        if at.time_ns >= cfg.horizon_ns {
            break;
        }
        if at.delta > cfg.max_deltas_per_instant {
            let names: Vec<String> = changed_last.iter().map(|&n| nets[n].name.clone()).collect();
            let f = SimFault::oscillation(at.time_ns, cfg.max_deltas_per_instant, names);
            state.log.push(LogLevel::Error, at.time_ns, "OSCILLATION", f.message.clone());
            fault = Some(f);
            break;
        }
        state.now = at;
        max_delta = max_delta.max(at.delta);

        while let Some(Reverse((k, p))) = state.queue.peek().copied() {
            if k.at != at {
                break;
            }
            state.queue.pop();
            match p.0 {
                Payload::Transaction { driver, value } => {
                    let d = &mut state.driver_state[driver];
                    if d.pending.front().is_some_and(|(_, s, _)| *s == k.seq) {
                        d.pending.pop_front();
                        if d.value != value {
                            d.value = value;
                            dirty.insert(network.drivers[driver].net);
                        }
                    }
                }
                Payload::Timer { proc, token } => {
                    if state.timers[proc] == Some(token) {
                        state.timers[proc] = None;
                        timer_runs.insert(proc);
                        to_run.insert(proc);
                    }
                }
            }
        }

        changed_last.clear();
        for net in std::mem::take(&mut dirty) {
            let decl = &nets[net];
            let values = decl.drivers.iter().map(|&d| state.driver_state[d].value);
            let v = resolve_all(values.clone());
            let conflict = v == LogicValue::X
                && values.clone().any(|x| x == LogicValue::Zero)
                && values.clone().any(|x| x == LogicValue::One);
            if conflict && !in_conflict[net] {
                state.log.push(
                    LogLevel::Warn,
                    at.time_ns,
                    "DRIVER_CONFLICT",
                    format!("net {} is driven to both 0 and 1", decl.name),
                );
            }
            in_conflict[net] = conflict;
            let ns = &mut state.net_state[net];
            if ns.value == v {
                continue;
            }
            if watched[net] && v == LogicValue::X && ns.value.is_known() && !x_reported[net] {
                x_reported[net] = true;
                state.log.push(
                    LogLevel::Warn,
                    at.time_ns,
                    "X_PROPAGATION",
                    format!("watched net {} became X", decl.name),
                );
            }
            ns.last_value = ns.value;
            ns.value = v;
            ns.event_at = Some(at);
            changed_last.push(net);
            to_run.extend(decl.fanout.iter().copied());
            if let Some(slot) = slot_of[net] {
                record(&mut changes[slot], at.time_ns, v);
            }
        }

        for proc in std::mem::take(&mut to_run) {
            let timer = timer_runs.remove(&proc);
            run_proc(procs[proc].as_mut(), &mut state, proc, timer, false);
        }
    }

    // Nets watched twice share one recorded list.
    for (i, &n) in watch.nets.iter().enumerate() {
        if let Some(first) = slot_of[n] {
            if first != i {
                changes[i] = changes[first].clone();
            }
        }
    }

    KernelOutput { changes, log: state.log, fault, max_delta }
}

fn run_proc(p: &mut dyn Process, state: &mut State, proc: ProcId, timer_fired: bool, init: bool) {
    p.run(&mut Ctx { state, proc, timer_fired, init });
}

/// Appends a change, keeping only the final value of each instant.
fn record(list: &mut Vec<(u64, LogicValue)>, t: u64, v: LogicValue) {
    if let Some(last) = list.last_mut() {
        if last.0 == t {
            last.1 = v;
            if list.len() >= 2 && list[list.len() - 2].1 == v {
                list.pop();
            }
            return;
        }
        if last.1 == v {
            return;
        }
    }
    list.push((t, v));
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    /// Drives a fixed list of (time, value) pairs.
    struct Script {
        driver: DriverId,
        steps: Vec<(u64, LogicValue)>,
        mode: DelayMode,
    }

    impl Process for Script {
        fn run(&mut self, ctx: &mut Ctx<'_>) {
            if ctx.is_init() {
                for &(t, v) in &self.steps {
                    ctx.drive_with(self.driver, v, t, self.mode);
                }
            }
        }
    }

    struct Inverter {
        input: NetId,
        driver: DriverId,
        delay: u64,
    }

    impl Process for Inverter {
        fn run(&mut self, ctx: &mut Ctx<'_>) {
            let v = ctx.value(self.input).as_input().not();
            ctx.drive(self.driver, v, self.delay);
        }
    }

    fn cfg(h: u64) -> KernelConfig {
        KernelConfig { horizon_ns: h, max_deltas_per_instant: 1000 }
    }

    #[test]
    fn undriven_net_stays_z() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let out = run(n, &Watch { nets: vec![a] }, &cfg(100));
        assert_eq!(out.changes[0], vec![(0, Z)]);
    }

    #[test]
    fn transport_keeps_short_pulses_inertial_drops_them() {
        for (mode, expect) in [
            (DelayMode::Transport, vec![(0, X), (10, One), (12, Zero)]),
            (DelayMode::Inertial, vec![(0, X), (12, Zero)]),
        ] {
            let mut n = Network::new();
            let a = n.add_net("a", Z);
            let d = n.add_driver(a, X);
            // Schedule 1 at 10 then 0 at 12 in separate runs of one process.
            struct Two {
                d: DriverId,
                mode: DelayMode,
            }
            impl Process for Two {
                fn run(&mut self, ctx: &mut Ctx<'_>) {
                    if ctx.is_init() {
                        ctx.drive_with(self.d, One, 10, DelayMode::Transport);
                        ctx.wake_after(2);
                    } else {
                        ctx.drive_with(self.d, Zero, 10, self.mode);
                    }
                }
            }
            n.add_process(Box::new(Two { d, mode }), &[]);
            let out = run(n, &Watch { nets: vec![a] }, &cfg(100));
            assert_eq!(out.changes[0], expect, "{mode:?}");
        }
    }

    #[test]
    fn later_transaction_cancels_pending_ones_at_or_after_it() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let d = n.add_driver(a, Zero);
        n.add_process(
            Box::new(Script { driver: d, steps: vec![(20, One), (10, Zero)], mode: DelayMode::Transport }),
            &[],
        );
        let out = run(n, &Watch { nets: vec![a] }, &cfg(100));
        assert_eq!(out.changes[0], vec![(0, Zero)]);
    }

    #[test]
    fn two_drivers_resolve() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let d1 = n.add_driver(a, Z);
        let d2 = n.add_driver(a, Z);
        n.add_process(Box::new(Script { driver: d1, steps: vec![(5, One)], mode: DelayMode::Transport }), &[]);
        n.add_process(Box::new(Script { driver: d2, steps: vec![(8, Zero)], mode: DelayMode::Transport }), &[]);
        let out = run(n, &Watch { nets: vec![a] }, &cfg(100));
        assert_eq!(out.changes[0], vec![(0, Z), (5, One), (8, X)]);
        assert!(out.log.entries.iter().any(|e| e.code == "DRIVER_CONFLICT" && e.time_ns == 8));
    }

    #[test]
    fn zero_delay_loop_faults() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let d = n.add_driver(a, Zero);
        n.add_process(Box::new(Inverter { input: a, driver: d, delay: 0 }), &[a]);
        let out = run(n, &Watch { nets: vec![a] }, &KernelConfig { horizon_ns: 100, max_deltas_per_instant: 50 });
        let f = out.fault.expect("fault");
        assert_eq!(f.code, "OSCILLATION");
        assert_eq!(f.time_ns, 0);
        assert_eq!(f.nets, vec!["a".to_string()]);
        assert!(out.max_delta <= 50);
    }

    #[test]
    fn delayed_loop_oscillates_in_time() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let d = n.add_driver(a, Zero);
        n.add_process(Box::new(Inverter { input: a, driver: d, delay: 7 }), &[a]);
        let out = run(n, &Watch { nets: vec![a] }, &cfg(30));
        assert!(out.fault.is_none());
        assert_eq!(out.changes[0], vec![(0, Zero), (7, One), (14, Zero), (21, One), (28, Zero)]);
    }

    #[test]
    fn glitch_within_one_instant_is_not_recorded() {
        let mut n = Network::new();
        let a = n.add_net("a", Z);
        let b = n.add_net("b", Z);
        let da = n.add_driver(a, Zero);
        let db = n.add_driver(b, Zero);
        // b follows a with zero delay, then is forced back in a later delta.
        struct Follow {
            a: NetId,
            db: DriverId,
        }
        impl Process for Follow {
            fn run(&mut self, ctx: &mut Ctx<'_>) {
                if ctx.event(self.a) {
                    ctx.drive(self.db, ctx.value(self.a), 0);
                    ctx.wake_after(0);
                } else if ctx.timer_fired() {
                    ctx.wake_after(0);
                    ctx.cancel_timer();
                    ctx.drive(self.db, Zero, 0);
                }
            }
        }
        n.add_process(Box::new(Script { driver: da, steps: vec![(5, One)], mode: DelayMode::Transport }), &[]);
        n.add_process(Box::new(Follow { a, db }), &[a]);
        let out = run(n, &Watch { nets: vec![a, b] }, &cfg(100));
        assert_eq!(out.changes[0], vec![(0, Zero), (5, One)]);
        assert_eq!(out.changes[1], vec![(0, Zero)]);
    }
}
