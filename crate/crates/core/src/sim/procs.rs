//! Kernel processes for catalog parts and stimulus sources.

use std::sync::Arc;

use crate::components::{Behavior, ComponentModel, Edge, SequentialRule};
use crate::logic::LogicValue;
use crate::stimulus::SignalSpec;

use super::kernel::{Ctx, DriverId, NetId, Process};
use super::trace::LogLevel;

/// Replays a change list lazily; each change is applied one delta after
/// the instant it names.
pub struct SourceProc {
    driver: DriverId,
    changes: Box<dyn Iterator<Item = (u64, LogicValue)> + Send>,
    next: Option<(u64, LogicValue)>,
}

impl SourceProc {
    pub fn new(driver: DriverId, spec: &SignalSpec, horizon_ns: u64) -> Self {
        let mut changes = spec.changes(horizon_ns);
        let next = changes.next();
        SourceProc { driver, changes, next }
    }
}

impl Process for SourceProc {
    fn run(&mut self, ctx: &mut Ctx<'_>) {
        let now = ctx.now().time_ns;
        while let Some((t, v)) = self.next {
            if t > now {
                ctx.wake_after(t - now);
                return;
            }
            ctx.drive(self.driver, v, 0);
            self.next = self.changes.next();
        }
    }
}

/// Pin wiring of one part instance: the net per pin, and a driver per
/// connected output pin.
pub struct PartPins {
    pub nets: Vec<Option<NetId>>,
    pub drivers: Vec<Option<DriverId>>,
}

impl PartPins {
    fn read(&self, ctx: &Ctx<'_>) -> Vec<LogicValue> {
        self.nets.iter().map(|n| n.map_or(LogicValue::Z, |n| ctx.value(n))).collect()
    }
}

pub struct CombProc {
    pub model: Arc<ComponentModel>,
    pub pins: PartPins,
    pub delay_ns: u64,
}

impl Process for CombProc {
    fn run(&mut self, ctx: &mut Ctx<'_>) {
        let Behavior::Combinational(logic) = &self.model.behavior else { return };
        let values = self.pins.read(ctx);
        for out in &logic.outputs {
            if let Some(d) = self.pins.drivers[out.pin] {
                ctx.drive(d, out.eval(&values), self.delay_ns);
            }
        }
    }
}

pub struct SeqProc {
    pub model: Arc<ComponentModel>,
    pub pins: PartPins,
    pub delay_ns: u64,
    pub state: Vec<LogicValue>,
}

impl SeqProc {
    fn rule(&self) -> &SequentialRule {
        match &self.model.behavior {
            Behavior::Sequential(r) => r,
            _ => unreachable!("sequential process over a non-sequential model"),
        }
    }
}

impl Process for SeqProc {
    fn run(&mut self, ctx: &mut Ctx<'_>) {
        // Output drivers already hold the power-on values.
        if ctx.is_init() {
            return;
        }
        let values = self.pins.read(ctx);
        let mut edges = vec![Edge::None; values.len()];
        for c in self.rule().clock_pins() {
            if let Some(n) = self.pins.nets[c] {
                if ctx.event(n) {
                    edges[c] = Edge::from_transition(ctx.last_value(n), ctx.value(n));
                }
            }
        }
        match self.rule().step(&self.state, &values, &edges) {
            Ok((next, outs)) => {
                self.state = next;
                for (pin, v) in outs {
                    if let Some(d) = self.pins.drivers[pin] {
                        ctx.drive(d, v, self.delay_ns);
                    }
                }
            }
            Err(e) => {
                let msg = format!("{}: {e}", self.model.part);
                ctx.log(LogLevel::Error, "MODEL_ERROR", msg);
            }
        }
    }
}
