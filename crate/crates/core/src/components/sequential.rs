//! Clocked update rules for sequential parts.
//!
//! Each rule is written over two-valued inputs; [`SequentialRule::step`] lifts
//! it to four-valued inputs by enumerating every completion of the unknown
//! inputs, state bits and clock edges and merging the outcomes.

use super::ModelError;
use crate::logic::LogicValue;

/// What a clock pin did in the current evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Edge {
    #[default]
    None,
    Rising,
    Falling,
    /// An unknown value was involved; the pin may or may not have risen.
    Maybe,
}

impl Edge {
    /// Classifies a transition seen on a clock input.
    pub fn from_transition(prev: LogicValue, cur: LogicValue) -> Edge {
        let (p, c) = (prev.as_input(), cur.as_input());
        match (p, c) {
            _ if p == c => Edge::None,
            (LogicValue::Zero, LogicValue::One) => Edge::Rising,
            (LogicValue::One, LogicValue::Zero) => Edge::Falling,
            (LogicValue::One, _) | (_, LogicValue::Zero) => Edge::None,
            _ => Edge::Maybe,
        }
    }
}

/// One D flip-flop section of a 74LS74-style package (active-low preset and clear).
#[derive(Debug, Clone, PartialEq)]
pub struct DffSlot {
    pub d: usize,
    pub clk: usize,
    pub clr: usize,
    pub pre: usize,
    pub q: usize,
    pub qn: usize,
}

/// 74LS163-style synchronous 4-bit binary counter.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterPins {
    pub clk: usize,
    /// Active-low clear.
    pub clr: usize,
    /// Active-low parallel load.
    pub load: usize,
    pub enp: usize,
    pub ent: usize,
    /// Parallel data inputs, least significant first.
    pub data: Vec<usize>,
    /// State outputs, least significant first.
    pub q: Vec<usize>,
    pub rco: usize,
    /// Clear acts immediately rather than on the next rising edge (74LS161 behaviour).
    pub async_clear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequentialRule {
    DFlipFlop(Vec<DffSlot>),
    Counter(CounterPins),
}

/// Two-valued view of one completion. Indices are model pin indices.
struct Frame<'a> {
    inputs: &'a [bool],
    rising: &'a [bool],
}

impl SequentialRule {
    /// Number of state bits; state bit `i` is reported on [`Self::state_pins`]`[i]`.
    pub fn state_len(&self) -> usize {
        match self {
            SequentialRule::DFlipFlop(slots) => slots.len(),
            SequentialRule::Counter(c) => c.q.len(),
        }
    }

    /// Output pins that carry stored state, in state-bit order.
    pub fn state_pins(&self) -> Vec<usize> {
        match self {
            SequentialRule::DFlipFlop(slots) => slots.iter().map(|s| s.q).collect(),
            SequentialRule::Counter(c) => c.q.clone(),
        }
    }

    pub fn clock_pins(&self) -> Vec<usize> {
        match self {
            SequentialRule::DFlipFlop(slots) => slots.iter().map(|s| s.clk).collect(),
            SequentialRule::Counter(c) => vec![c.clk],
        }
    }

    /// Input pins that influence the given output pin.
    pub fn support_of(&self, output: usize) -> Vec<usize> {
        match self {
            SequentialRule::DFlipFlop(slots) => slots
                .iter()
                .find(|s| s.q == output || s.qn == output)
                .map(|s| vec![s.d, s.clk, s.clr, s.pre])
                .unwrap_or_default(),
            SequentialRule::Counter(c) => {
                let mut v = vec![c.clk, c.clr, c.load, c.enp, c.ent];
                v.extend(&c.data);
                v
            }
        }
    }

    fn input_pins(&self) -> Vec<usize> {
        let mut pins: Vec<usize> = match self {
            SequentialRule::DFlipFlop(slots) => slots.iter().flat_map(|s| [s.d, s.clk, s.clr, s.pre]).collect(),
            SequentialRule::Counter(c) => self.support_of(c.rco),
        };
        pins.sort_unstable();
        pins.dedup();
        pins
    }

    fn next_state(&self, state: &[bool], f: &Frame<'_>) -> Vec<LogicValue> {
        match self {
            SequentialRule::DFlipFlop(slots) => slots
                .iter()
                .zip(state)
                .map(|(s, &q)| {
                    let (pre, clr) = (f.inputs[s.pre], f.inputs[s.clr]);
                    match (pre, clr) {
                        // both asserted: state after release is undefined
                        (false, false) => LogicValue::X,
                        (false, true) => LogicValue::One,
                        (true, false) => LogicValue::Zero,
                        (true, true) if f.rising[s.clk] => LogicValue::from_bool(f.inputs[s.d]),
                        _ => LogicValue::from_bool(q),
                    }
                })
                .collect(),
            SequentialRule::Counter(c) => {
                let width = c.q.len();
                let cur: u32 = state.iter().enumerate().map(|(i, &b)| (b as u32) << i).sum();
                let next = if c.async_clear && !f.inputs[c.clr] {
                    0
                } else if f.rising[c.clk] {
                    if !f.inputs[c.clr] {
                        0
                    } else if !f.inputs[c.load] {
                        c.data.iter().enumerate().map(|(i, &p)| (f.inputs[p] as u32) << i).sum()
                    } else if f.inputs[c.enp] && f.inputs[c.ent] {
                        (cur + 1) % (1 << width)
                    } else {
                        cur
                    }
                } else {
                    cur
                };
                (0..width).map(|i| LogicValue::from_bool(next >> i & 1 == 1)).collect()
            }
        }
    }

    /// Output pin values as (pin, value) pairs.
    fn outputs(&self, state: &[LogicValue], inputs: &[bool]) -> Vec<(usize, LogicValue)> {
        match self {
            SequentialRule::DFlipFlop(slots) => slots
                .iter()
                .zip(state)
                .flat_map(|(s, &q)| {
                    if !inputs[s.pre] && !inputs[s.clr] {
                        [(s.q, LogicValue::One), (s.qn, LogicValue::One)]
                    } else {
                        [(s.q, q), (s.qn, q.not())]
                    }
                })
                .collect(),
            SequentialRule::Counter(c) => {
                let mut out: Vec<(usize, LogicValue)> = c.q.iter().copied().zip(state.iter().copied()).collect();
                let all_ones = state.iter().fold(LogicValue::One, |acc, &b| acc.and(b));
                out.push((c.rco, all_ones.and(LogicValue::from_bool(inputs[c.ent]))));
                out
            }
        }
    }

    /// Four-valued step: returns the next state and every output pin value.
    ///
    /// `inputs` and `edges` are indexed by model pin index; entries for
    /// non-input pins are ignored.
    pub fn step(
        &self,
        state: &[LogicValue],
        inputs: &[LogicValue],
        edges: &[Edge],
    ) -> Result<(Vec<LogicValue>, Vec<(usize, LogicValue)>), ModelError> {
        if state.len() != self.state_len() {
            return Err(ModelError::Contract(format!(
                "state vector has {} bits, rule expects {}",
                state.len(),
                self.state_len()
            )));
        }
        let pins = self.input_pins();
        let clocks = self.clock_pins();
        let n = inputs.len().max(edges.len()).max(pins.iter().copied().max().map_or(0, |m| m + 1));

        // Unknown positions to enumerate: X inputs, X state bits, maybe-edges.
        let unknown_inputs: Vec<usize> = pins
            .iter()
            .copied()
            .filter(|&p| !inputs.get(p).copied().unwrap_or(LogicValue::X).as_input().is_known())
            .collect();
        let unknown_state: Vec<usize> = (0..state.len()).filter(|&i| !state[i].is_known()).collect();
        let unknown_edges: Vec<usize> =
            clocks.iter().copied().filter(|&c| edges.get(c).copied() == Some(Edge::Maybe)).collect();
        let k = unknown_inputs.len() + unknown_state.len() + unknown_edges.len();
        if k > 20 {
            return Err(ModelError::Contract("too many unknown inputs to enumerate".into()));
        }

        let mut next_acc: Option<Vec<LogicValue>> = None;
        let mut out_acc: Option<Vec<(usize, LogicValue)>> = None;
        let mut in_bits = vec![false; n];
        let mut rising = vec![false; n];
        let mut st_bits = vec![false; state.len()];
        for combo in 0u32..(1 << k) {
            let mut bit = 0;
            let mut take = || {
                let b = combo >> bit & 1 == 1;
                bit += 1;
                b
            };
            for &p in &pins {
                in_bits[p] = match inputs.get(p).map(|v| v.as_input()) {
                    Some(LogicValue::One) => true,
                    Some(LogicValue::Zero) => false,
                    _ => take(),
                };
            }
            for (i, v) in state.iter().enumerate() {
                st_bits[i] = match v {
                    LogicValue::One => true,
                    LogicValue::Zero => false,
                    _ => take(),
                };
            }
            for &c in &clocks {
                rising[c] = match edges.get(c).copied().unwrap_or_default() {
                    Edge::Rising => true,
                    Edge::Maybe => take(),
                    _ => false,
                };
            }
            let frame = Frame { inputs: &in_bits, rising: &rising };
            let next = self.next_state(&st_bits, &frame);
            let outs = self.outputs(&next, &in_bits);
            next_acc = Some(match next_acc {
                None => next,
                Some(acc) => acc.into_iter().zip(next).map(|(a, b)| a.merge(b)).collect(),
            });
            out_acc = Some(match out_acc {
                None => outs,
                Some(acc) => acc.into_iter().zip(outs).map(|((p, a), (_, b))| (p, a.merge(b))).collect(),
            });
        }
        Ok((next_acc.unwrap_or_default(), out_acc.unwrap_or_default()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    #[test]
    fn edge_classification() {
        assert_eq!(Edge::from_transition(Zero, One), Edge::Rising);
        assert_eq!(Edge::from_transition(One, Zero), Edge::Falling);
        assert_eq!(Edge::from_transition(Z, Zero), Edge::None);
        assert_eq!(Edge::from_transition(One, X), Edge::None);
        assert_eq!(Edge::from_transition(Zero, X), Edge::Maybe);
        assert_eq!(Edge::from_transition(X, One), Edge::Maybe);
        assert_eq!(Edge::from_transition(One, One), Edge::None);
    }
}
