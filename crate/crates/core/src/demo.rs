//! Bundled demo designs: the 0-59 counter lab with its wrong variants,
//! grading test points, and a NAND gate.

use crate::grader::{deserialize_test_points, TestPoint};
use crate::netlist::{deserialize_circuit, Circuit};
use crate::stimulus::{deserialize_stimulus, StimulusSet};
use crate::vhdl::VhdlUnit;

pub const COUNTER60: &str = include_str!("../fixtures/counter60.json");
/// Two-digit counter that wraps at 100 instead of 60.
pub const COUNTER100: &str = include_str!("../fixtures/counter100.json");
/// Counter whose tens digit never advances.
pub const COUNTER_STUCK: &str = include_str!("../fixtures/counter_stuck.json");
/// 50 Hz clock for 61 rising edges.
pub const COUNTER_STIM: &str = include_str!("../fixtures/counter_stim.json");
pub const COUNTER_TEST_POINTS: &str = include_str!("../fixtures/counter_testpoints.json");
pub const COUNTER60_VHDL: &str = include_str!("../fixtures/vhdl/counter60_behavioral.vhd");
pub const NAND: &str = include_str!("../fixtures/nand.json");
pub const NAND_STIM: &str = include_str!("../fixtures/nand_stim.json");

pub fn circuit(text: &str) -> Circuit {
    deserialize_circuit(text.as_bytes()).expect("bundled circuit parses")
}

pub fn stimulus(text: &str) -> StimulusSet {
    deserialize_stimulus(text.as_bytes()).expect("bundled stimulus parses")
}

pub fn counter_test_points() -> Vec<TestPoint> {
    deserialize_test_points(COUNTER_TEST_POINTS.as_bytes()).expect("bundled test points parse")
}

/// The behavioral counter as a single source file; top entity `counter60`.
pub fn counter60_vhdl() -> Vec<VhdlUnit> {
    vec![VhdlUnit::new("counter60.vhd", COUNTER60_VHDL)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_parse() {
        for c in [COUNTER60, COUNTER100, COUNTER_STUCK, NAND] {
            circuit(c);
        }
        stimulus(COUNTER_STIM);
        stimulus(NAND_STIM);
        assert_eq!(counter_test_points().len(), 4);
    }
}
