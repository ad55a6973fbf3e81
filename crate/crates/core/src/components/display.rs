use serde::{Deserialize, Serialize};

use crate::logic::LogicValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentState {
    Lit,
    Dark,
    Indeterminate,
}

impl SegmentState {
    pub fn from_input(v: LogicValue) -> Self {
        match v {
            LogicValue::One => SegmentState::Lit,
            LogicValue::Zero => SegmentState::Dark,
            _ => SegmentState::Indeterminate,
        }
    }
}

/// Rendered state of a display part, in the model's segment order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayState {
    pub segments: Vec<(String, SegmentState)>,
}

impl DisplayState {
    pub fn from_segments(it: impl IntoIterator<Item = (String, SegmentState)>) -> Self {
        DisplayState { segments: it.into_iter().collect() }
    }

    pub fn lit(&self) -> Vec<&str> {
        self.segments.iter().filter(|(_, s)| *s == SegmentState::Lit).map(|(n, _)| n.as_str()).collect()
    }

    /// The decimal digit shown by a standard `a`..`g` display, if any.
    pub fn digit(&self) -> Option<u8> {
        const PATTERNS: [&str; 10] =
            ["abcdef", "bc", "abdeg", "abcdg", "bcfg", "acdfg", "cdefg", "abc", "abcdefg", "abcfg"];
        if self.segments.iter().any(|(_, s)| *s == SegmentState::Indeterminate) {
            return None;
        }
        let lit: String = self.lit().concat();
        PATTERNS.iter().position(|p| *p == lit).map(|d| d as u8)
    }
}
