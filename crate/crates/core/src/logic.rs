//! Four-valued logic: `0`, `1`, `X` (unknown or conflict) and `Z` (undriven).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A single logic level on a net or pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum LogicValue {
    Zero,
    One,
    #[default]
    X,
    Z,
}

impl LogicValue {
    pub const ALL: [LogicValue; 4] = [LogicValue::Zero, LogicValue::One, LogicValue::X, LogicValue::Z];

    pub fn from_bool(b: bool) -> Self {
        if b {
            LogicValue::One
        } else {
            LogicValue::Zero
        }
    }

    /// `Some(bool)` for the two known levels.
    pub fn to_bool(self) -> Option<bool> {
        match self {
            LogicValue::Zero => Some(false),
            LogicValue::One => Some(true),
            _ => None,
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, LogicValue::Zero | LogicValue::One)
    }

    /// The value a gate input sees: a floating input reads as `X`.
    pub fn as_input(self) -> Self {
        match self {
            LogicValue::Z => LogicValue::X,
            v => v,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            LogicValue::Zero => '0',
            LogicValue::One => '1',
            LogicValue::X => 'X',
            LogicValue::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(LogicValue::Zero),
            '1' => Some(LogicValue::One),
            'x' | 'X' => Some(LogicValue::X),
            'z' | 'Z' => Some(LogicValue::Z),
            _ => None,
        }
    }

    /// Kleene negation with `Z` read as `X`.
    pub fn not(self) -> Self {
        match self.as_input() {
            LogicValue::Zero => LogicValue::One,
            LogicValue::One => LogicValue::Zero,
            _ => LogicValue::X,
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self.as_input(), other.as_input()) {
            (LogicValue::Zero, _) | (_, LogicValue::Zero) => LogicValue::Zero,
            (LogicValue::One, LogicValue::One) => LogicValue::One,
            _ => LogicValue::X,
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self.as_input(), other.as_input()) {
            (LogicValue::One, _) | (_, LogicValue::One) => LogicValue::One,
            (LogicValue::Zero, LogicValue::Zero) => LogicValue::Zero,
            _ => LogicValue::X,
        }
    }

    pub fn xor(self, other: Self) -> Self {
        match (self.to_bool(), other.to_bool()) {
            (Some(a), Some(b)) => LogicValue::from_bool(a ^ b),
            _ => LogicValue::X,
        }
    }

    /// Merge of two possible outcomes: equal values survive, anything else is `X`.
    pub fn merge(self, other: Self) -> Self {
        if self == other {
            self
        } else {
            LogicValue::X
        }
    }
}

/// Combines two drivers on one net.
///
/// Commutative and associative with identity `Z`; `0` against `1` is a
/// conflict (`X`) and `X` absorbs every value except `Z`.
pub fn resolve(a: LogicValue, b: LogicValue) -> LogicValue {
    use LogicValue::*;
    match (a, b) {
        (Z, v) | (v, Z) => v,
        (X, _) | (_, X) => X,
        (Zero, Zero) => Zero,
        (One, One) => One,
        _ => X,
    }
}

/// Folds [`resolve`] over any number of drivers; no drivers gives `Z`.
pub fn resolve_all<I: IntoIterator<Item = LogicValue>>(values: I) -> LogicValue {
    values.into_iter().fold(LogicValue::Z, resolve)
}

impl fmt::Display for LogicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid logic value {0:?} (expected one of 0, 1, X, Z)")]
pub struct ParseLogicError(pub String);

impl FromStr for LogicValue {
    type Err = ParseLogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => LogicValue::from_char(c).ok_or_else(|| ParseLogicError(s.to_string())),
            _ => Err(ParseLogicError(s.to_string())),
        }
    }
}

impl Serialize for LogicValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut buf = [0u8; 4];
        serializer.serialize_str(self.to_char().encode_utf8(&mut buf))
    }
}

impl<'de> Deserialize<'de> for LogicValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Integers 0 and 1 are accepted as a convenience for hand-written files.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u8),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(0) => Ok(LogicValue::Zero),
            Raw::Int(1) => Ok(LogicValue::One),
            Raw::Int(n) => Err(serde::de::Error::custom(ParseLogicError(n.to_string()))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    #[test]
    fn resolve_examples() {
        assert_eq!(resolve(Z, One), One);
        assert_eq!(resolve(Zero, One), X);
        assert_eq!(resolve(X, Z), X);
        assert_eq!(resolve(One, One), One);
    }

    #[test]
    fn resolve_fold_is_permutation_invariant() {
        // every ordering of {0, Z, 0}
        let items = [Zero, Z, Zero];
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for o in orders {
            let v = resolve_all(o.iter().map(|&i| items[i]));
            assert_eq!(v, Zero, "order {o:?}");
        }
    }

    #[test]
    fn resolve_is_commutative_monoid() {
        for a in LogicValue::ALL {
            assert_eq!(resolve(Z, a), a);
            assert_eq!(resolve(a, Z), a);
            assert_eq!(resolve(a, a), a);
            for b in LogicValue::ALL {
                assert_eq!(resolve(a, b), resolve(b, a));
                for c in LogicValue::ALL {
                    assert_eq!(resolve(resolve(a, b), c), resolve(a, resolve(b, c)));
                }
            }
        }
    }

    #[test]
    fn x_absorbs_all_but_z() {
        for v in [Zero, One, X] {
            assert_eq!(resolve(X, v), X);
        }
    }

    #[test]
    fn serde_accepts_strings_and_bits() {
        let v: Vec<LogicValue> = serde_json::from_str(r#"["0","1","x","Z",0,1]"#).unwrap();
        assert_eq!(v, vec![Zero, One, X, Z, Zero, One]);
        assert_eq!(serde_json::to_string(&X).unwrap(), "\"X\"");
        assert!(serde_json::from_str::<LogicValue>("\"2\"").is_err());
    }
}
