use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::LogicValue;

/// One recorded signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSignal {
    pub label: String,
    /// Identifier of the underlying net (or pin) in the simulated design.
    pub id: String,
    pub changes: Vec<(u64, LogicValue)>,
}

/// Value-change record of the watched signals over `[0, horizon_ns]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub horizon_ns: u64,
    pub signals: Vec<TraceSignal>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("trace has no signal {0:?}")]
    UnknownSignal(String),
    #[error("time {time_ns} lies beyond the horizon {horizon_ns}")]
    OutOfRange { time_ns: u64, horizon_ns: u64 },
}

impl Trace {
    pub fn signal(&self, label: &str) -> Option<&TraceSignal> {
        self.signals.iter().find(|s| s.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.signals.iter().map(|s| s.label.as_str())
    }

    /// Value of the most recent change at or before `t_ns`.
    pub fn sample(&self, label: &str, t_ns: u64) -> Result<LogicValue, TraceError> {
        let s = self.signal(label).ok_or_else(|| TraceError::UnknownSignal(label.to_string()))?;
        if t_ns > self.horizon_ns {
            return Err(TraceError::OutOfRange { time_ns: t_ns, horizon_ns: self.horizon_ns });
        }
        Ok(value_at(&s.changes, t_ns))
    }

    /// Checks the change-list invariants; returns the first offending label.
    pub fn check(&self) -> Result<(), String> {
        for s in &self.signals {
            if s.changes.first().map(|c| c.0) != Some(0) {
                return Err(s.label.clone());
            }
            if s.changes.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 == w[1].1) {
                return Err(s.label.clone());
            }
        }
        Ok(())
    }
}

pub fn value_at(changes: &[(u64, LogicValue)], t_ns: u64) -> LogicValue {
    let i = changes.partition_point(|(t, _)| *t <= t_ns);
    if i == 0 {
        LogicValue::Z
    } else {
        changes[i - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LogLevel {
    Info,
    Warn,
    Error,
}

impl fmt::Display for LogLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogLevel::Info => "INFO",
            LogLevel::Warn => "WARN",
            LogLevel::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub level: LogLevel,
    pub time_ns: u64,
    pub code: String,
    pub message: String,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.level, self.time_ns, self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimLog {
    pub entries: Vec<LogEntry>,
}

impl SimLog {
    pub fn push(&mut self, level: LogLevel, time_ns: u64, code: &str, message: impl Into<String>) {
        self.entries.push(LogEntry { level, time_ns, code: code.to_string(), message: message.into() });
    }

    pub fn has(&self, code: &str) -> bool {
        self.entries.iter().any(|e| e.code == code)
    }

    /// Line-oriented text: `LEVEL time_ns CODE message`.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }
}

/// A condition that ended a run early.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimFault {
    pub code: String,
    pub time_ns: u64,
    pub nets: Vec<String>,
    pub message: String,
}

impl SimFault {
    pub fn oscillation(time_ns: u64, limit: u32, nets: Vec<String>) -> Self {
        let message = format!("more than {limit} delta cycles at {time_ns} ns; still changing: {}", nets.join(", "));
        SimFault { code: "OSCILLATION".into(), time_ns, nets, message }
    }
}

impl fmt::Display for SimFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicValue::*;

    fn trace() -> Trace {
        Trace {
            horizon_ns: 100,
            signals: vec![
                TraceSignal { label: "k".into(), id: "k".into(), changes: vec![(0, One)] },
                TraceSignal { label: "y".into(), id: "y".into(), changes: vec![(0, X), (10, Zero)] },
            ],
        }
    }

    #[test]
    fn sampling() {
        let t = trace();
        for at in [0, 33, 100] {
            assert_eq!(t.sample("k", at).unwrap(), One);
        }
        assert_eq!(t.sample("y", 10).unwrap(), Zero);
        assert_eq!(t.sample("y", 9).unwrap(), X);
        assert!(matches!(t.sample("q", 1), Err(TraceError::UnknownSignal(_))));
        assert!(t.sample("y", 101).is_err());
        assert!(t.check().is_ok());
    }

    #[test]
    fn log_text() {
        let mut log = SimLog::default();
        log.push(LogLevel::Warn, 10, "X_PROPAGATION", "watched net y became X");
        assert_eq!(log.to_text(), "WARN 10 X_PROPAGATION watched net y became X\n");
    }
}
