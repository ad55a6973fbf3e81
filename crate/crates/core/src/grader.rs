//! Test-point grading: a submission and a reference are simulated under
//! the same stimuli and compared at sample instants.

use serde::{Deserialize, Serialize};

use crate::design::{Design, SimBackend};
use crate::logic::LogicValue;
use crate::sim::{SimConfig, SimRun};
use crate::stimulus::{StimulusError, StimulusSet};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestPoint {
    pub id: String,
    pub stimulus: StimulusSet,
    /// Top-level outputs to compare.
    pub observed: Vec<String>,
    /// Sampling instants; left empty, [`default_sample_times`] is used.
    #[serde(default)]
    pub sample_times_ns: Vec<u64>,
}

impl TestPoint {
    pub fn validate(&self) -> Result<(), GradeError> {
        let bad = |reason: String| Err(GradeError::TestPoint { id: self.id.clone(), reason });
        if self.observed.is_empty() {
            return bad("observed list is empty".into());
        }
        if let Err(e) = self.stimulus.validate() {
            return bad(e.to_string());
        }
        if self.sample_times_ns.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample times must be strictly increasing".into());
        }
        if let Some(&t) = self.sample_times_ns.iter().find(|&&t| t > self.stimulus.horizon_ns) {
            return bad(format!("sample time {t} lies beyond the horizon {}", self.stimulus.horizon_ns));
        }
        Ok(())
    }

    /// The explicit sample times, or the defaults with no settle margin.
    pub fn effective_sample_times(&self) -> Vec<u64> {
        if self.sample_times_ns.is_empty() {
            default_sample_times(&self.stimulus, 0)
        } else {
            self.sample_times_ns.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub signal: String,
    pub time_ns: u64,
    pub expected: LogicValue,
    pub actual: LogicValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPointResult {
    pub id: String,
    pub verdict: Verdict,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeReport {
    pub per_test_point: Vec<TestPointResult>,
    pub passed: u32,
    pub total: u32,
    /// Percentage of passed test points, rounded half up.
    pub score: u32,
    /// Compile, validation or simulation problems of the submission.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GradeError {
    /// The instructor's reference or test points are broken; the student
    /// is not at fault.
    #[error("reference design: {0}")]
    Reference(String),
    #[error("test point {id}: {reason}")]
    TestPoint { id: String, reason: String },
}

/// `round(100 * passed / total)` with halves rounded up; 100 when there
/// are no test points.
pub fn score(passed: u32, total: u32) -> u32 {
    if total == 0 {
        return 100;
    }
    ((200 * passed as u64 + total as u64) / (2 * total as u64)) as u32
}

/// One sample 1 ns before every input change later than `settle_ns`, plus
/// one at `horizon - 1`; sorted and deduplicated.
pub fn default_sample_times(stim: &StimulusSet, settle_ns: u64) -> Vec<u64> {
    let mut times: Vec<u64> =
        stim.change_times().into_iter().filter(|&t| t > settle_ns).map(|t| t - 1).collect();
    times.push(stim.horizon_ns.saturating_sub(1));
    times.sort_unstable();
    times.dedup();
    times
}

/// X in the reference accepts anything; otherwise values must be equal.
pub fn sample_matches(expected: LogicValue, actual: LogicValue) -> bool {
    expected == LogicValue::X || expected == actual
}

fn sample(run: &SimRun, signal: &str, t: u64) -> Option<LogicValue> {
    run.trace.sample(signal, t).ok()
}

fn config(tp: &TestPoint) -> SimConfig {
    SimConfig::new(tp.stimulus.horizon_ns)
}

/// Grades `submission` against `reference` over `tps`.
pub fn grade(
    backend: &dyn SimBackend,
    submission: &Design,
    reference: &Design,
    tps: &[TestPoint],
) -> Result<GradeReport, GradeError> {
    for tp in tps {
        tp.validate()?;
    }
    let reference = backend.compile(reference).map_err(|e| GradeError::Reference(e.diagnostics().join("; ")))?;
    let mut expected_runs = Vec::with_capacity(tps.len());
    for tp in tps {
        let run = backend
            .run(&reference, &tp.stimulus, &config(tp))
            .map_err(|e| GradeError::Reference(format!("test point {}: {}", tp.id, e.diagnostics().join("; "))))?;
        if let Some(f) = &run.fault {
            return Err(GradeError::Reference(format!("test point {}: {f}", tp.id)));
        }
        for s in &tp.observed {
            if run.trace.signal(s).is_none() {
                return Err(GradeError::Reference(format!("test point {}: no output named {s}", tp.id)));
            }
        }
        expected_runs.push(run);
    }

    let mut diagnostics = Vec::new();
    let submission = match backend.compile(submission) {
        Err(e) => {
            diagnostics = e.diagnostics();
            None
        }
        Ok(d) => Some(d),
    };
    let mut results = Vec::with_capacity(tps.len());
    for (tp, expected) in tps.iter().zip(&expected_runs) {
        let run = match &submission {
            None => None,
            Some(d) => match backend.run(d, &tp.stimulus, &config(tp)) {
                Ok(run) => {
                    if let Some(f) = &run.fault {
                        diagnostics.push(format!("test point {}: {f}", tp.id));
                    }
                    Some(run)
                }
                Err(e) => {
                    diagnostics.extend(e.diagnostics().into_iter().map(|m| format!("test point {}: {m}", tp.id)));
                    None
                }
            },
        };
        let first_mismatch = match &run {
            None => None,
            Some(run) => {
                for s in &tp.observed {
                    if run.trace.signal(s).is_none() {
                        diagnostics.push(format!("test point {}: submission has no output named {s}", tp.id));
                    }
                }
                compare(tp, expected, run)
            }
        };
        let verdict = if run.is_some() && first_mismatch.is_none() { Verdict::Pass } else { Verdict::Fail };
        results.push(TestPointResult { id: tp.id.clone(), verdict, first_mismatch });
    }
    diagnostics.dedup();
    let passed = results.iter().filter(|r| r.verdict == Verdict::Pass).count() as u32;
    let total = results.len() as u32;
    Ok(GradeReport { per_test_point: results, passed, total, score: score(passed, total), diagnostics })
}

/// First disagreeing sample in time order, then observed-list order. A
/// signal the submission lacks, or a sample past an early stop, reads as X.
fn compare(tp: &TestPoint, expected: &SimRun, actual: &SimRun) -> Option<Mismatch> {
    for t in tp.effective_sample_times() {
        for s in &tp.observed {
            let want = sample(expected, s, t).unwrap_or(LogicValue::X);
            let got = sample(actual, s, t).unwrap_or(LogicValue::X);
            if !sample_matches(want, got) {
                return Some(Mismatch { signal: s.clone(), time_ns: t, expected: want, actual: got });
            }
        }
    }
    None
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestPointFile {
    format_version: u32,
    test_points: Vec<TestPoint>,
}

pub fn deserialize_test_points(bytes: &[u8]) -> Result<Vec<TestPoint>, StimulusError> {
    let file: TestPointFile = serde_json::from_slice(bytes)
        .map_err(|e| StimulusError { path: format!("line {}, column {}", e.line(), e.column()), reason: e.to_string() })?;
    if file.format_version != FORMAT_VERSION {
        return Err(StimulusError {
            path: "format_version".into(),
            reason: format!("unsupported version {}", file.format_version),
        });
    }
    for (i, tp) in file.test_points.iter().enumerate() {
        tp.validate().map_err(|e| StimulusError { path: format!("test_points[{i}]"), reason: e.to_string() })?;
    }
    Ok(file.test_points)
}

pub fn serialize_test_points(tps: &[TestPoint]) -> Vec<u8> {
    let file = TestPointFile { format_version: FORMAT_VERSION, test_points: tps.to_vec() };
    let mut out = serde_json::to_vec_pretty(&file).expect("test points serialize");
    out.push(b'\n');
    out
}
