//! Per-student and cohort statistics, derived from submissions alone.

use std::collections::BTreeMap;

use chrono::{FixedOffset, Timelike};
use serde::{Deserialize, Serialize};

use crate::model::{Assignment, Db, Id, Submission, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticsRecord {
    pub student_id: Id,
    pub student_name: String,
    pub submission_count: u32,
    pub submission_times: Vec<Timestamp>,
    pub submission_scores: Vec<u32>,
    /// Best score among submissions made no later than the deadline.
    pub final_score: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub assignment_id: Id,
    pub roster_size: u32,
    pub submitted_count: u32,
    pub submitted_ratio: f64,
    pub solved_count: u32,
    pub total_submissions: u32,
    /// Submissions up to and including the first full score, per solver.
    pub tries_histogram: BTreeMap<u32, u32>,
    /// Submissions per hour of day in the course timezone.
    pub hourly_histogram: Vec<u32>,
    pub timezone: String,
    pub students: Vec<StatisticsRecord>,
}

pub const FULL_SCORE: u32 = 100;

/// `max` of pre-deadline scores, 0 without any.
pub fn final_score(subs: &[(Timestamp, u32)], deadline: Timestamp) -> u32 {
    subs.iter().filter(|(t, _)| *t <= deadline).map(|(_, s)| *s).max().unwrap_or(0)
}

/// Position (1-based) of the first full score.
pub fn tries_before_success(scores: &[u32]) -> Option<u32> {
    scores.iter().position(|&s| s == FULL_SCORE).map(|i| i as u32 + 1)
}

pub fn record(student_id: Id, student_name: &str, subs: &[&Submission], deadline: Timestamp) -> StatisticsRecord {
    let pairs: Vec<(Timestamp, u32)> = subs.iter().map(|s| (s.submitted_at, s.score().unwrap_or(0))).collect();
    StatisticsRecord {
        student_id,
        student_name: student_name.to_string(),
        submission_count: subs.len() as u32,
        submission_times: pairs.iter().map(|p| p.0).collect(),
        submission_scores: pairs.iter().map(|p| p.1).collect(),
        final_score: final_score(&pairs, deadline),
    }
}

/// Statistics of `assignment` computed from the submission table of `db`.
pub fn cohort_stats(db: &Db, assignment: &Assignment, tz: FixedOffset) -> CohortStats {
    let mut students = Vec::with_capacity(assignment.roster.len());
    let mut hourly = vec![0u32; 24];
    let mut tries: BTreeMap<u32, u32> = BTreeMap::new();
    let (mut submitted, mut solved, mut total) = (0, 0, 0);
    for &sid in &assignment.roster {
        let subs: Vec<&Submission> = db
            .projects
            .values()
            .filter(|p| p.owner == sid && p.assignment_id == Some(assignment.id))
            .flat_map(|p| db.history(p.id))
            .collect();
        let name = db.users.get(&sid).map_or("", |u| u.name.as_str());
        let rec = record(sid, name, &subs, assignment.deadline);
        for t in &rec.submission_times {
            hourly[t.with_timezone(&tz).hour() as usize] += 1;
        }
        total += rec.submission_count;
        if rec.submission_count > 0 {
            submitted += 1;
        }
        if let Some(n) = tries_before_success(&rec.submission_scores) {
            solved += 1;
            *tries.entry(n).or_default() += 1;
        }
        students.push(rec);
    }
    let roster = assignment.roster.len() as u32;
    CohortStats {
        assignment_id: assignment.id,
        roster_size: roster,
        submitted_count: submitted,
        submitted_ratio: if roster == 0 { 0.0 } else { submitted as f64 / roster as f64 },
        solved_count: solved,
        total_submissions: total,
        tries_histogram: tries,
        hourly_histogram: hourly,
        timezone: tz.to_string(),
        students,
    }
}
