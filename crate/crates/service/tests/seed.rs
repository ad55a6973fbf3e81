use std::sync::Arc;

use chrono::{TimeZone, Utc};
use dclab_service::seed::{seed_demo, COHORT, ROSTER_SIZE};
use dclab_service::service::{ManualClock, Service};
use dclab_service::{Config, ErrorCode};

fn seeded(cfg: &Config) -> (Service, dclab_service::seed::SeedSummary) {
    let clock = Arc::new(ManualClock::new(Utc.timestamp_opt(0, 0).unwrap()));
    let svc = Service::open(cfg, clock.clone()).unwrap();
    let summary = seed_demo(&svc, &clock).unwrap();
    (svc, summary)
}

fn config(dir: &std::path::Path) -> Config {
    Config {
        store_path: dir.join("store.json"),
        blob_dir: dir.join("blobs"),
        course_timezone: chrono::FixedOffset::east_opt(8 * 3600).unwrap(),
        ..Config::default()
    }
}

#[test]
fn seeded_cohort_has_the_reported_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (svc, summary) = seeded(&config(dir.path()));
    let teacher = svc.authenticate(&summary.instructor_token).unwrap();
    let st = svc.assignment_stats(&teacher, summary.assignment).unwrap();
    assert_eq!(st.roster_size as usize, ROSTER_SIZE);
    assert_eq!(st.submitted_count, 17);
    assert_eq!(st.submitted_ratio, 17.0 / 31.0);
    assert_eq!(st.solved_count, 10);
    assert!(st.tries_histogram[&1] >= 3);
    assert_eq!(st.tries_histogram[&7], 1);
    assert_eq!(st.total_submissions, summary.submissions);
    assert_eq!(st.total_submissions, COHORT.iter().map(|c| c.0).sum::<u32>());
    assert_eq!(st.hourly_histogram.len(), 24);
    assert_eq!(st.hourly_histogram.iter().sum::<u32>(), st.total_submissions);

    // Students 1, 2 and 10 get it right first time.
    for i in [0, 1, 9] {
        assert_eq!(st.students[i].submission_scores, vec![100], "student {}", i + 1);
    }
    let a = svc.get_assignment(&teacher, summary.assignment).unwrap();
    for r in &st.students {
        assert!(r.submission_times.iter().all(|t| *t <= a.deadline), "{}", r.student_name);
        let solved = r.submission_scores.contains(&100);
        assert_eq!(r.final_score == 100, solved);
    }
    // Every attempt of a non-solver is wrong but still graded.
    assert!(st.students.iter().flat_map(|r| &r.submission_scores).all(|s| *s <= 100));
}

#[test]
fn seeded_store_reopens_identically_and_refuses_reseeding() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let (svc, summary) = seeded(&cfg);
    let teacher = svc.authenticate(&summary.instructor_token).unwrap();
    let before = svc.assignment_stats(&teacher, summary.assignment).unwrap();
    drop(svc);
    let clock = Arc::new(ManualClock::new(Utc.timestamp_opt(0, 0).unwrap()));
    let svc = Service::open(&cfg, clock.clone()).unwrap();
    let teacher = svc.authenticate(&summary.instructor_token).unwrap();
    assert_eq!(svc.assignment_stats(&teacher, summary.assignment).unwrap(), before);
    let s = &before.students[0];
    let student = svc.store().read(|db| db.users[&s.student_id].clone());
    let home = svc.home(&student);
    let sub = svc.submission_history(&student, home.homework[0].id).unwrap();
    assert!(svc.submission_trace(&student, sub[0].id).unwrap().is_some(), "blobs survive the reopen");
    assert_eq!(seed_demo(&svc, &clock).unwrap_err().code, ErrorCode::Conflict);
}

#[test]
fn seeding_is_deterministic_apart_from_secrets() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (sa, ma) = seeded(&config(a.path()));
    let (sb, mb) = seeded(&config(b.path()));
    let ta = sa.authenticate(&ma.instructor_token).unwrap();
    let tb = sb.authenticate(&mb.instructor_token).unwrap();
    assert_eq!(sa.assignment_stats(&ta, ma.assignment).unwrap(), sb.assignment_stats(&tb, mb.assignment).unwrap());
}
