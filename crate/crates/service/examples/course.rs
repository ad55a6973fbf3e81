//! A small course run through the service library: accounts, an example
//! project, homework fan-out, two submissions and the statistics.

use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use dclab::demo;
use dclab_service::model::{Column, DesignPayload, ReprRule, Role};
use dclab_service::service::{ManualClock, NewAssignment, NewNotice, NewProject, NewUser, Service};
use dclab_service::store::{BlobStore, Store};
use dclab_service::Config;

fn netlist(text: &str) -> DesignPayload {
    DesignPayload::Netlist { circuit: serde_json::from_str(text).unwrap() }
}

fn main() -> Result<(), dclab_service::ServiceError> {
    let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2026, 9, 7, 9, 0, 0).unwrap()));
    let svc = Service::new(Store::in_memory(), BlobStore::in_memory(), clock.clone(), &Config::default());

    let prof = svc.create_user(None, NewUser { name: "prof".into(), role: Role::Instructor, password: "secret".into() })?;
    let ann = svc.create_user(Some(&prof), NewUser { name: "ann".into(), role: Role::Student, password: "a".into() })?;
    let ben = svc.create_user(Some(&prof), NewUser { name: "ben".into(), role: Role::Student, password: "b".into() })?;

    let reference = svc.create_project(
        &prof,
        NewProject {
            name: "Counter 00-59".into(),
            column: Column::Example,
            design: Some(netlist(demo::COUNTER60)),
            stimulus: Some(demo::stimulus(demo::COUNTER_STIM)),
        },
    )?;
    let hw = svc.post_assignment(
        &prof,
        NewAssignment {
            title: "Counter".into(),
            reference_project: reference.id,
            test_points: demo::counter_test_points(),
            required_repr: ReprRule::Either,
            deadline: svc.now() + Duration::days(7),
            roster: None,
        },
    )?;
    svc.post_notice(&prof, NewNotice { title: "Counter homework".into(), body: "Due next Monday".into() })?;

    for (student, design) in [(&ann, demo::COUNTER100), (&ann, demo::COUNTER60), (&ben, demo::COUNTER_STUCK)] {
        clock.advance(Duration::hours(5));
        let project = svc.home(student).homework[0].id;
        let s = svc.submit(student, project, serde_json::json!({ "design": netlist(design) }))?;
        println!("{} submitted at {}: score {:?}", student.name, s.submitted_at, s.score());
    }

    let home = svc.home(&ben);
    println!("ben sees {} notice(s), {} homework project(s)", home.attention.len(), home.homework.len());
    let stats = svc.assignment_stats(&prof, hw.id)?;
    println!(
        "submitted {}/{}, solved {}, tries {:?}",
        stats.submitted_count, stats.roster_size, stats.solved_count, stats.tries_histogram
    );
    for r in &stats.students {
        println!("  {:<4} {} submission(s), scores {:?}, final {}", r.student_name, r.submission_count, r.submission_scores, r.final_score);
    }
    Ok(())
}
