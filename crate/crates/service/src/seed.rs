//! A demo course: one instructor, 31 students, the 0-59 counter homework
//! and a submission history for 17 of the students.

use chrono::{DateTime, Duration, FixedOffset, TimeZone, Utc};
use dclab::demo;
use serde::{Deserialize, Serialize};

use crate::error::{ErrorCode, Result, ServiceError};
use crate::model::{Column, DesignPayload, Id, Role};
use crate::service::{ManualClock, NewAssignment, NewNotice, NewProject, NewUser, Service};

pub const DEMO_PASSWORD: &str = "dclab-demo";
pub const INSTRUCTOR: &str = "instructor";
pub const ROSTER_SIZE: usize = 31;

/// Attempts of each submitting student in roster order, and whether the
/// last attempt is correct. Students not listed never submit.
pub const COHORT: [(u32, bool); 17] = [
    (1, true),
    (1, true),
    (2, true),
    (3, true),
    (2, true),
    (4, true),
    (7, true),
    (2, true),
    (3, true),
    (1, true),
    (1, false),
    (2, false),
    (1, false),
    (3, false),
    (2, false),
    (1, false),
    (2, false),
];

/// Course-local hour at which each submitter starts working.
const START_HOURS: [u32; 17] = [9, 14, 20, 21, 22, 15, 19, 23, 10, 16, 20, 21, 13, 22, 0, 17, 11];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub instructor: String,
    pub instructor_token: String,
    pub password: String,
    pub students: Vec<String>,
    pub example_project: Id,
    pub assignment: Id,
    pub submissions: u32,
}

pub fn student_name(i: usize) -> String {
    format!("student{:02}", i + 1)
}

fn netlist(text: &str) -> DesignPayload {
    DesignPayload::Netlist { circuit: serde_json::from_str(text).expect("bundled netlist is JSON") }
}

fn counter_vhdl() -> DesignPayload {
    DesignPayload::Vhdl { units: demo::counter60_vhdl(), top: "counter60".into() }
}

/// A counter source with a misspelled signal; it never elaborates.
fn broken_vhdl() -> DesignPayload {
    let units = demo::counter60_vhdl()
        .into_iter()
        .map(|mut u| {
            u.text = u.text.replace("carry = '1'", "cary = '1'");
            u
        })
        .collect();
    DesignPayload::Vhdl { units, top: "counter60".into() }
}

/// The design a student hands in on attempt `j` (0-based) of `n`.
fn attempt(student: usize, j: u32, n: u32, solves: bool) -> DesignPayload {
    if solves && j + 1 == n {
        return if student == 2 || student == 7 { counter_vhdl() } else { netlist(demo::COUNTER60) };
    }
    if student == 12 && j == 0 {
        return broken_vhdl();
    }
    if (student + j as usize) % 2 == 0 {
        netlist(demo::COUNTER100)
    } else {
        netlist(demo::COUNTER_STUCK)
    }
}

/// Start of the course week: Monday 08:00 in the course timezone.
pub fn course_start(tz: FixedOffset) -> DateTime<Utc> {
    tz.with_ymd_and_hms(2026, 3, 2, 8, 0, 0).single().expect("fixed offsets are unambiguous").with_timezone(&Utc)
}

/// Seeds an empty store. Every record goes through the ordinary service
/// operations, with `clock` moved to each event's time.
pub fn seed_demo(svc: &Service, clock: &ManualClock) -> Result<SeedSummary> {
    if !svc.store().read(|db| db.users.is_empty()) {
        return Err(ServiceError::new(ErrorCode::Conflict, "the store already has accounts; seed an empty store"));
    }
    let tz = svc.timezone();
    let start = course_start(tz);
    clock.set(start);
    let teacher =
        svc.create_user(None, NewUser { name: INSTRUCTOR.into(), role: Role::Instructor, password: DEMO_PASSWORD.into() })?;
    let mut students = Vec::with_capacity(ROSTER_SIZE);
    for i in 0..ROSTER_SIZE {
        let u = svc.create_user(
            Some(&teacher),
            NewUser { name: student_name(i), role: Role::Student, password: DEMO_PASSWORD.into() },
        )?;
        students.push(u);
    }

    clock.advance(Duration::minutes(10));
    let example = svc.create_project(
        &teacher,
        NewProject {
            name: "Counter 00-59".into(),
            column: Column::Example,
            design: Some(netlist(demo::COUNTER60)),
            stimulus: Some(demo::stimulus(demo::COUNTER_STIM)),
        },
    )?;
    svc.set_example_visibility(&teacher, example.id, true)?;
    let nand = svc.create_project(
        &teacher,
        NewProject {
            name: "NAND gate".into(),
            column: Column::Example,
            design: Some(netlist(demo::NAND)),
            stimulus: Some(demo::stimulus(demo::NAND_STIM)),
        },
    )?;
    svc.set_example_visibility(&teacher, nand.id, true)?;

    clock.advance(Duration::minutes(5));
    let assignment = svc.post_assignment(
        &teacher,
        NewAssignment {
            title: "Two-digit decimal counter, 00 to 59".into(),
            reference_project: example.id,
            test_points: demo::counter_test_points(),
            required_repr: crate::model::ReprRule::Either,
            deadline: start + Duration::days(7),
            roster: None,
        },
    )?;
    svc.post_notice(
        &teacher,
        NewNotice {
            title: "Counter homework posted".into(),
            body: "Build a counter that shows 00 to 59 on two seven-segment displays. Due in one week.".into(),
        },
    )?;

    let homework: Vec<Id> = svc.store().read(|db| {
        students
            .iter()
            .map(|s| {
                db.projects
                    .values()
                    .find(|p| p.owner == s.id && p.assignment_id == Some(assignment.id))
                    .map(|p| p.id)
                    .expect("fan-out created one project per student")
            })
            .collect()
    });
    let mut count = 0;
    for (i, &(tries, solves)) in COHORT.iter().enumerate() {
        let first = start + Duration::days(1 + (i as i64 % 6)) + Duration::hours(START_HOURS[i] as i64 - 8);
        for j in 0..tries {
            clock.set(first + Duration::minutes(40 * j as i64));
            let body = serde_json::json!({ "design": attempt(i, j, tries, solves) });
            svc.submit(&students[i], homework[i], body)?;
            count += 1;
        }
    }
    Ok(SeedSummary {
        instructor: teacher.name,
        instructor_token: teacher.token,
        password: DEMO_PASSWORD.into(),
        students: students.into_iter().map(|s| s.name).collect(),
        example_project: example.id,
        assignment: assignment.id,
        submissions: count,
    })
}
