mod common;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use chrono::Duration;
use common::*;
use dclab::demo;
use dclab_service::model::{Column, Db, DesignPayload, ReprRule};
use dclab_service::service::{NewAssignment, NewNotice, NewProject, ProjectUpdate, SimulateRequest};
use dclab_service::stats::{cohort_stats, final_score, tries_before_success};
use dclab_service::store::{NoPersist, Persist};
use dclab_service::{ErrorCode, ServiceError};

#[test]
fn assignment_fans_out_one_project_per_student() {
    let c = Course::new(31);
    let a = c.counter_assignment(7);
    assert_eq!(a.roster.len(), 31);
    let owners: Vec<_> = c.svc.store().read(|db| {
        db.projects.values().filter(|p| p.column == Column::Homework && p.assignment_id == Some(a.id)).map(|p| p.owner).collect()
    });
    let mut expected: Vec<_> = c.students.iter().map(|s| s.id).collect();
    expected.sort();
    assert_eq!(owners, expected);
    for s in &c.students {
        let home = c.svc.home(s);
        assert_eq!(home.homework.len(), 1);
        assert_eq!(home.homework[0].deadline, Some(a.deadline));
    }
}

#[test]
fn empty_roster_posts_without_projects() {
    let c = Course::new(3);
    let r = c.example(demo::COUNTER60);
    let a = c
        .svc
        .post_assignment(
            &c.teacher,
            NewAssignment {
                title: "nobody".into(),
                reference_project: r.id,
                test_points: demo::counter_test_points(),
                required_repr: ReprRule::Either,
                deadline: t0(),
                roster: Some(vec![]),
            },
        )
        .unwrap();
    assert!(a.roster.is_empty());
    assert_eq!(c.svc.store().read(|db| db.projects.values().filter(|p| p.column == Column::Homework).count()), 0);
}

#[test]
fn broken_reference_is_rejected_without_fan_out() {
    let c = Course::new(5);
    let r = c.example(demo::COUNTER60);
    let mut tps = demo::counter_test_points();
    tps[2].observed.push("tens_dp".into());
    let before = c.svc.store().read(Db::clone);
    let e = c
        .svc
        .post_assignment(
            &c.teacher,
            NewAssignment {
                title: "broken".into(),
                reference_project: r.id,
                test_points: tps.clone(),
                required_repr: ReprRule::Either,
                deadline: t0(),
                roster: None,
            },
        )
        .unwrap_err();
    assert_eq!(e.code, ErrorCode::ReferenceInvalid);
    assert!(e.message.contains(&tps[2].id), "{}", e.message);
    assert_eq!(c.svc.store().read(Db::clone), before);
}

/// Saves until told to fail.
struct Flaky {
    fail: Arc<AtomicBool>,
}

impl Persist for Flaky {
    fn load(&self) -> dclab_service::error::Result<Option<Db>> {
        NoPersist.load()
    }

    fn save(&self, _: &Db) -> dclab_service::error::Result<()> {
        if self.fail.load(Ordering::SeqCst) {
            return Err(ServiceError::new(ErrorCode::Storage, "disk gone"));
        }
        Ok(())
    }
}

#[test]
fn fan_out_is_all_or_nothing() {
    let fail = Arc::new(AtomicBool::new(false));
    let c = Course::with_persist(Box::new(Flaky { fail: fail.clone() }), 31);
    let r = c.example(demo::COUNTER60);
    fail.store(true, Ordering::SeqCst);
    let req = NewAssignment {
        title: "counter".into(),
        reference_project: r.id,
        test_points: demo::counter_test_points(),
        required_repr: ReprRule::Either,
        deadline: t0(),
        roster: None,
    };
    let e = c.svc.post_assignment(&c.teacher, req.clone()).unwrap_err();
    assert_eq!(e.code, ErrorCode::Storage);
    let count = |c: &Course| c.svc.store().read(|db| (db.assignments.len(), db.projects.values().filter(|p| p.column == Column::Homework).count()));
    assert_eq!(count(&c), (0, 0));
    fail.store(false, Ordering::SeqCst);
    c.svc.post_assignment(&c.teacher, req).unwrap();
    assert_eq!(count(&c), (1, 31));
}

#[test]
fn correct_counter_scores_full_marks_and_keeps_artifacts() {
    let c = Course::new(1);
    let a = c.counter_assignment(7);
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    let sub = c.submit(s, p, demo::COUNTER60);
    assert_eq!(sub.score(), Some(100));
    let vcd = c.svc.submission_trace(s, sub.id).unwrap().unwrap();
    assert!(vcd.starts_with(b"$version"));
    let log = c.svc.submission_log(s, sub.id).unwrap();
    assert!(log.starts_with("score 100 (4 of 4 test points passed)\n"), "{log}");
    let wrong = c.submit(s, p, demo::COUNTER100);
    assert_eq!(wrong.score(), Some(75));
    assert!(c.svc.submission_log(s, wrong.id).unwrap().contains("FAIL: tens_a at"));
}

#[test]
fn malformed_submissions_are_recorded_as_failures() {
    let c = Course::new(1);
    let a = c.counter_assignment(7);
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    let sub = c.svc.submit(s, p, serde_json::json!({ "design": { "repr": "SPICE" } })).unwrap();
    assert_eq!(sub.score(), Some(0));
    assert!(c.svc.submission_trace(s, sub.id).unwrap().is_none());
    assert!(c.svc.submission_log(s, sub.id).unwrap().contains("malformed submission"));
    assert_eq!(c.svc.submission_history(s, p).unwrap().len(), 1);
}

#[test]
fn representation_rule_is_enforced() {
    let c = Course::new(1);
    let r = c.example(demo::COUNTER60);
    let a = c
        .svc
        .post_assignment(
            &c.teacher,
            NewAssignment {
                title: "vhdl only".into(),
                reference_project: r.id,
                test_points: demo::counter_test_points(),
                required_repr: ReprRule::Vhdl,
                deadline: t0() + Duration::days(1),
                roster: None,
            },
        )
        .unwrap();
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    assert_eq!(c.submit(s, p, demo::COUNTER60).score(), Some(0));
    let vhdl = DesignPayload::Vhdl { units: demo::counter60_vhdl(), top: "counter60".into() };
    let ok = c.svc.submit(s, p, serde_json::json!({ "design": vhdl })).unwrap();
    assert_eq!(ok.score(), Some(100));
}

#[test]
fn late_full_score_does_not_raise_the_final_score() {
    let c = Course::new(1);
    let a = c.counter_assignment(1);
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    c.clock.set(a.deadline - Duration::hours(1));
    c.submit(s, p, demo::COUNTER100);
    c.clock.set(a.deadline + Duration::nanoseconds(1));
    let late = c.submit(s, p, demo::COUNTER60);
    assert_eq!(late.score(), Some(100));
    let st = c.svc.assignment_stats(&c.teacher, a.id).unwrap();
    assert_eq!(st.students[0].final_score, 75);
    assert_eq!(st.students[0].submission_count, 2);
    assert_eq!(st.solved_count, 1);
}

#[test]
fn seven_tries_count_seven() {
    let c = Course::new(1);
    let a = c.counter_assignment(7);
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    for i in 0..7 {
        c.clock.advance(Duration::minutes(5));
        c.submit(s, p, if i == 6 { demo::COUNTER60 } else { demo::COUNTER_STUCK });
    }
    let st = c.svc.assignment_stats(&c.teacher, a.id).unwrap();
    assert_eq!(st.students[0].submission_count, 7);
    assert_eq!(st.tries_histogram.get(&7), Some(&1));
}

#[test]
fn stats_without_submissions_are_empty() {
    let c = Course::new(4);
    let a = c.counter_assignment(7);
    let st = c.svc.assignment_stats(&c.teacher, a.id).unwrap();
    assert_eq!((st.submitted_count, st.submitted_ratio, st.solved_count, st.total_submissions), (0, 0.0, 0, 0));
    assert!(st.tries_histogram.is_empty());
    assert_eq!(st.hourly_histogram, vec![0; 24]);
    let e = c.svc.assignment_stats(&c.students[0], a.id).unwrap_err();
    assert_eq!(e.code, ErrorCode::Forbidden);
}

#[test]
fn stats_rebuild_from_submissions_alone() {
    let c = Course::new(3);
    let a = c.counter_assignment(2);
    for (i, s) in c.students.iter().enumerate() {
        let p = c.homework_of(s, a.id);
        for j in 0..=i {
            c.clock.advance(Duration::hours(7));
            c.submit(s, p, if j == 1 { demo::COUNTER60 } else { demo::COUNTER100 });
        }
    }
    let served = c.svc.assignment_stats(&c.teacher, a.id).unwrap();
    // Independent recomputation from the raw submission rows.
    let rows: Vec<_> = c.svc.store().read(|db| {
        db.submissions
            .values()
            .map(|s| (db.projects[&s.project_id].owner, s.submitted_at, s.id, s.score().unwrap()))
            .collect()
    });
    for rec in &served.students {
        let mut mine: Vec<_> = rows.iter().filter(|r| r.0 == rec.student_id).collect();
        mine.sort_by_key(|r| (r.1, r.2));
        let scores: Vec<u32> = mine.iter().map(|r| r.3).collect();
        let pairs: Vec<_> = mine.iter().map(|r| (r.1, r.3)).collect();
        assert_eq!(rec.submission_scores, scores);
        assert_eq!(rec.final_score, final_score(&pairs, a.deadline));
        assert_eq!(rec.submission_count as usize, mine.len());
    }
    assert_eq!(served.total_submissions as usize, rows.len());
    assert_eq!(served.hourly_histogram.iter().sum::<u32>() as usize, rows.len());
    let solvers = served.students.iter().filter(|r| tries_before_success(&r.submission_scores).is_some()).count();
    assert_eq!(served.solved_count as usize, solvers);
    let again = c.svc.store().read(|db| cohort_stats(db, &db.assignments[&a.id], c.svc.timezone()));
    assert_eq!(again, served);
}

#[test]
fn recorded_submissions_never_change() {
    let c = Course::new(1);
    let a = c.counter_assignment(7);
    let s = &c.students[0];
    let p = c.homework_of(s, a.id);
    let first = c.submit(s, p, demo::COUNTER100);
    c.clock.advance(Duration::minutes(1));
    c.submit(s, p, demo::COUNTER60);
    c.svc.update_project(s, p, ProjectUpdate { name: Some("renamed".into()), design: Some(netlist(demo::NAND)), stimulus: None }).unwrap();
    c.svc.set_example_visibility(&c.teacher, a.reference_project, true).unwrap();
    c.svc.update_project(&c.teacher, a.reference_project, ProjectUpdate { name: None, design: Some(netlist(demo::COUNTER100)), stimulus: None }).unwrap();
    assert_eq!(c.svc.get_submission(s, first.id).unwrap(), first);
    let h = c.svc.submission_history(s, p).unwrap();
    assert_eq!(h[0], first);
    assert_eq!(h.len(), 2);
}

fn code<T: std::fmt::Debug>(r: Result<T, ServiceError>) -> ErrorCode {
    r.unwrap_err().code
}

#[test]
fn permission_matrix() {
    let c = Course::new(2);
    let (alice, bob) = (&c.students[0], &c.students[1]);

    let ex = c.example(demo::NAND);
    assert_eq!(code(c.svc.get_project(alice, ex.id)), ErrorCode::Forbidden, "hidden examples are private");
    c.svc.set_example_visibility(&c.teacher, ex.id, true).unwrap();
    assert_eq!(c.svc.get_project(alice, ex.id).unwrap().id, ex.id);
    let e = c.svc.update_project(alice, ex.id, ProjectUpdate { name: Some("mine".into()), design: None, stimulus: None }).unwrap_err();
    assert_eq!(e.code, ErrorCode::Forbidden);
    assert!(e.message.contains("permission") || e.message.contains("only instructors"), "{}", e.message);
    assert_eq!(code(c.svc.set_example_visibility(alice, ex.id, false)), ErrorCode::Forbidden);

    let new = |col| NewProject { name: "p".into(), column: col, design: Some(netlist(demo::NAND)), stimulus: None };
    assert_eq!(code(c.svc.create_project(alice, new(Column::Example))), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.create_project(alice, new(Column::Homework))), ErrorCode::BadRequest);
    let mine = c.svc.create_project(alice, new(Column::Playground)).unwrap();
    assert_eq!(code(c.svc.get_project(bob, mine.id)), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.submit(bob, mine.id, serde_json::json!({}))), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.submission_history(bob, mine.id)), ErrorCode::Forbidden);
    assert!(c.svc.submission_history(&c.teacher, mine.id).unwrap().is_empty());

    assert_eq!(code(c.svc.post_notice(alice, NewNotice { title: "t".into(), body: "b".into() })), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.list_users(alice)), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.create_user(Some(alice), dclab_service::service::NewUser {
        name: "x".into(),
        role: dclab_service::model::Role::Student,
        password: "x".into()
    })), ErrorCode::Forbidden);
    assert_eq!(code(c.svc.get_project(alice, 9999)), ErrorCode::NotFound);
    assert_eq!(code(c.svc.authenticate("nope")), ErrorCode::Unauthorized);
}

#[test]
fn notices_reach_every_student_with_author_and_date() {
    let c = Course::new(3);
    c.clock.advance(Duration::hours(3));
    let n = c.svc.post_notice(&c.teacher, NewNotice { title: "Lab moved".into(), body: "Room 204".into() }).unwrap();
    for s in &c.students {
        let home = c.svc.home(s);
        assert_eq!(home.attention.len(), 1);
        let v = &home.attention[0];
        assert_eq!((v.id, v.author.name.as_str(), v.posted_at), (n.id, "teacher", t0() + Duration::hours(3)));
    }
}

#[test]
fn playground_submissions_are_simulated_not_graded() {
    let c = Course::new(1);
    let s = &c.students[0];
    let p = c
        .svc
        .create_project(
            s,
            NewProject {
                name: "nand".into(),
                column: Column::Playground,
                design: None,
                stimulus: Some(demo::stimulus(demo::NAND_STIM)),
            },
        )
        .unwrap();
    assert!(c.svc.submission_history(s, p.id).unwrap().is_empty());
    let sub = c.svc.submit(s, p.id, serde_json::json!({ "design": netlist(demo::NAND) })).unwrap();
    assert!(sub.grade.is_none());
    let vcd = c.svc.submission_trace(s, sub.id).unwrap().unwrap();
    let run = c
        .svc
        .simulate(
            s,
            SimulateRequest {
                design: None,
                project: Some(p.id),
                stimulus: demo::stimulus(demo::NAND_STIM),
                watch: Default::default(),
            },
        )
        .unwrap();
    assert_eq!(dclab::sim::export_vcd(&run.trace), vcd);
}

#[test]
fn horizons_beyond_the_limit_are_refused() {
    let c = Course::new(1);
    let mut stim = demo::stimulus(demo::NAND_STIM);
    stim.horizon_ns = 20_000_000_000;
    let e = c
        .svc
        .simulate(&c.students[0], SimulateRequest { design: Some(netlist(demo::NAND)), project: None, stimulus: stim, watch: Default::default() })
        .unwrap_err();
    assert_eq!(e.code, ErrorCode::LimitExceeded);
}
