#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use dclab::demo;
use dclab_service::model::{Column, DesignPayload, Id, Project, Role, User};
use dclab_service::service::{ManualClock, NewAssignment, NewProject, NewUser, Service};
use dclab_service::store::{BlobStore, Persist, Store};
use dclab_service::Config;

pub const PASSWORD: &str = "pw";

pub fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

pub fn netlist(text: &str) -> DesignPayload {
    DesignPayload::Netlist { circuit: serde_json::from_str(text).unwrap() }
}

pub fn t0() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 3, 2, 0, 0, 0).unwrap()
}

pub struct Course {
    pub svc: Arc<Service>,
    pub clock: Arc<ManualClock>,
    pub teacher: User,
    pub students: Vec<User>,
}

impl Course {
    /// An in-memory course with `n` students.
    pub fn new(n: usize) -> Course {
        Course::with_store(Store::in_memory(), n)
    }

    pub fn with_persist(p: Box<dyn Persist>, n: usize) -> Course {
        Course::with_store(Store::open(p).unwrap(), n)
    }

    fn with_store(store: Store, n: usize) -> Course {
        let clock = Arc::new(ManualClock::new(t0()));
        let svc = Arc::new(Service::new(store, BlobStore::in_memory(), clock.clone(), &Config::default()));
        let teacher = svc
            .create_user(None, NewUser { name: "teacher".into(), role: Role::Instructor, password: PASSWORD.into() })
            .unwrap();
        let students = (0..n)
            .map(|i| {
                svc.create_user(
                    Some(&teacher),
                    NewUser { name: format!("s{i}"), role: Role::Student, password: PASSWORD.into() },
                )
                .unwrap()
            })
            .collect();
        Course { svc, clock, teacher, students }
    }

    pub fn example(&self, design: &str) -> Project {
        self.svc
            .create_project(
                &self.teacher,
                NewProject {
                    name: "reference".into(),
                    column: Column::Example,
                    design: Some(netlist(design)),
                    stimulus: Some(demo::stimulus(demo::COUNTER_STIM)),
                },
            )
            .unwrap()
    }

    /// Posts the counter homework with the four bundled test points.
    pub fn counter_assignment(&self, deadline_days: i64) -> dclab_service::model::Assignment {
        let reference = self.example(demo::COUNTER60);
        self.svc
            .post_assignment(
                &self.teacher,
                NewAssignment {
                    title: "counter".into(),
                    reference_project: reference.id,
                    test_points: demo::counter_test_points(),
                    required_repr: dclab_service::model::ReprRule::Either,
                    deadline: t0() + Duration::days(deadline_days),
                    roster: None,
                },
            )
            .unwrap()
    }

    pub fn homework_of(&self, student: &User, assignment: Id) -> Id {
        self.svc.store().read(|db| {
            db.projects
                .values()
                .find(|p| p.owner == student.id && p.assignment_id == Some(assignment))
                .map(|p| p.id)
                .unwrap()
        })
    }

    pub fn submit(&self, student: &User, project: Id, design: &str) -> dclab_service::model::Submission {
        self.svc.submit(student, project, serde_json::json!({ "design": netlist(design) })).unwrap()
    }
}
