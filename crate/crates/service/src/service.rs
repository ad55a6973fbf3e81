//! Course operations: accounts, the home columns, projects, homework
//! fan-out, submissions with grading, and statistics.

use std::sync::{Arc, Mutex};

use chrono::{Duration, FixedOffset, Utc};
use dclab::design::{BackendError, Design, InternalBackend, SimBackend};
use dclab::grader::{grade, score, GradeError, GradeReport, TestPoint, TestPointResult, Verdict};
use dclab::sim::{export_vcd, SimConfig, SimRun, Watch};
use dclab::stimulus::StimulusSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{ErrorCode, Result, ServiceError};
use crate::model::*;
use crate::stats::{cohort_stats, CohortStats};
use crate::store::{BlobStore, JsonFile, Store};

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Utc::now()
    }
}

/// A clock that moves only when told to.
pub struct ManualClock(Mutex<Timestamp>);

impl ManualClock {
    pub fn new(t: Timestamp) -> Self {
        ManualClock(Mutex::new(t))
    }

    pub fn set(&self, t: Timestamp) {
        *self.0.lock().expect("clock lock") = t;
    }

    pub fn advance(&self, d: Duration) {
        *self.0.lock().expect("clock lock") += d;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        *self.0.lock().expect("clock lock")
    }
}

/// Wraps a backend and caps the delta cycles of every run.
pub struct LimitedBackend<B> {
    pub inner: B,
    pub max_deltas_per_instant: u32,
}

impl<B: SimBackend> SimBackend for LimitedBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn compile(&self, design: &Design) -> Result<Design, BackendError> {
        self.inner.compile(design)
    }

    fn run(&self, design: &Design, stim: &StimulusSet, cfg: &SimConfig) -> Result<SimRun, BackendError> {
        let cfg = SimConfig { max_deltas_per_instant: cfg.max_deltas_per_instant.min(self.max_deltas_per_instant), ..cfg.clone() };
        self.inner.run(design, stim, &cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewUser {
    pub name: String,
    pub role: Role,
    pub password: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Login {
    pub name: String,
    pub password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub user: UserView,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewProject {
    pub name: String,
    pub column: Column,
    #[serde(default)]
    pub design: Option<DesignPayload>,
    #[serde(default)]
    pub stimulus: Option<StimulusSet>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectUpdate {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub design: Option<DesignPayload>,
    #[serde(default)]
    pub stimulus: Option<StimulusSet>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewAssignment {
    pub title: String,
    pub reference_project: Id,
    pub test_points: Vec<TestPoint>,
    #[serde(default = "either")]
    pub required_repr: ReprRule,
    pub deadline: Timestamp,
    /// Defaults to every student account.
    #[serde(default)]
    pub roster: Option<Vec<Id>>,
}

fn either() -> ReprRule {
    ReprRule::Either
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewNotice {
    pub title: String,
    pub body: String,
}

/// Body of a submission.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitRequest {
    pub design: DesignPayload,
    /// Playground only; falls back to the project's stimulus.
    #[serde(default)]
    pub stimulus: Option<StimulusSet>,
}

/// An ad-hoc run of a design, or of a project the caller may read.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    #[serde(default)]
    pub design: Option<DesignPayload>,
    #[serde(default)]
    pub project: Option<Id>,
    pub stimulus: StimulusSet,
    #[serde(default)]
    pub watch: Watch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoticeView {
    pub id: Id,
    pub title: String,
    pub body: String,
    pub author: UserView,
    pub posted_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: Id,
    pub name: String,
    pub owner: Id,
    pub column: Column,
    pub repr: dclab::design::Repr,
    pub updated_at: Timestamp,
    pub assignment_id: Option<Id>,
    pub deadline: Option<Timestamp>,
    pub visible: bool,
}

/// The four home-page columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Home {
    pub user: UserView,
    pub attention: Vec<NoticeView>,
    pub homework: Vec<ProjectSummary>,
    pub playground: Vec<ProjectSummary>,
    pub example: Vec<ProjectSummary>,
}

pub struct Service {
    store: Store,
    blobs: BlobStore,
    backend: Arc<dyn SimBackend>,
    clock: Arc<dyn Clock>,
    timezone: FixedOffset,
    max_horizon_ns: u64,
}

fn hash_password(salt: &str, password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update(password.as_bytes());
    hex::encode(h.finalize())
}

fn new_secret() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

fn design_error(lines: Vec<String>) -> ServiceError {
    ServiceError::bad_request(lines.join("\n"))
}

/// FAIL on every test point, for submissions that never compiled.
fn failed_report(tps: &[TestPoint], diagnostics: Vec<String>) -> GradeReport {
    GradeReport {
        per_test_point: tps
            .iter()
            .map(|t| TestPointResult { id: t.id.clone(), verdict: Verdict::Fail, first_mismatch: None })
            .collect(),
        passed: 0,
        total: tps.len() as u32,
        score: score(0, tps.len() as u32),
        diagnostics,
    }
}

fn can_read(user: &User, p: &Project) -> bool {
    p.owner == user.id || user.role == Role::Instructor || (p.column == Column::Example && p.visible)
}

fn check_write(user: &User, p: &Project) -> Result<()> {
    if p.column == Column::Example {
        if user.role != Role::Instructor {
            return Err(ServiceError::forbidden("only instructors can modify example projects"));
        }
        return Ok(());
    }
    if p.owner != user.id {
        return Err(ServiceError::forbidden("project belongs to another user"));
    }
    Ok(())
}

fn require_instructor(user: &User) -> Result<()> {
    if user.role != Role::Instructor {
        return Err(ServiceError::forbidden("instructors only"));
    }
    Ok(())
}

impl Service {
    pub fn new(store: Store, blobs: BlobStore, clock: Arc<dyn Clock>, config: &Config) -> Self {
        let backend = LimitedBackend { inner: InternalBackend::builtin(), max_deltas_per_instant: config.max_deltas_per_instant };
        Service {
            store,
            blobs,
            backend: Arc::new(backend),
            clock,
            timezone: config.course_timezone,
            max_horizon_ns: config.max_horizon_ns,
        }
    }

    /// In-memory records and blobs on the system clock.
    pub fn in_memory(config: &Config) -> Self {
        Service::new(Store::in_memory(), BlobStore::in_memory(), Arc::new(SystemClock), config)
    }

    /// Opens the configured store and blob directory, creating the
    /// bootstrap instructor if there are no accounts yet.
    pub fn open(config: &Config, clock: Arc<dyn Clock>) -> Result<Self> {
        let store = Store::open(Box::new(JsonFile::new(&config.store_path)))?;
        let svc = Service::new(store, BlobStore::dir(&config.blob_dir), clock, config);
        if let Some(b) = &config.bootstrap {
            if svc.store.read(|db| db.users.is_empty()) {
                svc.create_user(None, NewUser { name: b.name.clone(), role: Role::Instructor, password: b.password.clone() })?;
            }
        }
        Ok(svc)
    }

    pub fn with_backend(mut self, backend: Arc<dyn SimBackend>) -> Self {
        self.backend = backend;
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn blobs(&self) -> &BlobStore {
        &self.blobs
    }

    pub fn timezone(&self) -> FixedOffset {
        self.timezone
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    pub fn authenticate(&self, token: &str) -> Result<User> {
        self.store
            .read(|db| db.user_by_token(token).cloned())
            .ok_or_else(|| ServiceError::new(ErrorCode::Unauthorized, "missing or unknown token"))
    }

    /// Creates an account. Without a caller this only works on an empty
    /// store.
    pub fn create_user(&self, caller: Option<&User>, req: NewUser) -> Result<User> {
        if let Some(c) = caller {
            require_instructor(c)?;
        }
        let name = req.name.trim().to_string();
        if name.is_empty() || req.password.is_empty() {
            return Err(ServiceError::bad_request("name and password must be non-empty"));
        }
        self.store.transact(|db| {
            if caller.is_none() && !db.users.is_empty() {
                return Err(ServiceError::forbidden("accounts are created by instructors"));
            }
            if db.user_by_name(&name).is_some() {
                return Err(ServiceError::new(ErrorCode::Conflict, format!("user {name} exists")));
            }
            let salt = new_secret();
            let user = User {
                id: db.allocate_id(),
                name: name.clone(),
                role: req.role,
                token: new_secret(),
                password_sha256: hash_password(&salt, &req.password),
                salt,
            };
            db.users.insert(user.id, user.clone());
            Ok(user)
        })
    }

    pub fn login(&self, req: &Login) -> Result<LoginResponse> {
        self.store.read(|db| {
            let u = db
                .user_by_name(&req.name)
                .filter(|u| hash_password(&u.salt, &req.password) == u.password_sha256)
                .ok_or_else(|| ServiceError::new(ErrorCode::Unauthorized, "wrong name or password"))?;
            Ok(LoginResponse { token: u.token.clone(), user: u.into() })
        })
    }

    pub fn list_users(&self, caller: &User) -> Result<Vec<UserView>> {
        require_instructor(caller)?;
        Ok(self.store.read(|db| db.users.values().map(UserView::from).collect()))
    }

    pub fn post_notice(&self, caller: &User, req: NewNotice) -> Result<Notice> {
        require_instructor(caller)?;
        let now = self.now();
        self.store.transact(|db| {
            let n = Notice { id: db.allocate_id(), author: caller.id, title: req.title, body: req.body, posted_at: now };
            db.notices.insert(n.id, n.clone());
            Ok(n)
        })
    }

    pub fn home(&self, caller: &User) -> Home {
        self.store.read(|db| {
            let mut attention: Vec<NoticeView> = db
                .notices
                .values()
                .map(|n| NoticeView {
                    id: n.id,
                    title: n.title.clone(),
                    body: n.body.clone(),
                    author: db.users.get(&n.author).map_or(
                        UserView { id: n.author, name: String::new(), role: Role::Instructor },
                        UserView::from,
                    ),
                    posted_at: n.posted_at,
                })
                .collect();
            attention.sort_by(|a, b| b.posted_at.cmp(&a.posted_at).then(b.id.cmp(&a.id)));
            let summary = |p: &Project| ProjectSummary {
                id: p.id,
                name: p.name.clone(),
                owner: p.owner,
                column: p.column,
                repr: p.repr,
                updated_at: p.updated_at,
                assignment_id: p.assignment_id,
                deadline: p.assignment_id.and_then(|a| db.assignments.get(&a)).map(|a| a.deadline),
                visible: p.visible,
            };
            let own = |col: Column| db.projects.values().filter(|p| p.owner == caller.id && p.column == col).map(summary).collect();
            let example = db
                .projects
                .values()
                .filter(|p| p.column == Column::Example && (p.visible || caller.role == Role::Instructor))
                .map(summary)
                .collect();
            Home {
                user: caller.into(),
                attention,
                homework: own(Column::Homework),
                playground: own(Column::Playground),
                example,
            }
        })
    }

    fn check_stimulus(&self, s: &StimulusSet) -> Result<()> {
        s.validate().map_err(|e| ServiceError::bad_request(format!("stimulus {e}")))?;
        if s.horizon_ns > self.max_horizon_ns {
            return Err(ServiceError::new(
                ErrorCode::LimitExceeded,
                format!("horizon {} ns exceeds the limit of {} ns", s.horizon_ns, self.max_horizon_ns),
            ));
        }
        Ok(())
    }

    pub fn create_project(&self, caller: &User, req: NewProject) -> Result<Project> {
        match req.column {
            Column::Playground => {}
            Column::Example => require_instructor(caller)?,
            Column::Homework => return Err(ServiceError::bad_request("homework projects are created by posting an assignment")),
            Column::Attention => return Err(ServiceError::bad_request("the attention column holds notices, not projects")),
        }
        if let Some(s) = &req.stimulus {
            self.check_stimulus(s)?;
        }
        let now = self.now();
        self.store.transact(|db| {
            let p = Project {
                id: db.allocate_id(),
                owner: caller.id,
                name: req.name,
                column: req.column,
                repr: req.design.as_ref().map_or(dclab::design::Repr::Netlist, DesignPayload::repr),
                design: req.design,
                stimulus: req.stimulus,
                created_at: now,
                updated_at: now,
                assignment_id: None,
                visible: false,
            };
            db.projects.insert(p.id, p.clone());
            Ok(p)
        })
    }

    pub fn get_project(&self, caller: &User, id: Id) -> Result<Project> {
        self.store.read(|db| {
            let p = db.projects.get(&id).ok_or_else(|| ServiceError::not_found("project", id))?;
            if !can_read(caller, p) {
                return Err(ServiceError::forbidden("project belongs to another user"));
            }
            Ok(p.clone())
        })
    }

    pub fn update_project(&self, caller: &User, id: Id, req: ProjectUpdate) -> Result<Project> {
        if let Some(s) = &req.stimulus {
            self.check_stimulus(s)?;
        }
        let now = self.now();
        self.store.transact(|db| {
            let p = db.projects.get_mut(&id).ok_or_else(|| ServiceError::not_found("project", id))?;
            if !can_read(caller, p) {
                return Err(ServiceError::forbidden("project belongs to another user"));
            }
            check_write(caller, p)?;
            if let Some(n) = req.name {
                p.name = n;
            }
            if let Some(d) = req.design {
                p.repr = d.repr();
                p.design = Some(d);
            }
            if let Some(s) = req.stimulus {
                p.stimulus = Some(s);
            }
            p.updated_at = now;
            Ok(p.clone())
        })
    }

    pub fn set_example_visibility(&self, caller: &User, id: Id, visible: bool) -> Result<Project> {
        require_instructor(caller)?;
        let now = self.now();
        self.store.transact(|db| {
            let p = db.projects.get_mut(&id).ok_or_else(|| ServiceError::not_found("project", id))?;
            if p.column != Column::Example {
                return Err(ServiceError::bad_request(format!("project {id} is not an example")));
            }
            p.visible = visible;
            p.updated_at = now;
            Ok(p.clone())
        })
    }

    fn reference_design(&self, project: Id) -> Result<Design> {
        let p = self
            .store
            .read(|db| db.projects.get(&project).cloned())
            .ok_or_else(|| ServiceError::not_found("project", project))?;
        if p.column != Column::Example {
            return Err(ServiceError::bad_request(format!("reference project {project} is not an example")));
        }
        let d = p.design.ok_or_else(|| ServiceError::bad_request(format!("reference project {project} has no design")))?;
        d.to_design().map_err(|e| ServiceError::new(ErrorCode::ReferenceInvalid, e.join("\n")))
    }

    /// Posts an assignment and gives every roster student an empty
    /// homework project, all in one transaction. The reference must pass
    /// its own test points first.
    pub fn post_assignment(&self, caller: &User, req: NewAssignment) -> Result<Assignment> {
        require_instructor(caller)?;
        for tp in &req.test_points {
            tp.validate().map_err(|e| ServiceError::bad_request(e.to_string()))?;
            self.check_stimulus(&tp.stimulus)?;
        }
        let reference = self.reference_design(req.reference_project)?;
        match grade(self.backend.as_ref(), &reference, &reference, &req.test_points) {
            Err(GradeError::Reference(m)) => return Err(ServiceError::new(ErrorCode::ReferenceInvalid, m)),
            Err(e @ GradeError::TestPoint { .. }) => return Err(ServiceError::bad_request(e.to_string())),
            Ok(r) => {
                if let Some(bad) = r.per_test_point.iter().find(|t| t.verdict == Verdict::Fail) {
                    return Err(ServiceError::new(
                        ErrorCode::ReferenceInvalid,
                        format!("reference fails its own test point {}", bad.id),
                    ));
                }
            }
        }
        let now = self.now();
        self.store.transact(|db| {
            let roster: Vec<Id> = match &req.roster {
                Some(r) => {
                    for id in r {
                        if db.users.get(id).map(|u| u.role) != Some(Role::Student) {
                            return Err(ServiceError::bad_request(format!("roster entry {id} is not a student")));
                        }
                    }
                    let mut r = r.clone();
                    r.sort_unstable();
                    r.dedup();
                    r
                }
                None => db.users.values().filter(|u| u.role == Role::Student).map(|u| u.id).collect(),
            };
            let a = Assignment {
                id: db.allocate_id(),
                title: req.title.clone(),
                reference_project: req.reference_project,
                test_points: req.test_points.clone(),
                required_repr: req.required_repr,
                deadline: req.deadline,
                posted_at: now,
                posted_by: caller.id,
                roster: roster.clone(),
            };
            db.assignments.insert(a.id, a.clone());
            let repr = if req.required_repr == ReprRule::Vhdl { dclab::design::Repr::Vhdl } else { dclab::design::Repr::Netlist };
            for owner in roster {
                let p = Project {
                    id: db.allocate_id(),
                    owner,
                    name: req.title.clone(),
                    column: Column::Homework,
                    repr,
                    design: None,
                    stimulus: None,
                    created_at: now,
                    updated_at: now,
                    assignment_id: Some(a.id),
                    visible: false,
                };
                db.projects.insert(p.id, p);
            }
            Ok(a)
        })
    }

    pub fn get_assignment(&self, caller: &User, id: Id) -> Result<Assignment> {
        let a = self.store.read(|db| db.assignments.get(&id).cloned()).ok_or_else(|| ServiceError::not_found("assignment", id))?;
        if caller.role != Role::Instructor && !a.roster.contains(&caller.id) {
            return Err(ServiceError::forbidden("not on the roster"));
        }
        Ok(a)
    }

    /// Records a submission. Homework is graded against the assignment;
    /// playground projects are simulated with their own stimulus. A body
    /// that does not parse is still recorded, as a failed submission.
    pub fn submit(&self, caller: &User, project_id: Id, body: serde_json::Value) -> Result<Submission> {
        let submitted_at = self.now();
        let project = self.get_project(caller, project_id)?;
        if project.owner != caller.id {
            return Err(ServiceError::forbidden("only the owner can submit to a project"));
        }
        let parsed: Result<SubmitRequest, Vec<String>> =
            serde_json::from_value(body.clone()).map_err(|e| vec![format!("malformed submission: {e}")]);
        let mut log = String::new();
        let mut trace_vcd = None;
        let mut grade_report = None;
        match project.column {
            Column::Homework => {
                let aid = project.assignment_id.expect("homework projects have an assignment");
                let a = self.store.read(|db| db.assignments.get(&aid).cloned()).ok_or_else(|| ServiceError::not_found("assignment", aid))?;
                let reference = self.reference_design(a.reference_project)?;
                let design = parsed.as_ref().map_err(Clone::clone).and_then(|req| {
                    if !a.required_repr.allows(req.design.repr()) {
                        return Err(vec![format!("this assignment requires {:?} designs", a.required_repr)]);
                    }
                    req.design.to_design()
                });
                let report = match design {
                    Err(diags) => failed_report(&a.test_points, diags),
                    Ok(d) => {
                        let r = grade(self.backend.as_ref(), &d, &reference, &a.test_points)
                            .map_err(|e| ServiceError::new(ErrorCode::ReferenceInvalid, e.to_string()))?;
                        if let (Some(tp), Ok(compiled)) = (a.test_points.first(), self.backend.compile(&d)) {
                            if let Ok(run) = self.backend.run(&compiled, &tp.stimulus, &SimConfig::new(tp.stimulus.horizon_ns)) {
                                trace_vcd = Some(export_vcd(&run.trace));
                                log.push_str(&run.log.to_text());
                            }
                        }
                        r
                    }
                };
                let mut head = format!("score {} ({} of {} test points passed)\n", report.score, report.passed, report.total);
                for t in &report.per_test_point {
                    let v = if t.verdict == Verdict::Pass { "PASS" } else { "FAIL" };
                    head.push_str(&format!("{} {v}", t.id));
                    if let Some(m) = &t.first_mismatch {
                        head.push_str(&format!(": {} at {} ns expected {} got {}", m.signal, m.time_ns, m.expected, m.actual));
                    }
                    head.push('\n');
                }
                for d in &report.diagnostics {
                    head.push_str(d);
                    head.push('\n');
                }
                log.insert_str(0, &head);
                grade_report = Some(report);
            }
            Column::Playground => match &parsed {
                Err(diags) => log = diags.join("\n") + "\n",
                Ok(req) => {
                    let stim = req.stimulus.clone().or(project.stimulus.clone());
                    match (req.design.to_design(), stim) {
                        (Err(diags), _) => log = diags.join("\n") + "\n",
                        (Ok(_), None) => log = "no stimulus: give one with the submission or store it on the project\n".into(),
                        (Ok(d), Some(stim)) => {
                            self.check_stimulus(&stim)?;
                            match self.backend.run(&d, &stim, &SimConfig::new(stim.horizon_ns)) {
                                Ok(run) => {
                                    trace_vcd = Some(export_vcd(&run.trace));
                                    log = run.log.to_text();
                                }
                                Err(e) => log = e.diagnostics().join("\n") + "\n",
                            }
                        }
                    }
                }
            },
            Column::Example | Column::Attention => {
                return Err(ServiceError::bad_request("only homework and playground projects take submissions"));
            }
        }
        let trace_blob = trace_vcd.map(|v| self.blobs.put(&v)).transpose()?;
        let log_blob = self.blobs.put(log.as_bytes())?;
        self.store.transact(|db| {
            let s = Submission {
                id: db.allocate_id(),
                project_id,
                submitter: caller.id,
                submitted_at,
                design: body,
                grade: grade_report,
                trace_blob,
                log_blob,
            };
            if let Some(p) = db.projects.get_mut(&project_id) {
                if let Ok(req) = &parsed {
                    p.repr = req.design.repr();
                    p.design = Some(req.design.clone());
                }
                p.updated_at = submitted_at;
            }
            db.submissions.insert(s.id, s.clone());
            Ok(s)
        })
    }

    pub fn submission_history(&self, caller: &User, project_id: Id) -> Result<Vec<Submission>> {
        let p = self.get_project(caller, project_id)?;
        if p.owner != caller.id && caller.role != Role::Instructor {
            return Err(ServiceError::forbidden("submission history is private"));
        }
        Ok(self.store.read(|db| db.history(project_id).into_iter().cloned().collect()))
    }

    pub fn get_submission(&self, caller: &User, id: Id) -> Result<Submission> {
        let s = self.store.read(|db| db.submissions.get(&id).cloned()).ok_or_else(|| ServiceError::not_found("submission", id))?;
        if s.submitter != caller.id && caller.role != Role::Instructor {
            return Err(ServiceError::forbidden("submission belongs to another user"));
        }
        Ok(s)
    }

    /// The VCD bytes, or `None` when the design never simulated.
    pub fn submission_trace(&self, caller: &User, id: Id) -> Result<Option<Vec<u8>>> {
        let s = self.get_submission(caller, id)?;
        match s.trace_blob {
            None => Ok(None),
            Some(h) => self.blobs.get(&h)?.map(Some).ok_or_else(|| ServiceError::new(ErrorCode::Storage, format!("blob {h} missing"))),
        }
    }

    pub fn submission_log(&self, caller: &User, id: Id) -> Result<String> {
        let s = self.get_submission(caller, id)?;
        let bytes = self.blobs.get(&s.log_blob)?.ok_or_else(|| ServiceError::new(ErrorCode::Storage, "log blob missing"))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub fn assignment_stats(&self, caller: &User, id: Id) -> Result<CohortStats> {
        require_instructor(caller)?;
        self.store.read(|db| {
            let a = db.assignments.get(&id).ok_or_else(|| ServiceError::not_found("assignment", id))?;
            Ok(cohort_stats(db, a, self.timezone))
        })
    }

    /// Runs a design without recording anything.
    pub fn simulate(&self, caller: &User, req: SimulateRequest) -> Result<SimRun> {
        self.check_stimulus(&req.stimulus)?;
        let payload = match (req.design, req.project) {
            (Some(d), None) => d,
            (None, Some(id)) => {
                self.get_project(caller, id)?.design.ok_or_else(|| ServiceError::bad_request(format!("project {id} has no design")))?
            }
            _ => return Err(ServiceError::bad_request("give exactly one of design and project")),
        };
        let design = payload.to_design().map_err(design_error)?;
        let cfg = SimConfig { watch: req.watch, ..SimConfig::new(req.stimulus.horizon_ns) };
        self.backend.run(&design, &req.stimulus, &cfg).map_err(|e| design_error(e.diagnostics()))
    }
}
