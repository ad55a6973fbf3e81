//! Records kept by the course service.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use dclab::design::{Design, Repr};
use dclab::grader::{GradeReport, TestPoint};
use dclab::netlist::deserialize_circuit;
use dclab::stimulus::StimulusSet;
use dclab::vhdl::VhdlUnit;
use serde::{Deserialize, Serialize};

pub type Id = u64;
pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Student,
    Instructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: Id,
    pub name: String,
    pub role: Role,
    pub token: String,
    pub salt: String,
    /// Hex SHA-256 of salt followed by password.
    pub password_sha256: String,
}

/// What other users may see of an account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserView {
    pub id: Id,
    pub name: String,
    pub role: Role,
}

impl From<&User> for UserView {
    fn from(u: &User) -> Self {
        UserView { id: u.id, name: u.name.clone(), role: u.role }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Column {
    Attention,
    Homework,
    Playground,
    Example,
}

/// A design as sent by clients: a netlist file or VHDL sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "UPPERCASE", deny_unknown_fields)]
pub enum DesignPayload {
    /// `circuit` holds a netlist file document.
    Netlist { circuit: serde_json::Value },
    Vhdl { units: Vec<VhdlUnit>, top: String },
}

impl DesignPayload {
    pub fn repr(&self) -> Repr {
        match self {
            DesignPayload::Netlist { .. } => Repr::Netlist,
            DesignPayload::Vhdl { .. } => Repr::Vhdl,
        }
    }

    /// Parses the netlist document; VHDL is left for the backend.
    pub fn to_design(&self) -> Result<Design, Vec<String>> {
        match self {
            DesignPayload::Netlist { circuit } => {
                let bytes = serde_json::to_vec(circuit).expect("JSON value serializes");
                deserialize_circuit(&bytes).map(Design::Circuit).map_err(|e| vec![format!("netlist: {e}")])
            }
            DesignPayload::Vhdl { units, top } => Ok(Design::Vhdl { units: units.clone(), top: top.clone() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: Id,
    pub owner: Id,
    pub name: String,
    pub column: Column,
    pub repr: Repr,
    pub design: Option<DesignPayload>,
    /// Stimulus used for playground runs.
    pub stimulus: Option<StimulusSet>,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
    pub assignment_id: Option<Id>,
    /// Examples only: whether students can see it.
    pub visible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReprRule {
    Netlist,
    Vhdl,
    Either,
}

impl ReprRule {
    pub fn allows(self, r: Repr) -> bool {
        matches!((self, r), (ReprRule::Either, _) | (ReprRule::Netlist, Repr::Netlist) | (ReprRule::Vhdl, Repr::Vhdl))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub id: Id,
    pub title: String,
    pub reference_project: Id,
    pub test_points: Vec<TestPoint>,
    pub required_repr: ReprRule,
    pub deadline: Timestamp,
    pub posted_at: Timestamp,
    pub posted_by: Id,
    pub roster: Vec<Id>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: Id,
    pub project_id: Id,
    pub submitter: Id,
    pub submitted_at: Timestamp,
    /// The request body as received.
    pub design: serde_json::Value,
    /// Homework only.
    pub grade: Option<GradeReport>,
    /// Content hash of the VCD, when the design simulated.
    pub trace_blob: Option<String>,
    /// Content hash of the text log.
    pub log_blob: String,
}

impl Submission {
    pub fn score(&self) -> Option<u32> {
        self.grade.as_ref().map(|g| g.score)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notice {
    pub id: Id,
    pub author: Id,
    pub title: String,
    pub body: String,
    pub posted_at: Timestamp,
}

/// Every persisted record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Db {
    pub next_id: Id,
    pub users: BTreeMap<Id, User>,
    pub projects: BTreeMap<Id, Project>,
    pub assignments: BTreeMap<Id, Assignment>,
    pub submissions: BTreeMap<Id, Submission>,
    pub notices: BTreeMap<Id, Notice>,
}

impl Db {
    pub fn allocate_id(&mut self) -> Id {
        self.next_id += 1;
        self.next_id
    }

    pub fn user_by_token(&self, token: &str) -> Option<&User> {
        self.users.values().find(|u| u.token == token)
    }

    pub fn user_by_name(&self, name: &str) -> Option<&User> {
        self.users.values().find(|u| u.name == name)
    }

    /// Submissions of a project ordered by time, then id.
    pub fn history(&self, project: Id) -> Vec<&Submission> {
        let mut v: Vec<&Submission> = self.submissions.values().filter(|s| s.project_id == project).collect();
        v.sort_by_key(|s| (s.submitted_at, s.id));
        v
    }
}
