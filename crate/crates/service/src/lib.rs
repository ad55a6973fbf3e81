//! Course service for dclab: accounts, projects, homework grading,
//! submission history and cohort statistics behind an HTTP API, plus the
//! `dclab` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod http;
pub mod model;
pub mod seed;
pub mod service;
pub mod stats;
pub mod store;

pub use config::Config;
pub use error::{ErrorCode, ServiceError};
pub use service::Service;
