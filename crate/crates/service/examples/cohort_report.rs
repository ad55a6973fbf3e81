//! Seeds the demo cohort and draws the two histograms as text bars.

use std::sync::Arc;

use chrono::Utc;
use dclab_service::seed::seed_demo;
use dclab_service::service::{ManualClock, Service};
use dclab_service::store::{BlobStore, Store};
use dclab_service::Config;

fn bar(n: u32) -> String {
    "#".repeat(n as usize)
}

fn main() {
    let mut cfg = Config::default();
    if let Some(tz) = std::env::args().nth(1) {
        cfg.course_timezone = dclab_service::config::parse_offset(&tz).expect("offset like +08:00");
    }
    let clock = Arc::new(ManualClock::new(Utc::now()));
    let svc = Service::new(Store::in_memory(), BlobStore::in_memory(), clock.clone(), &cfg);
    let summary = seed_demo(&svc, &clock).unwrap();
    let teacher = svc.authenticate(&summary.instructor_token).unwrap();
    let st = svc.assignment_stats(&teacher, summary.assignment).unwrap();

    println!("{} of {} students submitted, {} solved", st.submitted_count, st.roster_size, st.solved_count);
    println!("\nsubmissions per student");
    for r in st.students.iter().filter(|r| r.submission_count > 0) {
        let mark = if r.final_score == 100 { "solved" } else { "" };
        println!("{}", format!("  {} {:<8} {mark}", r.student_name, bar(r.submission_count)).trim_end());
    }
    println!("\nsubmissions by hour ({})", st.timezone);
    for (h, n) in st.hourly_histogram.iter().enumerate() {
        println!("  {h:02}:00 {}", bar(*n));
    }
}
