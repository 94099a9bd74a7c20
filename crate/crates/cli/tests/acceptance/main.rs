//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

/// Fails the criterion with a formatted message unless `cond` holds.
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

mod bm25;
mod dedup;
mod golden;
mod kb;
mod minhash;
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

/// Outcome of one criterion: a short summary of what was measured.
pub type Outcome = Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("minhash_estimator", minhash::run),
        ("dedup_end_to_end", dedup::run),
        ("bm25_correctness", bm25::run),
        ("kb_mapping", kb::run),
        ("link_threshold", links::run),
        ("aggregation_oracle", aggregation::run),
        ("stability_check", stability::run),
        ("golden_pipeline", golden::run),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}
