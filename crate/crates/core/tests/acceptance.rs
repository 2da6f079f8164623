use dtnoise::report::acceptance::{run, CRITERIA};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for n in 1..=CRITERIA {
        let c = run(n);
        println!("{c}");
        if !c.passed {
            failed.push(n);
        }
    }
    println!("acceptance: {}/{CRITERIA} criteria passed", CRITERIA - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
