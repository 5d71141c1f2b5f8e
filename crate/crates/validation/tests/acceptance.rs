//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! The L = 512 campaign behind criteria 7 and 8 is written to
//! `$FKCORR_CAMPAIGN_DIR` (default: the target tmpdir) and reused on later
//! runs when its manifest matches the config and its checksums verify.

use std::path::PathBuf;
use std::process::ExitCode;

use fkcorr::Exec;
use fkcorr_validation::*;

fn main() -> ExitCode {
    let exec = Exec::default();
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let campaign_dir = std::env::var_os("FKCORR_CAMPAIGN_DIR").map(PathBuf::from).unwrap_or_else(|| tmp.join("l512"));

    let mut outcomes = Vec::new();
    let mut record = |o: Outcome| {
        print!("{}", o.render());
        outcomes.push(o);
    };
    record(criterion_1(exec));
    record(criterion_2());
    record(criterion_3());
    record(criterion_4(exec));
    record(criterion_5());
    record(criterion_6());
    record(criterion_9(exec));
    record(criterion_10(&tmp.join("determinism")));
    match load_config(&l512_config_path()).and_then(|c| campaign(c, &campaign_dir, exec)) {
        Ok(c) => {
            record(criterion_7(&c));
            record(criterion_8(&c));
        }
        Err(e) => println!("FAIL criteria 7 and 8: campaign in {} failed: {e}", campaign_dir.display()),
    }
    outcomes.sort_by_key(|o| o.id);

    println!("\nacceptance summary");
    for o in &outcomes {
        println!("{}", o.summary());
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/10 criteria pass");
    if passed == 10 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
