//! One line per acceptance criterion; exits non-zero if any fails.

use meandim::verify::{verify_all, VerifyConfig};

fn main() {
    let results = verify_all(&VerifyConfig::default()).expect("default configuration is valid");
    let mut failed = 0;
    for r in &results {
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
