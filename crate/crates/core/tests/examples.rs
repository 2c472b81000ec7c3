//! Every example runs to completion. `cargo test` builds the examples next
//! to the test binaries, so this runs the compiled programs directly.

use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: [&str; 6] = [
    "fit_and_tangent",
    "influence_report",
    "active_query",
    "lissa_sgdf",
    "regularity_selection",
    "heuristic_expectation",
];

fn examples_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

#[test]
fn examples_run() {
    let dir = examples_dir();
    for name in EXAMPLES {
        let path = dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
        assert!(path.exists(), "{} was not built; run the full `cargo test` so examples are compiled", path.display());
        let out = Command::new(&path).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}
