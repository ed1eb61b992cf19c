//! Reporting and binary lookup for the acceptance target.
//!
//! Lives in its own package so that its test target runs after every suite
//! of `nzsg`; a failing criterion then never hides the other results.

use std::path::PathBuf;
use std::process::Command;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Verdict { name, pass, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("{tag} {:<28} {}", self.name, self.detail)
    }
}

/// Prints every verdict and returns the number of failures.
pub fn report(verdicts: &[Verdict]) -> usize {
    for v in verdicts {
        println!("{}", v.line());
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    failed
}

/// The `nzsg` binary next to the running test executable, built on demand
/// when the workspace has not produced it yet.
pub fn nzsg_binary() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    // target/<profile>/deps/acceptance-<hash>
    let profile_dir = exe.parent().and_then(|d| d.parent()).expect("target layout");
    let bin = profile_dir.join(format!("nzsg{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = option_env!("CARGO").unwrap_or("cargo");
        let status = Command::new(cargo)
            .args(["build", "-p", "nzsg", "--bin", "nzsg"])
            .status()
            .expect("cargo runs");
        assert!(status.success(), "building the nzsg binary failed");
    }
    bin
}
