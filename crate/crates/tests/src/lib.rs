//! Helpers shared by the acceptance suite.

use std::path::PathBuf;

/// Path of the `sctc` binary built into the same target directory as the
/// running test executable. `cargo test --workspace` builds it; when testing
/// this package alone run `cargo build -p sctc-cli` first.
pub fn sctc_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    // target/<profile>/deps/<test> -> target/<profile>/sctc
    let dir = exe.parent()?.parent()?;
    let bin = dir.join(format!("sctc{}", std::env::consts::EXE_SUFFIX));
    bin.is_file().then_some(bin)
}
