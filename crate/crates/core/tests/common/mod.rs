#![allow(dead_code)]

use std::path::PathBuf;

/// Shared fixture tree at the workspace root.
pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
