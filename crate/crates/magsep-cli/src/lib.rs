//! Library half of the command-line frontend: the run configuration and the
//! subcommand implementations, kept out of main so they can be unit tested.

pub mod commands;
pub mod config;

pub use commands::{cmd_integrate, cmd_list, cmd_reduce, cmd_verify, CommandOutput};
pub use config::RunConfig;

use std::io::Write as _;
use std::path::Path;

/// Write via a temporary file in the same directory and rename into place,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_file_name(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
