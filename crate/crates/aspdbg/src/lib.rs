//! Command-line debugger for answer-set programs.
//!
//! `aspdbg ground|solve|instrument|debug` expose each pipeline stage of
//! [`aspdbg_core`]; `debug` runs an interactive session on the terminal,
//! as newline-delimited JSON on stdio (`--json`), or on a local socket
//! (`--serve`).

pub mod cli;
pub mod engine;
pub mod protocol;
pub mod source;

use source::Location;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{location}: {message}")]
    Parse { location: Location, message: String },
    #[error("{0}")]
    Input(String),
    #[error("test passed: program coherent with assertions")]
    TestPassed,
}

impl Error {
    /// 2 when the test passed, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::TestPassed => 2,
            _ => 1,
        }
    }
}
