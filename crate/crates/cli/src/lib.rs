//! Front end for the `entrobound` binary: argument grammar, subcommands and
//! deterministic report rendering.

pub mod commands;
pub mod grammar;
pub mod report;
pub mod table1;
pub mod verify;

use entrobound::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;
pub const EXIT_EQUAL_EXPONENTS: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;

/// Exit status once a report was produced: a recorded counterexample means a failed check.
pub fn report_exit_code(failure: Option<&serde_json::Value>) -> i32 {
    if failure.is_some() {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_)
        | Error::Io(_)
        | Error::InvalidParameter(_)
        | Error::IndexOutOfRange { .. }
        | Error::UnusableTail
        | Error::DimensionTooLarge(_)
        | Error::ResolutionTooCoarse { .. } => EXIT_INPUT,
        Error::Divergent { .. } => EXIT_DIVERGENT,
        Error::WrongBranch { expected: "!=", .. } => EXIT_EQUAL_EXPONENTS,
        Error::WrongBranch { .. } => EXIT_INPUT,
        Error::PrecisionNotReached { .. } | Error::GridTooLarge(_) => EXIT_FAILURE,
    }
}
