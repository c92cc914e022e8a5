//! Command-line front end for `mgpx`: model specs, CSV/JSON I/O and the
//! verification suites.

pub mod commands;
pub mod error;
pub mod io;
pub mod spec;
pub mod verify;
