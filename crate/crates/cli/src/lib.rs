//! Library side of the `psharp` command-line tool: raster file I/O and
//! the command implementations, kept callable for integration tests.

pub mod commands;
pub mod io;
