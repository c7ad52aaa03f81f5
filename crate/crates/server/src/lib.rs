//! Wire-protocol server and command-line front end.

pub mod cli;
pub mod protocol;
pub mod server;
