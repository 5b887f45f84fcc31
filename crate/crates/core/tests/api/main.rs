//! Integration tests of the library API and the command-line tool.

#[path = "../common/mod.rs"]
mod common;

mod cli;
mod http_smoke;
mod properties;
mod store;
mod transport;
