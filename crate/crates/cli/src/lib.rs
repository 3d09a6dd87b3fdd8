//! Command line and HTTP front ends for the set nim engine.

pub mod api;
pub mod cli;
pub mod http;
