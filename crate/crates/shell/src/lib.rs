//! Command-line tools and the HTTP play service.

pub mod cli;
pub mod profile_spec;
pub mod service;
pub mod session;
