//! Library surface of the command-line tool, split out so integration
//! tests can drive the pieces (mock service, filters) in process.

pub mod commands;
pub mod filters;
pub mod http;
pub mod mock_service;
