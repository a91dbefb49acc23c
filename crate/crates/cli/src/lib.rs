//! Library surface of the experiment runner, shared by the `lismodes`
//! binary and the integration tests.

pub mod config;
pub mod presets;
pub mod run;
