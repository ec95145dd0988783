//! Document formats for the `sepsolve` command-line tool.

pub mod schema;
