//! Command-line front end: instance files, JSON results, a persistent
//! result cache and the verification suites.

pub mod cache;
pub mod commands;
pub mod error;
pub mod instance;
pub mod json;
pub mod suite;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
