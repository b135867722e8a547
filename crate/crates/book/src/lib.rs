//! The chapters of `book/src` as modules, so that `cargo test --doc` runs
//! every Rust listing in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/loewner.md")]
pub mod loewner {}
#[doc = include_str!("../../../book/src/seminorms.md")]
pub mod seminorms {}
#[doc = include_str!("../../../book/src/bundles.md")]
pub mod bundles {}
#[doc = include_str!("../../../book/src/renorming.md")]
pub mod renorming {}
#[doc = include_str!("../../../book/src/hyperspace.md")]
pub mod hyperspace {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
