//! The guide's chapters as doc modules, so `cargo test` runs every Rust
//! snippet in `book/src`. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/angles.md")]
pub mod angles {}
#[doc = include_str!("../../../book/src/inequalities.md")]
pub mod inequalities {}
#[doc = include_str!("../../../book/src/errors.md")]
pub mod errors {}
#[doc = include_str!("../../../book/src/cloners.md")]
pub mod cloners {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
