//! The user guide, chapter by chapter.
//!
//! The rendered book lives in `book/` at the repository root (build it
//! with `mdbook build book`). Each chapter is also attached here as
//! module documentation, so every code example in the guide is compiled
//! and executed by `cargo test` and cannot drift out of sync with the
//! library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scalars.md")]
pub mod scalars {}

#[doc = include_str!("../../../book/src/spaces.md")]
pub mod spaces {}

#[doc = include_str!("../../../book/src/free-space.md")]
pub mod free_space {}

#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}

#[doc = include_str!("../../../book/src/actions.md")]
pub mod actions {}

#[doc = include_str!("../../../book/src/averaging.md")]
pub mod averaging {}

#[doc = include_str!("../../../book/src/quotients.md")]
pub mod quotients {}

#[doc = include_str!("../../../book/src/projection.md")]
pub mod projection {}

#[doc = include_str!("../../../book/src/isometries.md")]
pub mod isometries {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

/// Keeps the README's example compiling; exists only while rustdoc
/// collects doc-tests.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
