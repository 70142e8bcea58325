//! The book under `book/` doubles as a test suite: every chapter is
//! included here as module documentation, so `cargo test --doc -p
//! sirmix-guide` compiles and runs each fenced code block. A snippet
//! that drifts from the library's API fails the build instead of rotting
//! in the book.
//!
//! Render the human-readable version with `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/sir-model.md")]
pub mod sir_model {}

#[doc = include_str!("../../../book/src/dictionary.md")]
pub mod dictionary {}

#[doc = include_str!("../../../book/src/pursuit.md")]
pub mod pursuit {}

#[doc = include_str!("../../../book/src/matching.md")]
pub mod matching {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
