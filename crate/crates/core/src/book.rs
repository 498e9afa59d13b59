//! Compiles every code block of the book as a doctest of this crate, so the
//! guide can never drift from the library (`cargo test --doc`).

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
mod model {}

#[doc = include_str!("../../../book/src/dynamics.md")]
mod dynamics {}

#[doc = include_str!("../../../book/src/spectral.md")]
mod spectral {}

#[doc = include_str!("../../../book/src/coupling.md")]
mod coupling {}

#[doc = include_str!("../../../book/src/estimators.md")]
mod estimators {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
