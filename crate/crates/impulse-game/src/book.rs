//! The mdbook guide, re-exported as rustdoc so `cargo test` compiles and
//! runs every code block in `book/src/`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/type1.md")]
pub mod type1 {}

#[doc = include_str!("../../../book/src/type2.md")]
pub mod type2 {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
