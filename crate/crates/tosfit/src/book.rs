// The guide chapters double as doctests: each module below pulls one
// markdown file into rustdoc, so every fenced Rust block in the book is
// compiled and run by `cargo test --doc`. Keeping the book honest this
// way beats a separate snippet-extraction step.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/gp.md")]
mod gp_chapter {}

#[doc = include_str!("../../../book/src/vbos.md")]
mod vbos_chapter {}

#[doc = include_str!("../../../book/src/policies.md")]
mod policies_chapter {}

#[doc = include_str!("../../../book/src/loops.md")]
mod loops_chapter {}

#[doc = include_str!("../../../book/src/harness.md")]
mod harness_chapter {}
