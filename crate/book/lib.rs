// mdbook cannot run snippets that depend on workspace crates, so every
// chapter is pulled in as the docs of an empty module and `cargo test --doc`
// runs the code blocks. One module per chapter keeps failures traceable.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/exact_algebra.md")]
pub mod exact_algebra {}
#[doc = include_str!("src/curvature.md")]
pub mod curvature {}
#[doc = include_str!("src/profile_equations.md")]
pub mod profile_equations {}
#[doc = include_str!("src/bundle_metrics.md")]
pub mod bundle_metrics {}
#[doc = include_str!("src/verification.md")]
pub mod verification {}
#[doc = include_str!("src/command_line.md")]
pub mod command_line {}
