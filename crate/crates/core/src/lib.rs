//! Regular covering tests for planar graphs.
//!
//! The crate decides whether a graph `G` regularly covers a graph `H`, that
//! is, whether `H` is isomorphic to a quotient `G / Γ` for a semiregular
//! group of automorphisms `Γ`. Two independent routes are provided: a
//! structural algorithm for planar `G` ([`meta`]) and an exhaustive search
//! ([`oracle`]). Positive answers come with a certificate that can be
//! checked by [`covering::verify_certificate`].

pub mod canon;
pub mod cli;
pub mod covering;
pub mod decomp;
pub mod meta;
pub mod multigraph;
pub mod oracle;
pub mod perm;
pub mod generators;
pub mod ivmatch;
pub mod planar;
pub mod quotexp;
pub mod reduction;
