//! Semantic deficits of chains of text reformulations, measured two ways: as
//! the cosine distance between the first and last embeddings, and as the
//! quadratic form of the composed minimal rotations along the chain. The
//! inertia (signature) of that form is extracted with a Jacobi eigensolver.
//!
//! Module map:
//!
//! * [`geometry`]: distances, minimal rotations, representing matrices, eigenvalues, signatures.
//! * [`embedding`]: embedders (HTTP, mock), the on-disk cache, trajectory files.
//! * [`transform`]: mock and chat-provider transformations.
//! * [`engine`]: trajectories, deficit reports, loop verdicts, audits.
//! * [`synthetic`]: chains with known rotations for checking the rest.
//! * [`cli`]: the `linloop` command line.

pub mod cli;
pub mod embedding;
pub mod engine;
pub mod geometry;
pub mod http;
pub mod synthetic;
pub mod transform;
