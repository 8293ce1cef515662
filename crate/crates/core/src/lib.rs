//! Topological classification of point clouds and protein structures.
//!
//! The pipeline runs from structure files to predictions:
//!
//! 1. [`ingest`]: Cα point clouds from PDB text and residue contact graphs.
//! 2. [`embed`]: low-dimensional point clouds from contact graphs.
//! 3. [`persistence`]: Vietoris–Rips persistence diagrams and noise filtering.
//! 4. [`metrics`]: weighted per-dimension diagram distances.
//! 5. [`vectorize`]: distance-to-landmark vectors and statistical baselines.
//! 6. [`classify`]: the soft-margin quadratic program and its solver.
//! 7. [`harness`]: seeded train/test protocols, error taxonomy and
//!    function-candidate ranking.
//!
//! [`synth`] generates labelled synthetic clouds for desk-scale runs and
//! [`io`] reads and writes the file formats.

pub mod classify;
pub mod embed;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod persistence;
pub mod synth;
pub mod vectorize;

pub use error::{Error, Result};
