//! Error-probability dynamics of balanced binary relay trees.
//!
//! A tree with `N = 2^h` identical sensor leaves fuses pairs of binary
//! messages at every relay node. All nodes of one level share the same
//! Type I / Type II error pair, which evolves under a two-branch map
//! ([`fuse`]). This crate follows that map exactly in the log domain,
//! classifies states into the band / invariant-region geometry of the
//! `(alpha, beta)` plane, evaluates closed-form bounds on the error
//! probability at the fusion center, and cross-checks everything against a
//! literal Monte Carlo simulation of the tree.

pub mod analysis;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod logmath;
pub mod mc;
pub mod prob;
pub mod region;

pub use dynamics::{evolve, fuse, fuse_oracle, ErrorPair, Gate, Trajectory, TrajectoryState};
pub use error::{Error, Parity, Result};
pub use prob::ExtendedProb;
pub use region::{b_index, classify, entry_level, RegionTag, Side, Target};
