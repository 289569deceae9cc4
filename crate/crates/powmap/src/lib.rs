//! Eigenvalue distributions of powers of Haar-random elements of compact groups.
//!
//! The library computes exact decompositions of powered classical ensembles,
//! congruential subgroups of affine Weyl groups with their independence
//! thresholds, alcove-coordinate tables for the exceptional and twisted cases,
//! and Monte Carlo cross-checks of the exact identities.

pub mod affine;
pub mod classical;
pub mod congruential;
pub mod mc;
pub mod oracle;
pub mod rat;
pub mod rootsys;
pub mod tables;
