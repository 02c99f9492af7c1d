//! Exact finite-scale constructions around the rational Urysohn space.

pub mod amalgam;
pub mod builder;
pub mod fixedpoint;
pub mod formats;
pub mod homogeneity;
pub mod katetov;
pub mod ratmetric;
pub mod shell;
pub mod tentacular;
