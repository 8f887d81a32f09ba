//! Electric RLC lattice networks that behave like two-dimensional quantum
//! billiards.
//!
//! A square lattice of inductor links with capacitors to ground (or the dual
//! capacitor-link / inductor-shunt network) obeys the five-point discrete
//! Helmholtz equation, so node voltages play the role of a billiard wave
//! function and squared resonance frequencies map onto billiard eigenvalues.
//! The crate covers:
//!
//! - [`geometry`]: rasterized billiards (rectangle, quarter stadium) and
//!   boundary tagging.
//! - [`network`]: circuit parameters, component tolerances and assembly of the
//!   complex nodal admittance system.
//! - [`solve`]: dispersion maps, lossless spectra, driven lossy responses and
//!   resonance sweeps.
//! - [`fields`]: density, link currents, heat power, power balance, vortices
//!   and streamlines.
//! - [`stats`]: phase rotation, openness, the density and heat-power laws,
//!   Monte Carlo oracles and goodness-of-fit machinery.
//! - [`analysis`]: the multi-step studies (source placement, tolerance
//!   ensembles, driven-field statistics) built from the pieces above.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! parallel orchestration live in the `rlcnet` companion crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod network;
pub mod quad;
pub mod solve;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
