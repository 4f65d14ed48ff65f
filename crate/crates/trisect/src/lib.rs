//! Ruler-and-compass construction kernel.
//!
//! The crate builds classical straightedge-and-compass figures from small
//! scripts (or from the built-in method programs), measures the angle
//! relations those figures are supposed to satisfy, and verifies them over
//! dense parameter sweeps at machine or arbitrary precision.
//!
//! Modules:
//! - [`scalar`]: numeric backends (f64 and bigfloat) behind one trait.
//! - [`geom`]: points, lines, circles, rays and the compass/straightedge ops.
//! - [`script`]: the `.gcs` construction language (parser and formatter).
//! - [`engine`]: executes a parsed program against parameter bindings.
//! - [`methods`]: the three built-in constructions and their reports.
//! - [`verifier`]: claim registry, sweep runner, fixed-point search.
//! - [`render`]: deterministic SVG output of an execution trace.

pub mod engine;
pub mod geom;
pub mod methods;
pub mod render;
pub mod scalar;
pub mod script;
pub mod verifier;

pub use scalar::{AngleDeg, Backend, BackendError, BackendSpec, BigScalar, Scalar};
