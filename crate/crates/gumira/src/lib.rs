//! Numerics for a pair of 2-periodically forced planar recurrences with
//! opposite fates: one composition (`G_{b,a}`) is integrable, with a
//! polynomial first integral, oval-confined orbits, rotation numbers and a
//! completely described period set; the conjugate composition (`F_{b,a}`)
//! behaves like a perturbed twist map, with drifting "integrals", island
//! chains and orbit closures made of many intervals.
//!
//! Module map:
//!
//! * [`dynamics`] — the elementary maps, exact inverses, compositions,
//!   conjugacy scaling and orbit/sequence generation;
//! * [`invariants`] — the first integrals and conservation/drift profiles;
//! * [`geometry`] — fixed points, critical level values, level topology and
//!   x-axis projections;
//! * [`rotation`] — rotation numbers by winding and by Hamiltonian flow
//!   timing, closed-form limits, origin spectrum;
//! * [`periods`] — period detection, the 2-periodic locus, resonant-level
//!   search and the admissible period set;
//! * [`classify`] — adherence intervals and behaviour taxonomy of scalar
//!   sequences;
//! * [`search`] — exact-rational search for polynomial invariants of
//!   longer forcing cycles;
//! * [`local`] — local analysis of the chaotic composition at the origin.

pub mod classify;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod local;
pub mod params;
pub mod periods;
pub mod rotation;
pub mod search;

pub use dynamics::{Family, MapKind, MapSpec, OrbitSample, PlanePoint};
pub use error::{Error, Result};
pub use invariants::IntegralSpec;
pub use params::{ParamPair, Regime};
