//! Polychromatic rotating light modes.
//!
//! Superpositions of two monochromatic modes with shifted frequencies and
//! opposite angular momenta give light whose polarization or transverse
//! intensity pattern rotates uniformly. This crate builds such modes from a
//! discrete label registry, evaluates few-photon Fock-space expectations,
//! renders their reference-plane fields and simulates the quantum protocols
//! built on them (two-photon interference, rotating singlets, BB84, storage
//! in a single atom). Units are ħ = c = ε₀ = 1.

pub mod atom;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod field;
pub mod fock;
pub mod interference;
pub mod mode;
pub mod protocols;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{detection_amplitude, snapshot, FieldKind, FieldSnapshot, Grid, Jones};
pub use fock::{create, expect, inner, moments, FockState, Moments, Observable};
pub use mode::{ModeBasis, ModeLabel, Site, ThetaWeights, TransverseIndex};
pub use transforms::{build_pair, Coefficients, Family, PairSpec, Sign, SuperpositionMode};
