//! Constrained-controllability analysis and degraded-control simulation for
//! PNPNPN hexacopters with failed or degraded rotors.
//!
//! The library answers two questions about a hexacopter whose rotors can only
//! push (each lift is confined to `[0, K]`):
//!
//! * Is the hover-linearized system still controllable after a rotor failure?
//!   The attainable control set is a zonotope; controllability reduces to a
//!   strict-interiority test of the origin, decided exactly via support
//!   functions and facet enumeration ([`controllability`]).
//! * If yaw control is given up after a failure, above which per-rotor lift
//!   limit does the degraded (yaw-free) system stay controllable?
//!   ([`controllability::degraded_lift_threshold`]).
//!
//! [`sim`] closes the loop: a PD-controlled simulation with scripted fault
//! injection and the degraded reallocation strategy, exporting CSV traces and
//! SVG plots through the `hexactl` binary.

pub mod allocation;
pub mod config;
pub mod controllability;
pub mod model;
pub mod sets;
pub mod sim;
pub mod svg;
pub mod verify;

use thiserror::Error;

/// Errors shared across the analysis and simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    /// The generators of a zonotope do not span the ambient space; the set
    /// has empty interior and facet-based queries are meaningless.
    #[error("zonotope generators do not span the ambient space (empty interior)")]
    DegenerateSet,

    /// Rejection sampling gave up; the polytope has (near-)empty interior
    /// relative to its bounding box.
    #[error("rejection sampling exhausted after {attempts} attempts ({accepted} accepted)")]
    SamplingExhausted { attempts: u64, accepted: usize },

    /// The Gram matrix H·Hᵀ is numerically singular; too many rotors have
    /// failed for a pseudo-inverse allocation to exist.
    #[error("effectiveness matrix is row rank deficient; pseudo-inverse allocation undefined")]
    PimSingular,

    /// A symmetry-constructed witness direction failed its support-function
    /// validation. This signals a geometry or indexing bug, not a property of
    /// the airframe.
    #[error("witness direction for rotor {rotor} failed validation: support = {support:e}")]
    WitnessInvalid { rotor: usize, support: f64 },

    /// A bisection bracket had the same verdict at both ends.
    #[error("no verdict flip in bisection bracket [{lo}, {hi}]")]
    NoFlip { lo: f64, hi: f64 },

    /// Malformed scenario or analysis configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
