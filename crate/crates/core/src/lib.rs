//! Hybrid particle/spectral simulation engine for Keller-Segel chemotaxis
//! systems in 2D and 3D periodic boxes.
//!
//! Particles carry the cell density; a Fourier series carries the
//! chemoattractant. The accelerated engine couples them through
//! particle-in-cell deposition and gathering around an FFT, at
//! O(P + H^d log H) per step; a direct-summation engine provides the
//! O(P H^d) reference. A 1D radial finite-volume solver supplies
//! high-resolution reference profiles for convergence studies, and the
//! diagnostics module implements the radial Wasserstein-1 metric, second
//! moment, and spectral blowup indicator.

pub mod config;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod interp;
pub mod manifest;
pub mod oracle;
pub mod particles;
pub mod radial;
pub mod rng;
pub mod scenarios;
pub mod spectral;

pub use config::{RunConfig, SimParams};
pub use engine::Engine;
pub use error::{KsError, Result};
pub use grid::{GridScalar, GridVector};
pub use interp::{InterpOrder, InterpStencil};
pub use oracle::DirectEngine;
pub use particles::ParticleEnsemble;
pub use radial::RadialProfile;
pub use scenarios::{ScenarioKind, ScenarioSpec};
pub use spectral::{FieldRole, SpectralField, SpectralWorkspace};
