//! Scattering resonances generated by diffraction among cone points.
//!
//! The crate models a flat conic surface by its directed cone-to-cone
//! geodesics, assembles the leading-order monodromy matrix `M(λ)` over
//! those geodesics, and locates the zeros of `det(I - M(λ))` in
//! logarithmic strips of the lower half plane. The located resonances are
//! then compared against the scalar ladder predicted by the longest
//! geodesic: slope `-(n-1)/(2 L0)` of `Im λ` against `log Re λ`, spacing
//! `π / L0` of `Re λ`, and a resonance-free band below `ν = Λ`.
//!
//! A separate module checks the stationary-phase expansion with a complex
//! large parameter against direct quadrature.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod diffraction;
pub mod geometry;
pub mod linalg;
pub mod monodromy;
pub mod report;
pub mod resonances;
pub mod statphase;

pub use asymptotics::{FitReport, GapReport, LadderModel};
pub use config::Tolerances;
pub use diffraction::DiffractionEvaluator;
pub use geometry::{ConeSurfaceSpec, HypothesisReport, LengthScales};
pub use monodromy::{MonodromyModel, MonodromyVector, TransferMatrix};
pub use resonances::{Resonance, ResonanceSet, SearchRegion};

pub use num_complex::Complex64;
