//! Stability regions of implicit linear multistep and multiderivative
//! multistep methods.
//!
//! A method applied to `y' = λy` with step `h` produces a linear recurrence
//! whose characteristic polynomial is
//!
//! ```text
//! Φ(ζ, μ) = Σ_j Σ_ℓ a[j][ℓ] μ^j ζ^ℓ = Σ_ℓ C_ℓ(μ) ζ^ℓ,     μ = hλ.
//! ```
//!
//! For implicit methods the leading coefficient `C_k(μ)` has zeros (the
//! exceptional set `E`). At those points `Φ(·, μ)` drops degree and the
//! classical root-condition definition of the stability region can accept
//! isolated points that are surrounded by instability. This crate classifies
//! points under both the classical root condition and a refined one that also
//! requires full degree `k`, and provides the machinery around it: exact
//! rational method coefficients, a certified polynomial root finder, root
//! locus tracing, grid rasterization, recurrence simulation and SVG output.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! scanning and the command-line tool live in the `stabreg` crate.
#![no_std]

extern crate alloc;

pub mod catalog;
pub mod charpoly;
pub mod locus;
pub mod method;
pub mod poly;
pub mod rational;
pub mod region;
pub mod rootfind;
pub mod simulate;
pub mod stability;
pub mod svg;
pub mod tolerance;

pub use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::BigRational;

pub use charpoly::{CharPoly, ClosedForm, ExceptionalPoint, ExceptionalSet};
pub use locus::{LocusCurve, LocusSample};
pub use method::{LmmView, MultistepScheme, SchemeError};
pub use poly::RationalPoly;
pub use rational::ExactComplex;
pub use region::{GridSpec, RegionGrid};
pub use rootfind::RootSet;
pub use stability::{Status, StabilityVerdict};
pub use tolerance::Tolerances;
