//! Inhomogeneous Sierpinski gaskets.
//!
//! Each address word `w` is subdivided at its own level `L_w ∈ T`. The crate
//! computes the resistance renormalization constants and harmonic extension
//! matrices of every level exactly, evaluates the reference measure `λ_q`
//! and harmonic energy measures on cylinder sets, and runs finite-depth
//! diagnostics of their mutual singularity: Hellinger affinities, a
//! block-martingale criterion along sampled paths, and Monte Carlo checks
//! for random recursive label families.
//!
//! ```
//! use gasket::renorm::renormalization_constant;
//! use gasket::numerics::rat;
//!
//! assert_eq!(renormalization_constant(4).unwrap(), rat(41, 103));
//! ```

pub mod cli;
pub mod error;
pub mod geometry;
pub mod measures;
pub mod numerics;
pub mod random;
pub mod renorm;
pub mod rsg;
pub mod singularity;
pub mod words;

pub use error::{GasketError, Result};
pub use measures::BoundaryVector;
pub use numerics::{ExactRational, RationalMatrix};
pub use words::{LabelRule, Letter, LevelSet, WeightSystem, Word};
