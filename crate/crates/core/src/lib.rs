//! Numerical toolkit for a family of transcendental entire functions built
//! as `f = f0^N · ∏ (1 − ½ (z/R_k)^{n_k})` over a quadratic `f0 = z² + c`.
//!
//! Magnitudes are carried as logarithms ([`logcomplex::LogComplex`]) so that
//! radii like `R_k`, which overflow binary64 after two or three levels, stay
//! representable.

pub mod construction;
pub mod dimension;
pub mod error;
pub mod exec;
pub mod grid;
pub mod logcomplex;
pub mod partition;
pub mod quadratic;
pub mod render;
pub mod report;
pub mod td;

pub use error::{Error, Result};
pub use logcomplex::LogComplex;
pub use td::Td;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
