//! Analytic series solver: densities, background fields, the mode-coupling
//! system, and exterior evaluation.

pub mod density;
pub mod eval;
pub mod field;
pub mod system;

pub use density::InterfaceDensity;
pub use field::LinearField;
pub use system::{Independence, SeriesSolver};
