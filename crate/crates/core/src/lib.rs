//! Joint law of a Levy process, its running supremum and the time of the supremum.
//!
//! The main entry points are [`joint_cpdf::TripleEngine`] for batches of
//! triple-law queries, the single-barrier helpers in [`joint_cpdf`], and the
//! Brownian and Monte Carlo references in [`oracle`].

mod clock;
pub mod contours;
pub mod error;
pub mod joint_cpdf;
pub mod laplace;
pub mod levy_models;
pub mod oracle;
pub mod quadrature;
pub mod reference;
pub mod wiener_hopf;

pub use contours::{DesignOptions, FtdHorizon, SchemeParams, SinhContour};
pub use error::{Error, Result};
pub use levy_models::LevyModel;
