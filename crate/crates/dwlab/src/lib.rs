//! Numerical toolkit for composition sequences of holomorphic self-maps of the
//! unit disc and upper half-plane.
//!
//! The crate provides:
//!
//! * [`hypgeom`] — hyperbolic geometry on the Poincaré disc and half-plane,
//!   including hyperbolic discs, sampling, and the Cayley bridge;
//! * [`holomap`] — representation, evaluation, composition, inversion and
//!   classification of holomorphic self-maps, plus contraction-constant
//!   estimation and Denjoy–Wolff point detection;
//! * [`sequence`] — engines for left sequences `F_n = f_n ∘ … ∘ f_1` and right
//!   sequences `G_n = g_1 ∘ … ∘ g_n`, normalized variants, deviation series and
//!   convergence detection;
//! * [`verify`] — executable scenarios that check stability statements about
//!   such sequences with explicit tolerances;
//! * [`cli`] — the `dwlab` command-line front end.

pub mod cli;
pub mod grammar;
pub mod holomap;
pub mod hypgeom;
pub mod sequence;
pub mod verify;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {re}+{im}i violates the {model} boundary guard")]
    BoundaryGuard {
        model: &'static str,
        re: f64,
        im: f64,
    },
    #[error("map is not a self-map: {input_re}+{input_im}i maps to {image_re}+{image_im}i")]
    NotSelfMap {
        input_re: f64,
        input_im: f64,
        image_re: f64,
        image_im: f64,
    },
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("model mismatch between disc and half-plane maps")]
    ModelMismatch,
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("inconclusive after iteration budget: {0}")]
    Inconclusive(String),
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("escape during iteration at step {step}: {detail}")]
    Escape { step: usize, detail: String },
    #[error("distinct points required")]
    DistinctPointsRequired,
}

pub type Result<T> = std::result::Result<T, Error>;
