//! Reconstruction of standard max-stable and standard generalized Pareto
//! processes on `[0, 1]` from finitely many observations by generalized
//! max-linear models.
//!
//! The crate covers D-norms ([`dnorm`]), generator processes ([`generator`]),
//! exact path simulation ([`sampler`]), the max-linear reconstruction itself
//! ([`maxlinear`]), closed-form second moments evaluated by quadrature
//! ([`moments`]) and the Monte-Carlo experiments that check them
//! ([`experiments`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dnorm;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod maxlinear;
pub mod moments;
mod parallel;
pub mod quadrature;
pub mod sampler;
pub mod seeding;
pub mod stats;

pub use dnorm::{DNormSpec, EmpiricalSamples, NormConfig, NormValue, PairNorm};
pub use error::{Error, Result};
pub use generator::{GeneratorDraw, GeneratorModel, JointSample, PickandsPair};
pub use maxlinear::{binomial_weights, CellExtrema, DiscretizedGenerator, Grid, ReconstructedProcess, WeightFamily};
pub use quadrature::QuadratureConfig;
pub use sampler::{ObservationVector, PathSample, ProcessKind};
