//! Fourier neural operators and their multi-scale variant, trained with a
//! small reverse-mode differentiation engine, plus the synthetic data
//! generators and spectral diagnostics used to study spectral bias.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod fno;
pub mod harness;
pub mod io;
pub mod model;
pub mod mscale;
pub mod rng;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};
pub use fno::{Activation, FnoConfig, FnoParams};
pub use model::{Model, ModelKind, Operator};
pub use mscale::{mscale_count, MscaleParams};
