//! Nonlinear blind source separation for nonstationary spatio-temporal data.
//!
//! The crate trains identifiable variational autoencoders whose latent prior
//! is conditioned on auxiliary location features, recovers latent components
//! together with smooth trend and variance surfaces, and builds on those for
//! latent-dimension selection and kriging-based prediction. It also ships
//! the simulation generators and performance indices used to exercise the
//! whole pipeline at desk scale.
//!
//! Entry points:
//!
//! - [`simgen::gen_setting`] / [`simgen::gen_mixing`] simulate nonstationary
//!   latent fields and mix them into observations.
//! - [`aux`] builds auxiliary variables from coordinates (normalized
//!   coordinates, segmentations, multi-resolution radial bases).
//! - [`ivae::train`] fits the model; [`ivae::extract_sources`] returns the
//!   sources, trend, and variance surfaces.
//! - [`dimsel::sweep_dims`] selects the latent dimension by uAIC.
//! - [`geostat`] and [`predict`] implement variogram fitting, ordinary
//!   kriging, and the residual-kriging prediction pipeline.
//! - [`metrics`] scores recovered sources (MCC) and predictions
//!   (MSE/MAE/wMSE/wMAE).
//!
//! The `stivae` binary wires these into reproducible experiments; see the
//! book under `book/` for a guided tour.

pub mod aux;
pub mod cli;
pub mod data;
pub mod dimsel;
pub mod error;
pub mod geostat;
pub mod ivae;
pub mod metrics;
pub mod nn;
pub mod predict;
pub mod seed;
pub mod simgen;

pub use error::{Error, Result};
