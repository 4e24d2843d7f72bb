//! Identifiable VAE: model, ELBO, training, and source extraction.
//!
//! The model couples three networks: an encoder `g(x, u)` producing the
//! posterior mean and log-variance of the latent components, a decoder
//! `h(z)` reconstructing observations, and an auxiliary network `w(u)`
//! producing the location-conditional prior mean and log-variance. The
//! objective is the evidence lower bound
//!
//! `ELBO = E[ log N(x | h(z'), beta I) ] - KL( q(z|x,u) || p(z|u) )`
//!
//! with `z' = mu + sigma * eps` (reparametrization) and the KL in Gaussian
//! closed form. Maximizing it recovers the latent components up to
//! permutation and signed scaling when the auxiliary variables carry enough
//! variance structure.

mod elbo;
mod model;
mod train;

pub use elbo::{elbo_batch, ElboTerms};
pub use model::{
    load_model, save_model, write_latent_csv, IvaeConfig, IvaeModel, LatentResult,
};
pub use train::{extract_sources, train};
