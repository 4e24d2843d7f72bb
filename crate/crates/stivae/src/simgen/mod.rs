//! Simulation generators: nonstationary latent spatio-temporal fields and
//! nonlinear MLP mixing functions.

mod field;
mod ilsa;
mod matern;
mod mixing;
mod settings;
mod swirl;

pub use field::{cholesky, cholesky_jittered, sample_gaussian_field, FieldSampler};
pub use ilsa::{
    gen_ilsa_component, ilsa_kernel, ilsa_noise_cov, spectral_radius, IlsaComponent, VarianceMode,
};
pub use matern::{bessel_k, matern_cov, MaternParams};
pub use mixing::{apply_mixing, gen_mixing, MixingFunction};
pub use settings::{
    gen_setting, ilsa_random_spec, ilsa_table_spec, sample_locations, setting1_params,
    setting2_params, setting3_params, voronoi_clusters, IlsaSpec, Setting1Params, Setting2Params,
    Setting3Params,
};
