//! Dense networks, reverse-mode gradients, Adam, and learning-rate decay.

pub mod activation;
pub mod adam;
pub mod io;
pub mod mlp;
pub mod schedule;
pub mod tape;

pub use activation::Activation;
pub use adam::AdamState;
pub use mlp::{DenseLayer, Mat, Mlp};
pub use schedule::LrSchedule;
pub use tape::{Tape, VarId};
