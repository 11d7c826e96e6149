//! Gradient-free training of feedforward networks. Layer weights are solved
//! in closed form with Moore-Penrose pseudoinverses and activation inverses
//! instead of being learned by gradient descent.

pub mod activation;
pub mod analysis;
pub mod cv;
pub mod data;
pub mod error;
pub mod learner;
pub mod matrix;
pub mod network;
pub mod pinv;
pub mod seed;
mod svd;

pub use activation::{ActivationKind, DomainPolicy};
pub use analysis::{mc_output_variance, representation_check, solution_count, variance_chain, VarianceConfig, VarianceReport};
pub use cv::{cv_search, stratified_kfold, CvPlan, CvReport, StructureTemplate};
pub use data::{accuracy, encode_targets, gen_regression, gen_spiral, load_csv, Dataset, TargetEncoding, TaskKind};
pub use error::{Error, Result};
pub use learner::{train, Init, InitScheme, SolveOrder, TrainConfig, TrainReport};
pub use matrix::{sse, Matrix};
pub use network::{augment, forward, hidden_activation, NetworkSpec, WeightSet};
pub use pinv::{penrose_residual, pinv, solve_least_squares, PinvOptions, Tolerance};
