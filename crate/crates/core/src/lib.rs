pub mod cli;
pub mod conformal;
pub mod diffusion;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod provenance;
pub mod rng;
