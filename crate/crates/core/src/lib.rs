pub mod challenges;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod dsl;
pub mod gestalt;
pub mod model;
pub mod render;
pub mod sampler;
pub mod splits;
