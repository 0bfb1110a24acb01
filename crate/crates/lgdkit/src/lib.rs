//! Information-theoretic loss-given-default modeling: entropy and
//! mutual-information estimation, an entropy-weighted additive model, four
//! benchmark model families, a mixture-contaminated data generator, and a
//! stratified cross-validation harness.

pub mod baselines;
pub mod config;
pub mod dataset;
pub mod digest;
pub mod entropy;
pub mod evaluate;
pub mod infomodel;
pub mod report;
pub mod synthgen;
