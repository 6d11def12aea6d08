//! Experiment harness around the price-of-anarchy core: benchmark
//! generators, instance serialization, and seeded Monte-Carlo sweeps.

pub mod experiment;
pub mod gen;
pub mod io;
