//! Grey wolf optimization over bounded mixed search spaces.

mod optimizer;
mod space;

pub use optimizer::{
    coefficient_a, coefficient_vectors, encircle_step, gwo_optimize, pack_update, GwoConfig,
    GwoResult, Leaders, RunMetadata, Trace,
};
pub use space::{
    clamp, decode, in_bounds, DecodedSolution, DecodedValue, DimensionSpec, Position, SearchSpace,
};
