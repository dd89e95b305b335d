pub mod ingest;
pub mod media;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod text;
pub mod trigger;
pub mod wkt;
pub mod aggregate;
pub mod geo;
