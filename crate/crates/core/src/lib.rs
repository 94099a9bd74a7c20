pub mod analytics;
pub mod annotate;
pub mod dedup;
pub mod ingest;
pub mod kb;
pub mod numeric;
pub mod pipeline;
pub mod report;
pub mod sentiment;
pub mod synth;
pub mod text;
pub mod topics;
