//! File formats and ingestion of trip logs into networks, events and covariates.

mod csvfmt;
mod ingest;

pub use csvfmt::{
    read_covariates_csv, read_events_csv, read_network_csv, read_partition_csv, write_covariates_csv, write_events_csv,
    write_network_csv, write_partition_csv,
    write_path_csv,
};
pub use ingest::{
    build_conservative_network, distance_covariates, ingest_events, median_minutes, IngestConfig, Ingested, TimeFormat, VertexRegistry,
    TIE_NUDGE,
};
