//! File formats, run configuration and pipeline stages for voice timbre
//! attribute detection. The numerical core lives in [`vtad_core`].

pub mod annotations;
pub mod checkpoint;
pub mod config;
pub mod embeddings;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;

mod fsio;

pub use annotations::parse_annotations;
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::{Overrides, RunConfig};
pub use embeddings::{load_embedding_set, save_embedding_set};
pub use error::{Error, Result};
pub use manifest::{load_manifest, save_manifest, Manifest};
pub use vtad_core;
