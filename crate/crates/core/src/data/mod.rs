//! Dataset ingestion, synthetic generators and train/test splitting.

mod ingest;
mod split;
mod synth;

pub use ingest::{
    load, load_csv, load_mushroom, load_wisconsin, write_csv, Format, IngestSpec, MissingPolicy,
    MUSHROOM_ATTRIBUTES, WISCONSIN_ATTRIBUTES,
};
pub use split::{split, SplitSpec};
pub use synth::{synth_hard, synth_nonseparable, synth_separable, Regime};
