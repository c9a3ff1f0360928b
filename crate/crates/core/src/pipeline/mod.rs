//! Data generation: ingestion, splitting, windowing, bagging,
//! multi-resolution aggregation and decompose-then-slice.

mod bagging;
mod decompose;
mod ingest;
mod split;
pub mod synthetic;
mod window;

pub use bagging::{bag_size, bootstrap_bags, bootstrap_indices};
pub use decompose::{
    decompose_dataset, decompose_sequence, ComponentDataset, DecomposeSpec, Detrend, DroppedWindow, LeakageMode,
    SequenceSet,
};
pub use ingest::{ingest_csv, ingest_csv_segments, ColumnMap, GapRecord, IngestOptions, IngestReport};
pub use split::{chronological_split, SplitSpec, Splits};
pub use synthetic::{generate, write_flow_csv, SyntheticSpec};
pub use window::{
    aggregate_resolution, aggregate_values, minutes_to_steps, slice_steps, slice_windows, window_starts, TargetMode,
    WindowPair,
};
