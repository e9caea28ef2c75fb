//! Data ingestion and preparation: CSV loading, calendar alignment,
//! normalization, sliding-window datasets, chronological splits, and the
//! bundled synthetic generator.

mod align;
mod manifest;
mod normalize;
mod series;
mod synth;
mod window;

pub use align::{align, AlignedFrame, Column};
pub use manifest::{sha256_file, sha256_str, DatasetManifest};
pub use normalize::{fit_normalizer, ColumnStats, Normalizer};
pub use series::{load_csv, write_csv, RawSeries};
pub use synth::{generate, SynthConfig, SynthData};
pub use window::{
    chronological_split, make_windows, FeatureSet, RowSplit, SplitSlices, WindowedDataset, HORIZON,
};
