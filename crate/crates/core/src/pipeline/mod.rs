//! Panel ingestion, expanding-window estimation across assets,
//! cross-sectional averaging and result emission.

mod emit;
mod engine;
mod panel;
mod synthetic;

pub use emit::{
    emit_series, sha256_hex, write_series_csv, ManifestConfig, RunManifest, SERIES_HEADER,
};
pub use engine::{
    default_level_pairs, run_expanding, LevelPair, RunOptions, SeriesRow, WindowPlan, WindowSeries,
};
pub use panel::{load_panel, read_panel, ReturnPanel, BARS_PER_DAY_5MIN, BAR_MINUTES};
pub use synthetic::{simulate_panel, SyntheticPanelConfig};
