//! File formats, terrain ingestion, run configuration, and the command line.

mod cli;
mod config;
mod raster;
mod text;

pub use cli::run_cli;
pub use config::{parse_config, RunConfig};
pub use raster::{
    export_field, load_field, load_field_on, load_raster, speed_from_slope, speed_law, ElevationRaster, FieldFormat,
    RasterHeader,
};
pub use text::{load_trajectories, read_rows, write_front_rows, write_rows, write_trajectories};
