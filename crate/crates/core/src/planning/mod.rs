//! Built-in scenarios, pristine-region statistics, and exhaustive searches
//! over patrol placements.

mod scenario;
mod search;
mod stats;
mod terrain;

pub use scenario::{build_scenario, ScenarioKind, ScenarioSpec, PATROL_GAPS, SCENARIO_NAMES};
pub use search::{candidate_grid, evaluate_model_a, optimize_station, optimize_weights, SearchResult, Summary};
pub use stats::{high_value_region, outside_neighborhood, region_stats, region_stats_masked, RegionStats, DEFAULT_EPSILON};
pub use terrain::{synthetic_terrain, terrain_problem, TERRAIN_BUDGET};
