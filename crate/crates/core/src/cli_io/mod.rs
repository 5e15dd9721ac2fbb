//! Scenario files, trajectory export and run reports.

mod config;
mod export;
mod report;
mod svg;

pub use config::{load_config, parse_complex, parse_config};
pub use export::{export_trajectory, write_trajectory_csv};
pub use report::RunReport;
pub use svg::{export_svg, render_boundary_svg, render_layers_svg, render_map_svg, SvgLayer};
