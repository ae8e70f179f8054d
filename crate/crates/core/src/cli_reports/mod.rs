//! Configuration, figure presets and CSV reports behind the `firmdyn` binary.

mod csv_out;
mod portfolio;
mod presets;
mod scenario;

pub use csv_out::{emit_csv, format_number, HEADER, SIGNIFICANT_DIGITS};
pub use portfolio::{
    run_portfolio, write_report, write_sweep, PortfolioSummary, INPUT_HEADER, OUTPUT_HEADER,
};
pub use presets::{figure_preset, FigurePreset, Plotted, PresetSeries, PRESET_NAMES};
pub use scenario::{default_step, parse_scenario, Mode, Scenario, DEFAULT_SPAN, STEP_ENV};
