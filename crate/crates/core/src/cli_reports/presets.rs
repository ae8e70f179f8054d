//! Parameter sets of the reference figures. Each preset is one or more
//! series, every series a closed-form path with its integration constant
//! imposed rather than fitted.

use crate::dynamics::RegimeSolution;
use crate::error::{Error, Result};
use crate::firm_model::FirmParams;

pub const PRESET_NAMES: [&str; 8] = [
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b",
];

/// Which derived column the figure plots; every CSV carries all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plotted {
    Flow,
    Cost,
    Profit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetSeries {
    pub label: String,
    pub params: FirmParams,
    /// H0 (unit/y)
    pub integration_constant: f64,
}

impl PresetSeries {
    fn new(params: FirmParams, integration_constant: f64, label: String) -> Self {
        let mut params = params;
        params.initial_flow = 0.0;
        let sol = RegimeSolution::with_constant(&params, integration_constant, 0.0)
            .expect("preset parameters have m > 0 and B != 0");
        params.initial_flow = sol.q_at(0.0);
        PresetSeries {
            label,
            params,
            integration_constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub plotted: Plotted,
    pub t_span: (f64, f64),
    pub series: Vec<PresetSeries>,
}

impl FigurePreset {
    /// One line per series, `name key=value ...`, in caption order.
    pub fn caption_lines(&self) -> Vec<String> {
        self.series
            .iter()
            .map(|s| {
                let p = &s.params;
                let mut line = format!(
                    "{} m={} a={} A={} B={}",
                    self.name, p.inertia, p.base_price, p.base_unit_cost, p.cost_slope
                );
                if p.fixed_cost != 0.0 {
                    line.push_str(&format!(" h0={}", p.fixed_cost));
                }
                line.push_str(&format!(" H0={}", s.integration_constant));
                line
            })
            .collect()
    }
}

pub fn figure_preset(name: &str) -> Result<FigurePreset> {
    let fig1a = FirmParams::untrended(100.0, 20.0, 0.08, 2.0);
    let fig2a = FirmParams::untrended(100.0, 90.0, -0.5, 2.0);
    let with_h0 = |p: FirmParams| FirmParams {
        fixed_cost: 2000.0,
        ..p
    };
    let one = |p: FirmParams, h: f64| vec![PresetSeries::new(p, h, format!("H0={h}"))];
    let (plotted, t_span, series) = match name {
        "fig1a" => (
            Plotted::Flow,
            (0.0, 100.0),
            [-100.0, 10.0]
                .into_iter()
                .flat_map(|h| one(fig1a, h))
                .collect(),
        ),
        "fig1b" => (
            Plotted::Flow,
            (0.0, 100.0),
            [0.1, 2.0, 5.0]
                .into_iter()
                .map(|m| {
                    let p = FirmParams {
                        base_price: 150.0,
                        inertia: m,
                        ..fig1a
                    };
                    PresetSeries::new(p, -625.0, format!("m={m}"))
                })
                .collect(),
        ),
        "fig2a" => (Plotted::Flow, (0.0, 10.0), one(fig2a, 20.0)),
        "fig2b" => (Plotted::Flow, (0.0, 100.0), one(fig1a, -2.0)),
        "fig3a" => (Plotted::Cost, (0.0, 10.0), one(with_h0(fig2a), 20.0)),
        "fig3b" => (Plotted::Cost, (0.0, 100.0), one(with_h0(fig1a), -2.0)),
        "fig4a" => (Plotted::Profit, (0.0, 10.0), one(with_h0(fig2a), 20.0)),
        "fig4b" => (Plotted::Profit, (0.0, 100.0), one(with_h0(fig1a), -2.0)),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    let name = PRESET_NAMES
        .into_iter()
        .find(|n| *n == name)
        .expect("matched above");
    Ok(FigurePreset {
        name,
        plotted,
        t_span,
        series,
    })
}
