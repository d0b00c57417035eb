//! The congestion-window model used by the bundled experiment: states on the
//! uniform grid {0, 1/N, ..., (N-1)/N}, linear drift toward 1, forced reset
//! at the boundary, and a kernel that prefers destinations near half the
//! pre-jump position,
//!
//!   weight(y | position) = 1 / (1 + |y - position/2|^(1/4)).

use crate::error::{Error, Result};
use crate::grid::StateGrid;
use crate::model::PdmpModel;

/// Jump-rate scenario: either a constant rate or a rate growing linearly in
/// the position. Both have closed-form cumulative rates along the drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Const { rate: f64 },
    Linear { slope: f64 },
}

impl Scenario {
    /// Accepts the two named scenarios `const5` and `linear20x` plus the
    /// parametric spellings `const:<rate>` and `linear:<slope>`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        match text {
            "const5" => return Ok(Scenario::Const { rate: 5.0 }),
            "linear20x" => return Ok(Scenario::Linear { slope: 20.0 }),
            _ => {}
        }
        if let Some(v) = text.strip_prefix("const:") {
            let rate: f64 = v
                .parse()
                .map_err(|_| bad(format!("unreadable constant rate `{v}`")))?;
            if !(rate.is_finite() && rate > 0.0) {
                return Err(bad(format!("constant rate must be positive, got {rate}")));
            }
            return Ok(Scenario::Const { rate });
        }
        if let Some(v) = text.strip_prefix("linear:") {
            let slope: f64 = v
                .parse()
                .map_err(|_| bad(format!("unreadable slope `{v}`")))?;
            if !(slope.is_finite() && slope > 0.0) {
                return Err(bad(format!("slope must be positive, got {slope}")));
            }
            return Ok(Scenario::Linear { slope });
        }
        Err(bad(format!(
            "unknown scenario `{text}` (expected const5, linear20x, const:<rate>, or linear:<slope>)"
        )))
    }

    /// Canonical spelling, parseable back by `parse`.
    pub fn name(&self) -> String {
        match *self {
            Scenario::Const { rate } if rate == 5.0 => "const5".into(),
            Scenario::Const { rate } => format!("const:{rate}"),
            Scenario::Linear { slope } if slope == 20.0 => "linear20x".into(),
            Scenario::Linear { slope } => format!("linear:{slope}"),
        }
    }

    /// True jump rate at a position.
    pub fn rate_at(&self, z: f64) -> f64 {
        match *self {
            Scenario::Const { rate } => rate,
            Scenario::Linear { slope } => slope * z,
        }
    }

    /// Closed-form integral of the rate along the drift started at x.
    fn cumulative(&self, t: f64, x: f64) -> f64 {
        match *self {
            Scenario::Const { rate } => rate * t,
            Scenario::Linear { slope } => slope * (x * t + 0.5 * t * t),
        }
    }
}

/// The uniform grid {i/N : i = 0..N-1}.
pub fn tcp_grid(n_states: usize) -> Result<StateGrid> {
    if n_states < 2 {
        return Err(Error::InvalidArgument(format!(
            "the window model needs at least two states, got {n_states}"
        )));
    }
    StateGrid::new((0..n_states).map(|i| i as f64 / n_states as f64).collect())
}

/// Builds the congestion-window model for a scenario on an N-state grid.
pub fn tcp_model(n_states: usize, scenario: Scenario) -> Result<PdmpModel> {
    let grid = tcp_grid(n_states)?;
    let points = grid.points().to_vec();
    let sc = scenario;
    PdmpModel::builder()
        .grid(grid)
        .flow(|t, x| x + t)
        .exit_time(|x| 1.0 - x)
        .rate(move |z| sc.rate_at(z))
        .cumulative_rate_closed_form(move |t, x| sc.cumulative(t, x))
        .kernel_weights(move |position, weights| {
            for (w, &y) in weights.iter_mut().zip(&points) {
                *w = 1.0 / (1.0 + (y - 0.5 * position).abs().powf(0.25));
            }
        })
        .build()
}
