//! Per-transition counting data extracted from a trajectory.
//!
//! For a state pair (x, y), the observations are the waiting times of the
//! transitions x -> y. Spontaneous jumps are events; boundary jumps are
//! censored at the exit time and only contribute to the at-risk count.

use crate::error::Result;
use crate::grid::StateGrid;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountingData {
    event_times: Vec<f64>,
    censor_times: Vec<f64>,
}

impl CountingData {
    pub fn new(mut event_times: Vec<f64>, mut censor_times: Vec<f64>) -> Self {
        event_times.sort_by(f64::total_cmp);
        censor_times.sort_by(f64::total_cmp);
        CountingData { event_times, censor_times }
    }

    /// Spontaneous-jump waiting times, ascending.
    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    /// Boundary-jump (censored) waiting times, ascending.
    pub fn censor_times(&self) -> &[f64] {
        &self.censor_times
    }

    /// Y(t): number of observed waiting times >= t, censored or not.
    pub fn at_risk(&self, t: f64) -> usize {
        let ev = self.event_times.len() - self.event_times.partition_point(|&s| s < t);
        let ce = self.censor_times.len() - self.censor_times.partition_point(|&s| s < t);
        ev + ce
    }

    /// N(t): number of events with waiting time <= t.
    pub fn events_until(&self, t: f64) -> usize {
        self.event_times.partition_point(|&s| s <= t)
    }

    /// Total number of observations for the pair.
    pub fn total(&self) -> usize {
        self.event_times.len() + self.censor_times.len()
    }
}

/// Counting data for one pair of grid states.
pub fn build_counting(
    traj: &Trajectory,
    grid: &StateGrid,
    x: f64,
    y: f64,
) -> Result<CountingData> {
    let xi = grid.require_index(x)?;
    let yi = grid.require_index(y)?;
    Ok(counting_all(traj, grid)?
        .into_iter()
        .nth(xi)
        .and_then(|row| row.into_iter().nth(yi))
        .expect("indices validated against the grid"))
}

/// Counting data for every pair, one pass over the trajectory. Fails if any
/// observed state is off the grid.
pub fn counting_all(traj: &Trajectory, grid: &StateGrid) -> Result<Vec<Vec<CountingData>>> {
    let m = grid.len();
    let mut events = vec![vec![Vec::new(); m]; m];
    let mut censors = vec![vec![Vec::new(); m]; m];
    for (from, to, s, boundary) in traj.transitions() {
        let xi = grid.require_index(from)?;
        let yi = grid.require_index(to)?;
        if boundary {
            censors[xi][yi].push(s);
        } else {
            events[xi][yi].push(s);
        }
    }
    Ok(events
        .into_iter()
        .zip(censors)
        .map(|(er, cr)| {
            er.into_iter()
                .zip(cr)
                .map(|(e, c)| CountingData::new(e, c))
                .collect()
        })
        .collect())
}
