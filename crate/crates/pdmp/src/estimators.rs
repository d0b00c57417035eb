//! Jump-rate estimation from an observed trajectory.
//!
//! The pipeline: empirical transition matrix and occupation frequencies, per
//! pair cumulative-hazard estimates, basis coefficients of the transition
//! hazard, their variances, and finally the plug-in jump rate on the grid,
//!
//!   rate(x) = sum_{p <= tau} B_p(0) * sum_y R(y|x) * theta_p(x, y).

use crate::basis::OrthonormalBasis;
use crate::counting::counting_all;
use crate::error::{Error, Result};
use crate::grid::StateGrid;
use crate::stepfn::{inverse_survival, nelson_aalen, StepFunction};
use crate::trajectory::Trajectory;

/// Empirical transition matrix and occupation measure over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionEstimate {
    points: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    occupation: Vec<f64>,
    visits: Vec<usize>,
    pair_counts: Vec<Vec<usize>>,
    sample_size: usize,
}

impl TransitionEstimate {
    /// Estimated transition row out of the state with grid index `x`.
    /// Errors if the state was never visited.
    pub fn row(&self, x: usize) -> Result<&[f64]> {
        if self.visits[x] == 0 {
            return Err(Error::UnvisitedState(self.points[x]));
        }
        Ok(&self.matrix[x])
    }

    pub fn probability(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Fraction of jump origins equal to each grid state; sums to one.
    pub fn occupation(&self) -> &[f64] {
        &self.occupation
    }

    pub fn visits(&self) -> &[usize] {
        &self.visits
    }

    pub fn pair_count(&self, x: usize, y: usize) -> usize {
        self.pair_counts[x][y]
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }
}

/// Empirical transition matrix, visit counts, and occupation frequencies
/// from the n recorded jumps of a trajectory.
pub fn estimate_transition(traj: &Trajectory, grid: &StateGrid) -> Result<TransitionEstimate> {
    if traj.len() == 0 {
        return Err(Error::InvalidArgument(
            "cannot estimate transitions from an empty trajectory".into(),
        ));
    }
    let m = grid.len();
    let mut pair_counts = vec![vec![0usize; m]; m];
    let mut visits = vec![0usize; m];
    for (from, to, _s, _boundary) in traj.transitions() {
        let xi = grid.require_index(from)?;
        let yi = grid.require_index(to)?;
        visits[xi] += 1;
        pair_counts[xi][yi] += 1;
    }
    let n = traj.len();
    let matrix = pair_counts
        .iter()
        .zip(&visits)
        .map(|(row, &v)| {
            if v == 0 {
                vec![0.0; m]
            } else {
                row.iter().map(|&c| c as f64 / v as f64).collect()
            }
        })
        .collect();
    let occupation = visits.iter().map(|&v| v as f64 / n as f64).collect();
    Ok(TransitionEstimate {
        points: grid.points().to_vec(),
        matrix,
        occupation,
        visits,
        pair_counts,
        sample_size: n,
    })
}

/// Basis coefficient of the transition hazard for one pair:
/// the integral of B_p(t / t_star) against the cumulative-hazard increments,
/// divided by t_star.
pub fn hazard_coefficient(
    hazard: &StepFunction,
    basis: &OrthonormalBasis,
    p: usize,
    t_star: f64,
) -> Result<f64> {
    check_coefficient_args(hazard, basis, p, t_star)?;
    let mut sum = 0.0;
    for (t, d) in hazard.jumps() {
        sum += basis.eval(p, t / t_star) * d;
    }
    Ok(sum / t_star)
}

/// Variance estimate for one coefficient: the integral of B_p(t / t_star)^2
/// against the inverse-survival increments, divided by
/// transition_prob * occupation * t_star^2.
pub fn coefficient_variance(
    inv_survival: &StepFunction,
    basis: &OrthonormalBasis,
    p: usize,
    t_star: f64,
    transition_prob: f64,
    occupation: f64,
) -> Result<f64> {
    check_coefficient_args(inv_survival, basis, p, t_star)?;
    if !(transition_prob > 0.0) || !(occupation > 0.0) {
        return Err(Error::InvalidArgument(
            "coefficient variance needs a positive transition probability and \
             occupation frequency (was the transition ever observed?)"
                .into(),
        ));
    }
    let mut sum = 0.0;
    for (t, d) in inv_survival.jumps() {
        let b = basis.eval(p, t / t_star);
        sum += b * b * d;
    }
    Ok(sum / (transition_prob * occupation * t_star * t_star))
}

fn check_coefficient_args(
    jumps: &StepFunction,
    basis: &OrthonormalBasis,
    p: usize,
    t_star: f64,
) -> Result<()> {
    if p >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "basis index {p} out of range for a basis of {} functions",
            basis.len()
        )));
    }
    if !(t_star.is_finite() && t_star > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "deterministic exit time must be positive and finite, got {t_star}"
        )));
    }
    if jumps.times().iter().any(|&t| !(0.0..=t_star).contains(&t)) {
        return Err(Error::InvalidArgument(
            "jump times must lie in [0, exit time]".into(),
        ));
    }
    Ok(())
}

/// Everything produced by a full estimation pass.
#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub transition: TransitionEstimate,
    /// coefficients[p][x][y] for p = 0..=truncation; zero when the pair was
    /// never observed.
    pub coefficients: Vec<Vec<Vec<f64>>>,
    /// variances[p][x][y]; `None` when the pair was never observed.
    pub variances: Vec<Vec<Vec<Option<f64>>>>,
    /// Estimated jump rate per grid state; `None` for unvisited states.
    pub jump_rate: Vec<Option<f64>>,
    pub truncation: usize,
    pub sample_size: usize,
    /// Pairs (x, y) with x visited but no x -> y observation. These
    /// contribute zero to the rate sums; callers may want to warn.
    pub unobserved_pairs: Vec<(usize, usize)>,
}

impl EstimationResult {
    pub fn variance(&self, p: usize, x: usize, y: usize) -> Option<f64> {
        self.variances[p][x][y]
    }
}

/// Combine transition probabilities and hazard coefficients into the plug-in
/// jump-rate estimate at every grid state. `coefficients[p][x][y]` must cover
/// p = 0..=truncation; unvisited states yield `None`.
pub fn assemble_jump_rate(
    basis: &OrthonormalBasis,
    transition: &TransitionEstimate,
    coefficients: &[Vec<Vec<f64>>],
    truncation: usize,
) -> Result<Vec<Option<f64>>> {
    if truncation >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} out of range for a basis of {} functions",
            basis.len()
        )));
    }
    if coefficients.len() <= truncation {
        return Err(Error::InvalidArgument(format!(
            "need coefficients for {} basis functions, got {}",
            truncation + 1,
            coefficients.len()
        )));
    }
    let m = transition.occupation().len();
    let zeros = basis.values_at_zero();
    let mut out = Vec::with_capacity(m);
    for x in 0..m {
        if transition.visits()[x] == 0 {
            out.push(None);
            continue;
        }
        let mut rate = 0.0;
        for (p, &b0) in zeros.iter().enumerate().take(truncation + 1) {
            let mut inner = 0.0;
            for y in 0..m {
                inner += transition.probability(x, y) * coefficients[p][x][y];
            }
            rate += b0 * inner;
        }
        out.push(Some(rate));
    }
    Ok(out)
}

/// Full estimation pass: transitions, per-pair hazards, coefficients up to
/// the truncation index, variances, and the assembled jump rate.
/// `exit_times[i]` is the deterministic exit time from grid state i.
pub fn estimate_all(
    traj: &Trajectory,
    grid: &StateGrid,
    exit_times: &[f64],
    basis: &OrthonormalBasis,
    truncation: usize,
) -> Result<EstimationResult> {
    let m = grid.len();
    if exit_times.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} exit times for a grid of {} states",
            exit_times.len(),
            m
        )));
    }
    if let Some(&bad) = exit_times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "exit times must be positive and finite, got {bad}"
        )));
    }
    if truncation >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} out of range for a basis of {} functions",
            basis.len()
        )));
    }

    let transition = estimate_transition(traj, grid)?;
    let counting = counting_all(traj, grid)?;

    let mut coefficients = vec![vec![vec![0.0; m]; m]; truncation + 1];
    let mut variances = vec![vec![vec![None; m]; m]; truncation + 1];
    let mut unobserved = Vec::new();
    let mut vals = vec![0.0; basis.len()];

    for x in 0..m {
        if transition.visits()[x] == 0 {
            continue;
        }
        let t_star = exit_times[x];
        for y in 0..m {
            if transition.pair_count(x, y) == 0 {
                unobserved.push((x, y));
                continue;
            }
            let hazard = nelson_aalen(&counting[x][y]);
            let ginv = inverse_survival(&hazard);
            let mut theta = vec![0.0; truncation + 1];
            let mut var = vec![0.0; truncation + 1];
            for ((t, dh), (_, dg)) in hazard.jumps().zip(ginv.jumps()) {
                debug_assert!(t <= t_star);
                basis.eval_all(t / t_star, &mut vals);
                for p in 0..=truncation {
                    theta[p] += vals[p] * dh;
                    var[p] += vals[p] * vals[p] * dg;
                }
            }
            let weight =
                transition.probability(x, y) * transition.occupation()[x] * t_star * t_star;
            for p in 0..=truncation {
                coefficients[p][x][y] = theta[p] / t_star;
                variances[p][x][y] = Some(var[p] / weight);
            }
        }
    }

    let jump_rate = assemble_jump_rate(basis, &transition, &coefficients, truncation)?;
    let sample_size = transition.sample_size();
    Ok(EstimationResult {
        transition,
        coefficients,
        variances,
        jump_rate,
        truncation,
        sample_size,
        unobserved_pairs: unobserved,
    })
}
