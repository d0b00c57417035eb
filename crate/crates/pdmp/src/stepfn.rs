//! Right-continuous step functions and the two hazard-type estimators built
//! on them: the cumulative-hazard estimator (sum of d/Y over event times) and
//! the inverse-survival estimator obtained by exponentiating it jump by jump.

use crate::counting::CountingData;
use crate::error::{Error, Result};

/// A nondecreasing-in-time pure jump function, stored as jump times with
/// increments. `value(t)` sums the increments at times <= t, so the function
/// is right-continuous and zero before the first jump.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepFunction {
    times: Vec<f64>,
    increments: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepFunction {
    pub fn new(times: Vec<f64>, increments: Vec<f64>) -> Result<Self> {
        if times.len() != increments.len() {
            return Err(Error::InvalidArgument(format!(
                "{} jump times but {} increments",
                times.len(),
                increments.len()
            )));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "jump times must be strictly increasing".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) || increments.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument(
                "jump times and increments must be finite".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(increments.len());
        let mut acc = 0.0;
        for &d in &increments {
            acc += d;
            cumulative.push(acc);
        }
        Ok(StepFunction { times, increments, cumulative })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Number of jumps.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at t (right-continuous): the sum of increments with time <= t.
    pub fn value(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s <= t) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    /// Value just before t: the sum of increments with time < t.
    pub fn value_before(&self, t: f64) -> f64 {
        match self.times.partition_point(|&s| s < t) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    /// Jumps as (time, increment) pairs in time order.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.increments.iter().copied())
    }

    /// Total mass, i.e. the value after the last jump.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Cumulative-hazard estimator for one transition: a jump of d/Y at each
/// distinct event time, where d is the event multiplicity and Y the at-risk
/// count there. An empty at-risk set contributes zero (0 is treated as its
/// own reciprocal).
pub fn nelson_aalen(data: &CountingData) -> StepFunction {
    let events = data.event_times();
    let mut times = Vec::new();
    let mut increments = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let t = events[i];
        let mut d = 1usize;
        while i + d < events.len() && events[i + d] == t {
            d += 1;
        }
        let y = data.at_risk(t);
        if y > 0 {
            times.push(t);
            increments.push(d as f64 / y as f64);
        }
        i += d;
    }
    StepFunction::new(times, increments).expect("event times are sorted and finite")
}

/// Inverse-survival estimator: exp of the cumulative hazard, as a step
/// function with the same jump times. The increment at time s is
/// exp(H(s)) - exp(H(s-)) so the product-form value is recovered exactly by
/// summation.
pub fn inverse_survival(hazard: &StepFunction) -> StepFunction {
    let mut times = Vec::with_capacity(hazard.len());
    let mut increments = Vec::with_capacity(hazard.len());
    let mut before = 0.0f64;
    for (t, d) in hazard.jumps() {
        let after = before + d;
        times.push(t);
        increments.push(after.exp() - before.exp());
        before = after;
    }
    StepFunction::new(times, increments).expect("hazard jump times are valid")
}
