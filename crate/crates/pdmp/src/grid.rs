use crate::error::{Error, Result};

/// The finite set of points charged by the transition kernel, kept in
/// strictly increasing order. Post-jump locations always come from this set,
/// so membership tests use exact floating-point equality.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    points: Vec<f64>,
}

impl StateGrid {
    /// Builds a grid from strictly increasing, finite state values.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("state grid must be nonempty".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("state grid values must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "state grid values must be strictly increasing".into(),
            ));
        }
        Ok(StateGrid { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value of the i-th grid point. Panics if out of range.
    pub fn value(&self, index: usize) -> f64 {
        self.points[index]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Index of a grid point by exact value, if present.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }

    /// Like [`index_of`](Self::index_of) but returns an error naming the state.
    pub fn require_index(&self, x: f64) -> Result<usize> {
        self.index_of(x)
            .ok_or_else(|| Error::InvalidArgument(format!("state {x} is not on the grid")))
    }
}
