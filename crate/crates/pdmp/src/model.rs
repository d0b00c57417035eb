//! The process model: a deterministic flow, a state-dependent jump rate, a
//! transition kernel charging a finite grid, and a deterministic exit time
//! that forces a jump from the boundary.
//!
//! Between jumps the state follows the flow `t -> flow(t, x)`. A spontaneous
//! jump occurs with hazard `rate` along the flow; if none occurs before
//! `exit_time(x)` the process jumps from the boundary instead (the waiting
//! time is censored at the exit time). In both cases the next location is
//! drawn from the kernel evaluated at the pre-jump position, and the kernel
//! only ever charges points of the grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::StateGrid;

pub type FlowFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Fills unnormalized, nonnegative kernel weights over the grid for a given
/// pre-jump position. The slice has one entry per grid point.
pub type KernelFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct PdmpModel {
    grid: StateGrid,
    flow: FlowFn,
    rate: StateFn,
    kernel: KernelFn,
    exit_time: StateFn,
    cumulative_rate_closed_form: Option<FlowFn>,
}

impl std::fmt::Debug for PdmpModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdmpModel")
            .field("grid", &self.grid)
            .field(
                "cumulative_rate_closed_form",
                &self.cumulative_rate_closed_form.is_some(),
            )
            .finish_non_exhaustive()
    }
}

pub struct PdmpModelBuilder {
    grid: Option<StateGrid>,
    flow: Option<FlowFn>,
    rate: Option<StateFn>,
    kernel: Option<KernelFn>,
    exit_time: Option<StateFn>,
    cumulative_rate_closed_form: Option<FlowFn>,
}

impl PdmpModelBuilder {
    pub fn grid(mut self, grid: StateGrid) -> Self {
        self.grid = Some(grid);
        self
    }

    /// Deterministic motion: `flow(t, x)` is the position after following the
    /// flow for time t from x. Must satisfy `flow(0, x) = x` and the
    /// semigroup property `flow(t + s, x) = flow(s, flow(t, x))`.
    pub fn flow(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.flow = Some(Arc::new(f));
        self
    }

    /// Jump rate as a function of position; must be nonnegative.
    pub fn rate(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rate = Some(Arc::new(f));
        self
    }

    /// Kernel weights over the grid at a pre-jump position. Weights need not
    /// be normalized; they must be nonnegative, finite, and not all zero.
    pub fn kernel_weights(
        mut self,
        f: impl Fn(f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.kernel = Some(Arc::new(f));
        self
    }

    /// Deterministic exit time from x (time to reach the boundary along the
    /// flow); must be positive and finite on the grid.
    pub fn exit_time(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exit_time = Some(Arc::new(f));
        self
    }

    /// Optional closed form for `(x, t) -> int_0^t rate(flow(s, x)) ds`.
    /// When absent, the integral is computed by adaptive quadrature.
    pub fn cumulative_rate_closed_form(
        mut self,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.cumulative_rate_closed_form = Some(Arc::new(f));
        self
    }

    /// Validates the cheap structural invariants and builds the model:
    /// nonempty grid, `flow(0, x) = x`, positive finite exit times, and
    /// kernel rows that are nonnegative with positive total mass at every
    /// grid point.
    pub fn build(self) -> Result<PdmpModel> {
        let grid = self.grid.ok_or_else(|| Error::Model("missing grid".into()))?;
        let flow = self.flow.ok_or_else(|| Error::Model("missing flow".into()))?;
        let rate = self.rate.ok_or_else(|| Error::Model("missing rate".into()))?;
        let kernel = self.kernel.ok_or_else(|| Error::Model("missing kernel".into()))?;
        let exit_time = self
            .exit_time
            .ok_or_else(|| Error::Model("missing exit time".into()))?;

        let mut weights = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            let x = grid.value(i);
            if (flow(0.0, x) - x).abs() > 1e-12 {
                return Err(Error::Model(format!("flow(0, {x}) != {x}")));
            }
            let t_star = exit_time(x);
            if !t_star.is_finite() || t_star <= 0.0 {
                return Err(Error::Model(format!("exit time at {x} is {t_star}")));
            }
            let r = rate(x);
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Model(format!("rate at {x} is {r}")));
            }
            kernel(x, &mut weights);
            let mut total = 0.0;
            for &w in &weights {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Model(format!("kernel weight {w} at state {x}")));
                }
                total += w;
            }
            if total <= 0.0 {
                return Err(Error::Model(format!("kernel row at state {x} has no mass")));
            }
        }
        Ok(PdmpModel {
            grid,
            flow,
            rate,
            kernel,
            exit_time,
            cumulative_rate_closed_form: self.cumulative_rate_closed_form,
        })
    }
}

impl PdmpModel {
    pub fn builder() -> PdmpModelBuilder {
        PdmpModelBuilder {
            grid: None,
            flow: None,
            rate: None,
            kernel: None,
            exit_time: None,
            cumulative_rate_closed_form: None,
        }
    }

    pub fn grid(&self) -> &StateGrid {
        &self.grid
    }

    pub fn flow(&self, t: f64, x: f64) -> f64 {
        (self.flow)(t, x)
    }

    pub fn rate(&self, x: f64) -> f64 {
        (self.rate)(x)
    }

    pub fn exit_time(&self, x: f64) -> f64 {
        (self.exit_time)(x)
    }

    /// Exit times of every grid point, in grid order.
    pub fn exit_times(&self) -> Vec<f64> {
        self.grid.points().iter().map(|&x| self.exit_time(x)).collect()
    }

    pub(crate) fn kernel_weights_into(&self, position: f64, weights: &mut [f64]) {
        debug_assert_eq!(weights.len(), self.grid.len());
        (self.kernel)(position, weights);
    }

    pub(crate) fn cumulative_rate_closed_form(&self) -> Option<&FlowFn> {
        self.cumulative_rate_closed_form.as_ref()
    }

    /// Normalized kernel row at a pre-jump position: a probability vector
    /// over the grid (sums to one by construction).
    pub fn kernel_distribution(&self, position: f64) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.grid.len()];
        (self.kernel)(position, &mut w);
        let total: f64 = w.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Model(format!(
                "kernel row at position {position} has total mass {total}"
            )));
        }
        for v in &mut w {
            *v /= total;
        }
        Ok(w)
    }

    /// Largest self-transition probability over grid points,
    /// max_x Q({x} | x). Models approximating a continuous kernel on a grid
    /// may legitimately carry self-mass, so this is a diagnostic rather than
    /// a construction error.
    pub fn max_kernel_self_mass(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            let row = self.kernel_distribution(self.grid.value(i))?;
            worst = worst.max(row[i]);
        }
        Ok(worst)
    }

    /// Largest semigroup defect |flow(t+s, x) - flow(s, flow(t, x))| over
    /// pseudo-random triples with t, s in [0, exit_time(x)].
    pub fn semigroup_defect(&self, triples: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..triples {
            let i = rng.gen_range(0..self.grid.len());
            let x = self.grid.value(i);
            let horizon = self.exit_time(x);
            let t = rng.gen::<f64>() * horizon;
            let s = rng.gen::<f64>() * (horizon - t).max(0.0);
            let direct = self.flow(t + s, x);
            let composed = self.flow(s, self.flow(t, x));
            worst = worst.max((direct - composed).abs());
        }
        worst
    }
}
