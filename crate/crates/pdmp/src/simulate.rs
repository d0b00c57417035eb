//! Exact simulation of the jump chain by inversion of the cumulative hazard.
//!
//! Waiting times are drawn by solving
//!
//! ```text
//!     int_0^T rate(flow(s, x)) ds = E,     E ~ Exp(1),
//! ```
//!
//! for T on [0, exit_time(x)]; when the total hazard over that interval is
//! below E, the jump is forced from the boundary at the exit time instead
//! and the waiting time is recorded as censored. The post-jump location is
//! drawn from the kernel row at the pre-jump position by inverse CDF.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::PdmpModel;
use crate::trajectory::{JumpRecord, Trajectory};

/// Absolute tolerance, in time units, of the hazard-inversion root solve.
const ROOT_TOL: f64 = 1e-12;
/// Absolute tolerance of quadrature-based cumulative rates.
const CUMULATIVE_RATE_TOL: f64 = 1e-10;

impl PdmpModel {
    /// Integrated jump rate along the flow, `int_0^t rate(flow(s, x)) ds`.
    /// Uses the registered closed form when available, adaptive Simpson
    /// quadrature otherwise.
    pub fn cumulative_rate(&self, x: f64, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("cumulative rate needs t >= 0, got {t}")));
        }
        if let Some(closed) = self.cumulative_rate_closed_form() {
            return Ok(closed(t, x));
        }
        crate::quad::adaptive_simpson(|s| self.rate(self.flow(s, x)), 0.0, t, CUMULATIVE_RATE_TOL)
    }

    /// Deterministic part of the waiting-time draw: given the Exp(1) value
    /// `e`, returns `(s, boundary)` where `s` solves the hazard-inversion
    /// equation, or the exit time with `boundary = true` when the total
    /// hazard before the boundary stays below `e`.
    pub fn interjump_from_exponential(&self, x: f64, e: f64) -> Result<(f64, bool)> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::InvalidArgument(format!("exponential draw must be positive, got {e}")));
        }
        let t_star = self.exit_time(x);
        let total = self.cumulative_rate(x, t_star)?;
        // equality (a spontaneous jump exactly at the boundary) is folded into
        // the boundary case so that `boundary <=> s == exit_time` holds
        if total <= e {
            return Ok((t_star, true));
        }
        Ok((self.invert_cumulative_rate(x, e, t_star)?, false))
    }

    /// Solves `cumulative_rate(x, t) = e` for t in (0, t_star] by bisection
    /// refined with safeguarded Newton steps (the derivative is the rate
    /// along the flow, which may vanish).
    fn invert_cumulative_rate(&self, x: f64, e: f64, t_star: f64) -> Result<f64> {
        let mut lo = 0.0;
        let mut hi = t_star;
        let mut t = 0.5 * t_star;
        for _ in 0..200 {
            let g = self.cumulative_rate(x, t)? - e;
            if g >= 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if hi - lo <= ROOT_TOL {
                break;
            }
            let slope = self.rate(self.flow(t, x));
            let newton = if slope > 0.0 { t - g / slope } else { f64::NAN };
            t = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        // the root is interior: g(0) = -e < 0 and g(t_star) > 0, so the
        // bracket keeps t strictly inside (0, t_star)
        debug_assert!(t > 0.0 && t < t_star);
        Ok(t.clamp(f64::MIN_POSITIVE, t_star))
    }

    /// Draws a waiting time from state x: `(s, boundary)` with
    /// s in (0, exit_time(x)] and `boundary` true iff s equals the exit time.
    pub fn sample_interjump<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<(f64, bool)> {
        let u: f64 = rng.sample(Open01);
        self.interjump_from_exponential(x, -u.ln())
    }

    /// Draws the next grid index from the kernel row at pre-jump position
    /// `position`, by inverse CDF over the normalized weights.
    pub fn sample_postjump<R: Rng + ?Sized>(&self, position: f64, rng: &mut R) -> Result<usize> {
        let mut weights = vec![0.0; self.grid().len()];
        self.sample_postjump_buffered(position, rng, &mut weights)
    }

    fn sample_postjump_buffered<R: Rng + ?Sized>(
        &self,
        position: f64,
        rng: &mut R,
        weights: &mut [f64],
    ) -> Result<usize> {
        self.kernel_weights_into(position, weights);
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::Model(format!(
                "kernel row at position {position} has total mass {total}"
            )));
        }
        let u: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last_charged = 0;
        for (i, &w) in weights.iter().enumerate() {
            debug_assert!(w >= 0.0);
            if w > 0.0 {
                last_charged = i;
            }
            acc += w;
            if u < acc {
                return Ok(i);
            }
        }
        // floating-point undershoot: attribute to the last charged point
        Ok(last_charged)
    }

    /// Simulates n jumps from `x0` (a grid point) with a dedicated ChaCha8
    /// stream: identical seeds give identical trajectories.
    pub fn simulate(&self, x0: f64, n: usize, seed: u64) -> Result<Trajectory> {
        let start = self.grid().require_index(x0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = vec![0.0; self.grid().len()];
        let mut records = Vec::with_capacity(n);
        let mut z = self.grid().value(start);
        for _ in 0..n {
            let (s, boundary) = self.sample_interjump(z, &mut rng)?;
            let position = self.flow(s, z);
            let next = self.sample_postjump_buffered(position, &mut rng, &mut weights)?;
            records.push(JumpRecord { z, s_next: s, boundary });
            z = self.grid().value(next);
        }
        Trajectory::new(seed, records, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StateGrid;

    fn constant_rate_model(c: f64) -> PdmpModel {
        PdmpModel::builder()
            .grid(StateGrid::new(vec![0.0, 0.2, 0.5]).unwrap())
            .flow(|t, x| x + t)
            .rate(move |_| c)
            .exit_time(|x| 1.0 - x)
            .cumulative_rate_closed_form(move |t, _| c * t)
            .kernel_weights(|_, w| w.fill(1.0))
            .build()
            .unwrap()
    }

    /// Same model but with the cumulative rate left to quadrature.
    fn constant_rate_model_quadrature(c: f64) -> PdmpModel {
        PdmpModel::builder()
            .grid(StateGrid::new(vec![0.0, 0.2, 0.5]).unwrap())
            .flow(|t, x| x + t)
            .rate(move |_| c)
            .exit_time(|x| 1.0 - x)
            .kernel_weights(|_, w| w.fill(1.0))
            .build()
            .unwrap()
    }

    #[test]
    fn cumulative_rate_constant() {
        let m = constant_rate_model(5.0);
        assert!((m.cumulative_rate(0.0, 0.3).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cumulative_rate_linear_closed_form_vs_quadrature() {
        // rate(z) = 20 z along flow x + t: int_0^t = 20 x t + 10 t^2
        let closed = PdmpModel::builder()
            .grid(StateGrid::new(vec![0.1]).unwrap())
            .flow(|t, x| x + t)
            .rate(|z| 20.0 * z)
            .exit_time(|x| 1.0 - x)
            .cumulative_rate_closed_form(|t, x| 20.0 * x * t + 10.0 * t * t)
            .kernel_weights(|_, w| w.fill(1.0))
            .build()
            .unwrap();
        let quad = PdmpModel::builder()
            .grid(StateGrid::new(vec![0.1]).unwrap())
            .flow(|t, x| x + t)
            .rate(|z| 20.0 * z)
            .exit_time(|x| 1.0 - x)
            .kernel_weights(|_, w| w.fill(1.0))
            .build()
            .unwrap();
        let a = closed.cumulative_rate(0.1, 0.2).unwrap();
        let b = quad.cumulative_rate(0.1, 0.2).unwrap();
        assert!((a - 0.8).abs() < 1e-12, "{a}");
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn cumulative_rate_rejects_negative_time() {
        let m = constant_rate_model(5.0);
        assert!(m.cumulative_rate(0.0, -0.1).is_err());
    }

    #[test]
    fn interjump_solves_constant_hazard() {
        // rate 5, exit time 0.8 from x = 0.2: e = 0.5 gives T = 0.1
        let m = constant_rate_model(5.0);
        let (s, boundary) = m.interjump_from_exponential(0.2, 0.5).unwrap();
        assert!(!boundary);
        assert!((s - 0.1).abs() < 1e-12, "{s}");
    }

    #[test]
    fn interjump_censors_at_boundary() {
        // from x = 0.9... grid top is 0.5: exit 0.5, total hazard 2.5 < e = 3
        let m = constant_rate_model(5.0);
        let (s, boundary) = m.interjump_from_exponential(0.5, 3.0).unwrap();
        assert!(boundary);
        assert_eq!(s, 0.5);
    }

    #[test]
    fn interjump_quadrature_path_agrees() {
        let closed = constant_rate_model(5.0);
        let quad = constant_rate_model_quadrature(5.0);
        for &e in &[0.01, 0.3, 1.7] {
            let (a, ab) = closed.interjump_from_exponential(0.0, e).unwrap();
            let (b, bb) = quad.interjump_from_exponential(0.0, e).unwrap();
            assert_eq!(ab, bb);
            assert!((a - b).abs() < 1e-9, "e={e}: {a} vs {b}");
        }
    }

    #[test]
    fn interjump_rejects_bad_exponential() {
        let m = constant_rate_model(5.0);
        assert!(m.interjump_from_exponential(0.0, 0.0).is_err());
        assert!(m.interjump_from_exponential(0.0, -1.0).is_err());
    }

    #[test]
    fn simulate_is_deterministic_and_well_formed() {
        let m = constant_rate_model(5.0);
        let a = m.simulate(0.0, 500, 99).unwrap();
        let b = m.simulate(0.0, 500, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert_eq!(a.seed(), 99);
        for r in a.records() {
            let t_star = m.exit_time(r.z);
            assert!(r.s_next > 0.0 && r.s_next <= t_star);
            assert_eq!(r.boundary, r.s_next == t_star);
            assert!(m.grid().index_of(r.z).is_some());
        }
        assert!(m.grid().index_of(a.final_state()).is_some());
        let c = m.simulate(0.0, 500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn simulate_rejects_off_grid_start() {
        let m = constant_rate_model(5.0);
        assert!(m.simulate(0.3, 10, 1).is_err());
    }

    #[test]
    fn zero_rate_always_hits_boundary() {
        let m = PdmpModel::builder()
            .grid(StateGrid::new(vec![0.0, 0.5]).unwrap())
            .flow(|t, x| x + t)
            .rate(|_| 0.0)
            .exit_time(|x| 1.0 - x)
            .cumulative_rate_closed_form(|_, _| 0.0)
            .kernel_weights(|_, w| w.fill(1.0))
            .build()
            .unwrap();
        let t = m.simulate(0.0, 50, 3).unwrap();
        for r in t.records() {
            assert!(r.boundary);
            assert_eq!(r.s_next, m.exit_time(r.z));
        }
    }

    #[test]
    fn postjump_respects_zero_weight() {
        use rand::SeedableRng;
        let m = PdmpModel::builder()
            .grid(StateGrid::new(vec![0.0, 0.3, 0.6]).unwrap())
            .flow(|t, x| x + t)
            .rate(|_| 1.0)
            .exit_time(|_| 1.0)
            .kernel_weights(|_, w| {
                w[0] = 1.0;
                w[1] = 0.0;
                w[2] = 3.0;
            })
            .build()
            .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let i = m.sample_postjump(0.1, &mut rng).unwrap();
            assert_ne!(i, 1);
        }
    }
}
