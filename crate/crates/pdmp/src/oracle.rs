//! Ground truth by numerical integration, straight from the model
//! definition.
//!
//! Everything here is computed from the flow, the rate, and the kernel by
//! quadrature; none of it touches the trajectory-based estimators, so the two
//! sides can be compared as independent witnesses. The central object is the
//! transformed per-destination hazard
//!
//!   h(t | x, y) = f(t|x) q_y(t) / ( int_t^{T} f(s|x) q_y(s) ds + G(T|x) q_y(T) ),
//!
//! where T is the deterministic exit time from x, f and G are the waiting
//! time density and survival function, and q_y(s) is the kernel mass of y at
//! the position reached at time s. Its value at t = 0, weighted by the
//! destination probabilities, recovers the jump rate at x.

use crate::basis::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::model::PdmpModel;
use crate::quad::{adaptive_simpson, GaussLegendre};

/// Quadrature budget for the ground-truth computations.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Absolute tolerance of the adaptive quadratures (denominators,
    /// destination probabilities).
    pub abs_tol: f64,
    /// Node density of the fixed composite rules used for coefficient and
    /// cumulative-hazard integrals, in nodes per unit length.
    pub nodes_per_unit: usize,
    /// Geometric subdivisions toward the right endpoint when integrating the
    /// transformed hazard over its whole support; the rule never evaluates at
    /// the endpoint itself, so integrable blow-ups there are tolerated.
    pub tail_splits: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { abs_tol: 1e-9, nodes_per_unit: 512, tail_splits: 40 }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.nodes_per_unit == 0 {
            return Err(Error::InvalidArgument(
                "node density must be positive".into(),
            ));
        }
        if self.tail_splits == 0 || self.tail_splits > 48 {
            return Err(Error::InvalidArgument(format!(
                "tail splits must lie in 1..=48, got {}",
                self.tail_splits
            )));
        }
        Ok(())
    }
}

fn check_time(t: f64, t_star: f64) -> Result<()> {
    if !(t >= 0.0 && t < t_star) {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [0, exit time {t_star})"
        )));
    }
    Ok(())
}

/// Survival function of the waiting time from x, G(t|x).
pub fn survival(model: &PdmpModel, x: f64, t: f64) -> Result<f64> {
    Ok((-model.cumulative_rate(x, t)?).exp())
}

/// Continuous part of the waiting-time density from x,
/// f(t|x) = rate(flow(t, x)) G(t|x). The boundary atom at the exit time T
/// carries the remaining mass G(T|x).
pub fn density(model: &PdmpModel, x: f64, t: f64) -> Result<f64> {
    Ok(model.rate(model.flow(t, x)) * survival(model, x, t)?)
}

/// f(t|x) as a plain function for use inside quadratures; errors surface as
/// NaN, which the adaptive integrator turns into a convergence failure.
fn density_or_nan(model: &PdmpModel, x: f64, t: f64) -> f64 {
    density(model, x, t).unwrap_or(f64::NAN)
}

/// Kernel mass of grid index `yi` at `position`; NaN when the kernel row is
/// degenerate there.
fn kernel_mass_or_nan(model: &PdmpModel, position: f64, yi: usize, buf: &mut [f64]) -> f64 {
    model.kernel_weights_into(position, buf);
    let total: f64 = buf.iter().sum();
    if total.is_finite() && total > 0.0 {
        buf[yi] / total
    } else {
        f64::NAN
    }
}

/// Transformed hazard h(t | x, y) for a single time point.
pub fn transition_hazard(
    model: &PdmpModel,
    x: f64,
    y: f64,
    t: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    Ok(transition_hazard_profile(model, x, y, &[t], cfg)?[0])
}

/// Transformed hazard at several time points at once. `ts` must be ascending
/// within [0, exit time); sharing one call amortizes the tail integrals,
/// which are accumulated once between consecutive points instead of being
/// recomputed from scratch for each.
pub fn transition_hazard_profile(
    model: &PdmpModel,
    x: f64,
    y: f64,
    ts: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let yi = model.grid().require_index(y)?;
    let t_star = model.exit_time(x);
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    for w in ts.windows(2) {
        if w[0] > w[1] {
            return Err(Error::InvalidArgument(
                "evaluation times must be ascending".into(),
            ));
        }
    }
    for &t in ts {
        check_time(t, t_star)?;
    }

    let m = model.grid().len();
    let mut buf = vec![0.0; m];
    let boundary_position = model.flow(t_star, x);
    let atom =
        survival(model, x, t_star)? * kernel_mass_or_nan(model, boundary_position, yi, &mut buf);

    // integral of f * q_y over each [ts[k], ts[k+1]] and the final stretch
    // to the exit time, each with a tolerance proportional to its width so
    // the accumulated error stays within cfg.abs_tol
    let mut chunks = Vec::with_capacity(ts.len());
    for k in 0..ts.len() {
        let a = ts[k];
        let b = if k + 1 < ts.len() { ts[k + 1] } else { t_star };
        let tol = (cfg.abs_tol * (b - a).max(f64::EPSILON) / t_star).max(f64::MIN_POSITIVE);
        let integrand = |s: f64| {
            let phi = model.flow(s, x);
            density_or_nan(model, x, s) * kernel_mass_or_nan(model, phi, yi, &mut buf)
        };
        chunks.push(adaptive_simpson(integrand, a, b, tol)?);
    }
    // suffix sums: tail[k] = integral from ts[k] to the exit time
    let mut tail = vec![0.0; ts.len()];
    let mut acc = 0.0;
    for k in (0..ts.len()).rev() {
        acc += chunks[k];
        tail[k] = acc;
    }

    let mut out = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let phi = model.flow(t, x);
        let numerator = density_or_nan(model, x, t) * kernel_mass_or_nan(model, phi, yi, &mut buf);
        let denominator = tail[k] + atom;
        if !(denominator > 0.0) || !denominator.is_finite() {
            return Err(Error::Model(format!(
                "transition {x} -> {y} has vanishing probability beyond t = {t}"
            )));
        }
        out.push(numerator / denominator);
    }
    Ok(out)
}

/// Integral of the transformed hazard from 0 to each requested time,
/// by composite Gauss-Legendre panels between consecutive points.
pub fn cumulative_transition_hazard(
    model: &PdmpModel,
    x: f64,
    y: f64,
    ts: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let t_star = model.exit_time(x);
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    for w in ts.windows(2) {
        if w[0] > w[1] {
            return Err(Error::InvalidArgument(
                "evaluation times must be ascending".into(),
            ));
        }
    }
    for &t in ts {
        check_time(t, t_star)?;
    }

    let rule = GaussLegendre::new(16);
    let mut nodes: Vec<(f64, f64, usize)> = Vec::new(); // (time, weight, panel)
    let mut prev = 0.0;
    for (panel, &b) in ts.iter().enumerate() {
        let width = b - prev;
        if width > 0.0 {
            let pieces = ((width * cfg.nodes_per_unit as f64 / 16.0).ceil() as usize).max(1);
            for i in 0..pieces {
                let pa = prev + width * i as f64 / pieces as f64;
                let pb = prev + width * (i + 1) as f64 / pieces as f64;
                for (s, w) in rule.mapped(pa, pb) {
                    nodes.push((s, w, panel));
                }
            }
        }
        prev = b;
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let times: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let hazard = transition_hazard_profile(model, x, y, &times, cfg)?;

    let mut panel_sums = vec![0.0; ts.len()];
    for ((_, w, panel), h) in nodes.iter().zip(&hazard) {
        panel_sums[*panel] += w * h;
    }
    let mut out = Vec::with_capacity(ts.len());
    let mut acc = 0.0;
    for s in panel_sums {
        acc += s;
        out.push(acc);
    }
    Ok(out)
}

/// u-space panels covering [0, 1) with geometric refinement toward 1.
fn unit_panels_with_tail(cfg: &OracleConfig) -> Vec<(f64, f64)> {
    let mut panels = vec![(0.0, 0.5)];
    for j in 1..=cfg.tail_splits as i32 {
        let a = 1.0 - (2.0f64).powi(-j);
        let b = 1.0 - (2.0f64).powi(-j - 1);
        if b > a && b < 1.0 {
            panels.push((a, b));
        }
    }
    panels
}

/// Ground-truth basis coefficients theta_p(x, y) for p = 0..=tau: the
/// integral over [0, 1] of B_p(u) h(T u | x, y), with T the exit time from x.
pub fn basis_coefficients(
    model: &PdmpModel,
    basis: &OrthonormalBasis,
    tau: usize,
    x: f64,
    y: f64,
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if tau >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {tau} out of range for a basis of {} functions",
            basis.len()
        )));
    }
    let t_star = model.exit_time(x);
    let rule = GaussLegendre::new(16);
    let mut us: Vec<(f64, f64)> = Vec::new(); // (u, weight)
    for (a, b) in unit_panels_with_tail(cfg) {
        let width = b - a;
        let pieces = ((width * cfg.nodes_per_unit as f64 / 16.0).ceil() as usize).max(1);
        for i in 0..pieces {
            let pa = a + width * i as f64 / pieces as f64;
            let pb = a + width * (i + 1) as f64 / pieces as f64;
            us.extend(rule.mapped(pa, pb));
        }
    }
    us.sort_by(|p, q| p.0.total_cmp(&q.0));
    let times: Vec<f64> = us.iter().map(|&(u, _)| (u * t_star).min(t_star * (1.0 - 1e-15))).collect();
    let hazard = transition_hazard_profile(model, x, y, &times, cfg)?;

    let mut theta = vec![0.0; tau + 1];
    let mut vals = vec![0.0; basis.len()];
    for (&(u, w), &h) in us.iter().zip(&hazard) {
        basis.eval_all(u, &mut vals);
        for (tp, v) in theta.iter_mut().zip(&vals) {
            *tp += w * v * h;
        }
    }
    Ok(theta)
}

/// Single ground-truth coefficient; see `basis_coefficients`.
pub fn basis_coefficient(
    model: &PdmpModel,
    basis: &OrthonormalBasis,
    p: usize,
    x: f64,
    y: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    Ok(basis_coefficients(model, basis, p, x, y, cfg)?[p])
}

/// Probability that the next state is y when starting from x: the integral
/// of f q_y over the sojourn plus the boundary atom.
pub fn transition_probability(
    model: &PdmpModel,
    x: f64,
    y: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    cfg.validate()?;
    let yi = model.grid().require_index(y)?;
    let t_star = model.exit_time(x);
    let m = model.grid().len();
    let mut buf = vec![0.0; m];
    let integrand = |s: f64| {
        let phi = model.flow(s, x);
        density_or_nan(model, x, s) * kernel_mass_or_nan(model, phi, yi, &mut buf)
    };
    let inner = adaptive_simpson(integrand, 0.0, t_star, cfg.abs_tol)?;
    let mut buf = vec![0.0; m];
    let boundary = survival(model, x, t_star)?
        * kernel_mass_or_nan(model, model.flow(t_star, x), yi, &mut buf);
    Ok(inner + boundary)
}

/// Ground-truth one-step transition matrix of the embedded chain, rows
/// indexed by grid order. Each row sums to one up to quadrature error.
pub fn transition_matrix(model: &PdmpModel, cfg: &OracleConfig) -> Result<Vec<Vec<f64>>> {
    let pts: Vec<f64> = model.grid().points().to_vec();
    pts.iter()
        .map(|&x| pts.iter().map(|&y| transition_probability(model, x, y, cfg)).collect())
        .collect()
}

/// Stationary distribution of a stochastic matrix by damped power iteration
/// (the lazy chain (P + I)/2 has the same stationary vector and converges
/// even for periodic chains).
pub fn stationary_distribution(matrix: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = matrix.len();
    if m == 0 || matrix.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidArgument("transition matrix must be square".into()));
    }
    for (i, row) in matrix.iter().enumerate() {
        let total: f64 = row.iter().sum();
        if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "row {i} is not a probability vector (sum {total})"
            )));
        }
    }
    let mut v = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    for _ in 0..200_000 {
        for item in next.iter_mut() {
            *item = 0.0;
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                next[j] += v[i] * 0.5 * p;
            }
        }
        for (nj, &vj) in next.iter_mut().zip(&v) {
            *nj += 0.5 * vj;
        }
        let total: f64 = next.iter().sum();
        for nj in next.iter_mut() {
            *nj /= total;
        }
        let diff = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if diff < 1e-14 {
            return Ok(v);
        }
    }
    Err(Error::Model("stationary distribution iteration did not converge".into()))
}

/// | rate(x) - sum_y h(0 | x, y) R(y | x) |: how well the numerics satisfy
/// the identity that grounds the whole estimation approach. Zero in exact
/// arithmetic for every model.
pub fn characterization_residual(model: &PdmpModel, x: f64, cfg: &OracleConfig) -> Result<f64> {
    let mut sum = 0.0;
    for &y in model.grid().points() {
        let r = transition_probability(model, x, y, cfg)?;
        if r > cfg.abs_tol {
            sum += transition_hazard(model, x, y, 0.0, cfg)? * r;
        }
    }
    Ok((model.rate(x) - sum).abs())
}

/// Ground-truth analogue of the plug-in rate estimate: truncated basis
/// expansion of the transformed hazards, evaluated at zero and weighted by
/// the destination probabilities. The gap to rate(x) is the truncation bias.
pub fn jump_rate_from_basis(
    model: &PdmpModel,
    basis: &OrthonormalBasis,
    tau: usize,
    x: f64,
    cfg: &OracleConfig,
) -> Result<f64> {
    let zeros = basis.values_at_zero();
    let mut rate = 0.0;
    for &y in model.grid().points() {
        let r = transition_probability(model, x, y, cfg)?;
        if r <= cfg.abs_tol {
            continue;
        }
        let theta = basis_coefficients(model, basis, tau, x, y, cfg)?;
        let head: f64 = zeros.iter().zip(&theta).map(|(b0, t)| b0 * t).sum();
        rate += r * head;
    }
    Ok(rate)
}
