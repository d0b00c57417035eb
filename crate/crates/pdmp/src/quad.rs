//! Quadrature primitives: Gauss-Legendre rules (for inner products of basis
//! functions) and adaptive Simpson integration (for hazard integrals).

use crate::error::{Error, Result};

/// Gauss-Legendre rule on [-1, 1]. Nodes are roots of the Legendre
/// polynomial P_n, found by Newton iteration from the Chebyshev guess; the
/// rule is exact for polynomials of degree <= 2n - 1.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_poly(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates f over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

/// P_n(x) and its derivative, by the three-term recurrence.
fn legendre_poly(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates f over consecutive segments given by `breakpoints` (ascending),
/// applying the rule on each segment.
pub fn composite<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    breakpoints: &[f64],
    mut f: F,
) -> f64 {
    let mut acc = 0.0;
    for w in breakpoints.windows(2) {
        acc += rule.integrate(w[0], w[1], &mut f);
    }
    acc
}

/// Adaptive Simpson integration with an absolute tolerance. Returns an error
/// if the recursion cannot reach the tolerance (integrand too rough or the
/// tolerance unreasonably small).
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    // a prime number of initial panels, so integrands aligned with the dyadic
    // refinement pattern (periodic functions sampled exactly at their period)
    // cannot fool the top-level error estimate into stopping immediately
    const PANELS: usize = 5;
    let sub_tol = abs_tol / PANELS as f64;
    let h = (b - a) / PANELS as f64;
    let mut acc = 0.0;
    for k in 0..PANELS {
        let pa = a + h * k as f64;
        let pb = if k + 1 == PANELS { b } else { a + h * (k + 1) as f64 };
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        let whole = simpson(pa, pb, fa, fm, fb);
        acc += simpson_rec(&mut f, pa, pb, fa, fm, fb, whole, sub_tol, 200)?;
    }
    Ok(acc)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    // Cell at floating-point resolution: the sample points can no longer be
    // strictly interleaved, so accept the current refinement. The cell's
    // contribution is bounded by its width, a few ulps of its position.
    if !(a < lm && lm < m && m < rm && rm < b) {
        return Ok(whole);
    }
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "adaptive Simpson exhausted recursion depth on [{a}, {b}]"
        )));
    }
    let lv = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

/// Fixed-step trapezoid rule. Slow but entirely independent of the adaptive
/// path; kept for cross-checks.
pub fn trapezoid<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, steps: usize) -> f64 {
    assert!(steps >= 1);
    let h = (b - a) / steps as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for k in 1..steps {
        acc += f(a + h * k as f64);
    }
    acc * h
}
