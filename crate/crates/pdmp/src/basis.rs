//! Orthonormal function families on [0, 1].
//!
//! The estimator expands a transformed hazard in an orthonormal basis of
//! L2([0, 1], dt) and only ever uses finitely many functions. Three families
//! are provided:
//!
//! * `spline`: {1, x, x^2, x^3, (x - k_j)_+^3} orthonormalized by modified
//!   Gram-Schmidt (the default has five interior knots at j/6);
//! * `fourier`: {1} with the pairs {sqrt(2) cos(2 pi p s), sqrt(2) sin(2 pi p s)};
//! * `legendre`: shifted Legendre polynomials sqrt(2p+1) P_p(2s - 1).
//!
//! Inner products are composite Gauss-Legendre quadratures whose segments
//! follow the natural breakpoints of the family (knot intervals for splines,
//! one segment per oscillation for Fourier), so they are exact to rounding
//! for every product this crate integrates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

pub type BasisFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ratio below which a post-projection norm is treated as a linear
/// dependence rather than a small but genuine new direction.
const PIVOT_TOL: f64 = 1e-12;
/// Gauss-Legendre nodes per quadrature segment; exact for piecewise
/// polynomials up to degree 127 and far beyond what any product here needs.
const NODES_PER_SEGMENT: usize = 64;

/// Which named family a basis came from; drives family-specific behavior
/// (default truncation, the zero-evaluation envelope, smoothness claims).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisFamily {
    Spline,
    Fourier { max_index: usize },
    Legendre { max_degree: usize },
    Custom,
}

/// A family of linearly independent (not yet orthonormal) functions.
#[derive(Clone)]
pub struct RawBasis {
    functions: Vec<BasisFn>,
    labels: Vec<String>,
    breakpoints: Vec<f64>,
    family: BasisFamily,
}

impl RawBasis {
    /// Builds a raw family and verifies linear independence through a pivoted
    /// Cholesky factorization of the quadrature Gram matrix.
    pub fn new(
        functions: Vec<BasisFn>,
        labels: Vec<String>,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        Self::with_family(functions, labels, breakpoints, BasisFamily::Custom)
    }

    fn with_family(
        functions: Vec<BasisFn>,
        labels: Vec<String>,
        breakpoints: Vec<f64>,
        family: BasisFamily,
    ) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidArgument("basis needs at least one function".into()));
        }
        if functions.len() != labels.len() {
            return Err(Error::InvalidArgument("one label per basis function".into()));
        }
        if breakpoints.len() < 2
            || breakpoints[0] != 0.0
            || *breakpoints.last().unwrap() != 1.0
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        let raw = RawBasis { functions, labels, breakpoints, family };
        raw.check_independence()?;
        Ok(raw)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn eval(&self, i: usize, s: f64) -> f64 {
        (self.functions[i])(s)
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn check_independence(&self) -> Result<()> {
        mgs_coefficients(self, &GaussLegendre::new(NODES_PER_SEGMENT)).map(|_| ())
    }
}

impl std::fmt::Debug for RawBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RawBasis")
            .field("labels", &self.labels)
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

/// Cubic polynomials plus truncated cubes: {1, x, x^2, x^3} and
/// {(x - k)_+^3} for each interior knot k in (0, 1).
pub fn cubic_spline_family(knots: &[f64]) -> Result<RawBasis> {
    if knots.windows(2).any(|w| w[0] >= w[1]) || knots.iter().any(|&k| k <= 0.0 || k >= 1.0) {
        return Err(Error::InvalidArgument(
            "spline knots must increase strictly inside (0, 1)".into(),
        ));
    }
    let mut functions: Vec<BasisFn> = vec![
        Arc::new(|_| 1.0),
        Arc::new(|s| s),
        Arc::new(|s: f64| s * s),
        Arc::new(|s: f64| s * s * s),
    ];
    let mut labels: Vec<String> = vec!["1", "x", "x^2", "x^3"]
        .into_iter()
        .map(String::from)
        .collect();
    for &k in knots {
        functions.push(Arc::new(move |s: f64| {
            let d = s - k;
            if d > 0.0 {
                d * d * d
            } else {
                0.0
            }
        }));
        labels.push(format!("(x-{k})_+^3"));
    }
    let mut breakpoints = vec![0.0];
    breakpoints.extend_from_slice(knots);
    breakpoints.push(1.0);
    RawBasis::with_family(functions, labels, breakpoints, BasisFamily::Spline)
}

/// The default spline family: five interior knots at j/6, nine functions.
pub fn default_spline_family() -> RawBasis {
    let knots: Vec<f64> = (1..=5).map(|j| j as f64 / 6.0).collect();
    cubic_spline_family(&knots).expect("static knots are valid")
}

enum Repr {
    /// Linear combinations of a raw family (Gram-Schmidt output):
    /// B_p = sum_j coeffs[p][j] raw_j.
    Combination { raw: RawBasis, coeffs: Vec<Vec<f64>> },
    /// Families that are orthonormal in closed form.
    Closed { functions: Vec<BasisFn> },
}

/// An orthonormal family on [0, 1], with its quadrature rule for inner
/// products and the cached values at zero that the rate reconstruction uses.
pub struct OrthonormalBasis {
    repr: Repr,
    values_at_zero: Vec<f64>,
    breakpoints: Vec<f64>,
    rule: GaussLegendre,
    family: BasisFamily,
}

impl std::fmt::Debug for OrthonormalBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrthonormalBasis")
            .field("len", &self.len())
            .field("family", &self.family)
            .finish_non_exhaustive()
    }
}

impl OrthonormalBasis {
    pub fn len(&self) -> usize {
        self.values_at_zero.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_at_zero.is_empty()
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn eval(&self, p: usize, s: f64) -> f64 {
        match &self.repr {
            Repr::Combination { raw, coeffs } => {
                let mut acc = 0.0;
                for (j, &c) in coeffs[p].iter().enumerate() {
                    acc += c * raw.eval(j, s);
                }
                acc
            }
            Repr::Closed { functions } => (functions[p])(s),
        }
    }

    /// B_p(0) for every p.
    pub fn values_at_zero(&self) -> &[f64] {
        &self.values_at_zero
    }

    pub fn value_at_zero(&self, p: usize) -> f64 {
        self.values_at_zero[p]
    }

    /// Evaluates every basis function at `s` into `out` (len >= self.len()).
    pub fn eval_all(&self, s: f64, out: &mut [f64]) {
        match &self.repr {
            Repr::Combination { raw, coeffs } => {
                let m = raw.len();
                let mut stack = [0.0f64; 32];
                if m <= stack.len() {
                    let scratch = &mut stack[..m];
                    for (j, v) in scratch.iter_mut().enumerate() {
                        *v = raw.eval(j, s);
                    }
                    for (p, row) in coeffs.iter().enumerate() {
                        out[p] = row.iter().zip(scratch.iter()).map(|(&c, &v)| c * v).sum();
                    }
                } else {
                    // large custom families: evaluate one at a time
                    for p in 0..self.len() {
                        out[p] = self.eval(p, s);
                    }
                }
            }
            Repr::Closed { functions } => {
                for (p, f) in functions.iter().enumerate() {
                    out[p] = f(s);
                }
            }
        }
    }

    /// Quadrature inner product of two arbitrary functions on [0, 1], using
    /// this basis's segmentation.
    pub fn inner_product<F, G>(&self, mut f: F, mut g: G) -> f64
    where
        F: FnMut(f64) -> f64,
        G: FnMut(f64) -> f64,
    {
        let mut acc = 0.0;
        for seg in self.breakpoints.windows(2) {
            for (s, w) in self.rule.mapped(seg[0], seg[1]) {
                acc += w * f(s) * g(s);
            }
        }
        acc
    }

    /// max_{i,j} |<B_i, B_j> - delta_ij| under the quadrature inner product.
    pub fn orthonormality_residual(&self) -> f64 {
        let m = self.len();
        let mut vals = vec![0.0; m];
        let mut g = vec![vec![0.0; m]; m];
        for seg in self.breakpoints.windows(2) {
            for (s, w) in self.rule.mapped(seg[0], seg[1]) {
                self.eval_all(s, &mut vals);
                for i in 0..m {
                    for j in 0..=i {
                        g[i][j] += w * vals[i] * vals[j];
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[i][j] - target).abs());
            }
        }
        worst
    }

    /// Whether every member is continuously differentiable on [0, 1] (the
    /// coefficient test assumes this of the basis).
    pub fn continuously_differentiable(&self) -> bool {
        !matches!(self.family, BasisFamily::Custom)
    }
}

/// Value-space modified Gram-Schmidt: runs the factorization on vectors of
/// function values at the composite quadrature nodes, where the inner
/// product is a plain weighted sum, and mirrors every operation onto
/// coefficient vectors over the raw family. Forming inner products through
/// the raw Gram matrix instead would cancel catastrophically for
/// ill-conditioned families like truncated power splines.
fn mgs_coefficients(raw: &RawBasis, rule: &GaussLegendre) -> Result<Vec<Vec<f64>>> {
    let m = raw.len();

    let mut node_weights = Vec::new();
    let mut nodes = Vec::new();
    for seg in raw.breakpoints.windows(2) {
        for (s, w) in rule.mapped(seg[0], seg[1]) {
            nodes.push(s);
            node_weights.push(w);
        }
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&node_weights).map(|((&x, &y), &w)| w * x * y).sum()
    };

    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut c = vec![0.0; m];
        c[i] = 1.0;
        let mut u: Vec<f64> = nodes.iter().map(|&s| raw.eval(i, s)).collect();
        let orig_norm2 = dot(&u, &u);
        // project out earlier directions; a second pass mops up the rounding
        // the first one leaves behind
        for _pass in 0..2 {
            for (b_coef, b_val) in coeffs.iter().zip(&values) {
                let r = dot(&u, b_val);
                for (uk, bk) in u.iter_mut().zip(b_val) {
                    *uk -= r * bk;
                }
                for (ck, bk) in c.iter_mut().zip(b_coef) {
                    *ck -= r * bk;
                }
            }
        }
        let norm2 = dot(&u, &u);
        if !(norm2 > PIVOT_TOL * PIVOT_TOL * orig_norm2) {
            return Err(Error::DegenerateBasis(format!(
                "function `{}` is numerically dependent on its predecessors",
                raw.label(i)
            )));
        }
        let inv = 1.0 / norm2.sqrt();
        for uk in u.iter_mut() {
            *uk *= inv;
        }
        for ck in c.iter_mut() {
            *ck *= inv;
        }
        coeffs.push(c);
        values.push(u);
    }
    Ok(coeffs)
}

/// Modified Gram-Schmidt with one reorthogonalization pass, under the
/// quadrature inner product of the raw family's segmentation.
pub fn orthonormalize(raw: &RawBasis) -> Result<OrthonormalBasis> {
    let rule = GaussLegendre::new(NODES_PER_SEGMENT);
    let coeffs = mgs_coefficients(raw, &rule)?;
    let values_at_zero = coeffs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| c * raw.eval(j, 0.0))
                .sum()
        })
        .collect();
    Ok(OrthonormalBasis {
        breakpoints: raw.breakpoints.clone(),
        family: raw.family.clone(),
        repr: Repr::Combination { raw: raw.clone(), coeffs },
        values_at_zero,
        rule,
    })
}

/// {1} followed by the pairs sqrt(2) cos(2 pi p s), sqrt(2) sin(2 pi p s)
/// for p = 1..=max_index; orthonormal in closed form. Size 2*max_index + 1.
pub fn fourier_family(max_index: usize) -> OrthonormalBasis {
    use std::f64::consts::PI;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut functions: Vec<BasisFn> = vec![Arc::new(|_| 1.0)];
    for p in 1..=max_index {
        let omega = 2.0 * PI * p as f64;
        functions.push(Arc::new(move |s: f64| sqrt2 * (omega * s).cos()));
        functions.push(Arc::new(move |s: f64| sqrt2 * (omega * s).sin()));
    }
    let values_at_zero = functions.iter().map(|f| f(0.0)).collect();
    // one segment per oscillation keeps the quadrature exact for products
    let segments = (2 * max_index).max(4);
    let breakpoints: Vec<f64> = (0..=segments).map(|i| i as f64 / segments as f64).collect();
    OrthonormalBasis {
        repr: Repr::Closed { functions },
        values_at_zero,
        breakpoints,
        rule: GaussLegendre::new(NODES_PER_SEGMENT),
        family: BasisFamily::Fourier { max_index },
    }
}

/// Shifted Legendre polynomials sqrt(2p+1) P_p(2s - 1) for p = 0..=max_degree;
/// orthonormal in closed form. Size max_degree + 1.
pub fn legendre_family(max_degree: usize) -> OrthonormalBasis {
    let mut functions: Vec<BasisFn> = Vec::with_capacity(max_degree + 1);
    for p in 0..=max_degree {
        functions.push(Arc::new(move |s: f64| {
            let x = 2.0 * s - 1.0;
            let mut p0 = 1.0;
            let mut p1 = x;
            let value = match p {
                0 => 1.0,
                1 => x,
                _ => {
                    for k in 2..=p {
                        let k = k as f64;
                        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    p1
                }
            };
            (2.0 * p as f64 + 1.0).sqrt() * value
        }));
    }
    let values_at_zero = functions.iter().map(|f| f(0.0)).collect();
    OrthonormalBasis {
        repr: Repr::Closed { functions },
        values_at_zero,
        breakpoints: vec![0.0, 1.0],
        rule: GaussLegendre::new(NODES_PER_SEGMENT),
        family: BasisFamily::Legendre { max_degree },
    }
}

/// Builds a basis from its configuration name: `spline5` (five knots at j/6;
/// `spline<m>` generalizes to m equispaced knots), `fourier:<k>`, or
/// `legendre:<k>`.
pub fn parse_basis(name: &str) -> Result<OrthonormalBasis> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    if let Some(m) = name.strip_prefix("spline") {
        let m: usize = m
            .parse()
            .map_err(|_| bad(format!("unreadable spline knot count in `{name}`")))?;
        if m == 0 {
            return Err(bad("spline family needs at least one knot".into()));
        }
        let knots: Vec<f64> = (1..=m).map(|j| j as f64 / (m + 1) as f64).collect();
        return orthonormalize(&cubic_spline_family(&knots)?);
    }
    if let Some(k) = name.strip_prefix("fourier:") {
        let k: usize = k
            .parse()
            .map_err(|_| bad(format!("unreadable fourier index in `{name}`")))?;
        if k == 0 {
            return Err(bad("fourier family needs max index >= 1".into()));
        }
        return Ok(fourier_family(k));
    }
    if let Some(k) = name.strip_prefix("legendre:") {
        let k: usize = k
            .parse()
            .map_err(|_| bad(format!("unreadable legendre degree in `{name}`")))?;
        return Ok(legendre_family(k));
    }
    Err(bad(format!(
        "unknown basis `{name}` (expected spline<m>, fourier:<k>, or legendre:<k>)"
    )))
}

/// Default truncation index (inclusive) for a sample of size n: the full
/// family for splines and Legendre; for Fourier, enough indices to cover
/// floor(n^(1/4)) cosine terms.
pub fn default_truncation(basis: &OrthonormalBasis, n: usize) -> usize {
    match basis.family() {
        BasisFamily::Fourier { .. } => {
            let cosines = ((n as f64).powf(0.25).floor() as usize).max(1);
            (2 * cosines - 1).min(basis.len() - 1)
        }
        _ => basis.len() - 1,
    }
}

/// Supremum over a uniform grid of the zero-evaluation envelope
/// |sum_{p <= tau} B_p(0) B_p(s)|, which controls how truncation error at
/// the left endpoint propagates into the reconstructed rate.
///
/// For the Fourier family the sine terms vanish at zero and the envelope is
/// evaluated in its sharp single-sqrt(2) cosine form,
/// sup_s |1 + sqrt(2) sum_{p <= c} cos(2 pi p s)| = 1 + sqrt(2) c with c the
/// number of cosine terms covered by tau; every other family uses the
/// literal kernel sum.
pub fn zero_kernel_sup(basis: &OrthonormalBasis, tau: usize, grid_size: usize) -> Result<f64> {
    if tau >= basis.len() {
        return Err(Error::InvalidArgument(format!(
            "truncation {tau} outside basis of size {}",
            basis.len()
        )));
    }
    if grid_size < 2 {
        return Err(Error::InvalidArgument("envelope grid needs >= 2 points".into()));
    }
    let mut sup: f64 = 0.0;
    match basis.family() {
        BasisFamily::Fourier { .. } => {
            let cosines = tau.div_ceil(2);
            for i in 0..grid_size {
                let s = i as f64 / (grid_size - 1) as f64;
                let mut acc = 1.0;
                for p in 1..=cosines {
                    acc += std::f64::consts::SQRT_2
                        * (2.0 * std::f64::consts::PI * p as f64 * s).cos();
                }
                sup = sup.max(acc.abs());
            }
        }
        _ => {
            let mut vals = vec![0.0; basis.len()];
            for i in 0..grid_size {
                let s = i as f64 / (grid_size - 1) as f64;
                basis.eval_all(s, &mut vals);
                let k: f64 = basis.values_at_zero()[..=tau]
                    .iter()
                    .zip(&vals)
                    .map(|(&b0, &bs)| b0 * bs)
                    .sum();
                sup = sup.max(k.abs());
            }
        }
    }
    Ok(sup)
}
