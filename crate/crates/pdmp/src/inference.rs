//! Coefficient-nullity test: under the null that a basis coefficient of the
//! transition hazard vanishes, n * theta^2 / sigma^2 is asymptotically
//! chi-squared with one degree of freedom.

use crate::error::{Error, Result};
use crate::special::chi2_quantile_1df;

/// Result of a single nullity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub alpha: f64,
    /// Upper alpha quantile of the chi-squared(1) distribution.
    pub quantile: f64,
    pub reject: bool,
}

/// The standardized statistic n * coefficient^2 / variance.
pub fn test_statistic(coefficient: f64, variance: f64, sample_size: usize) -> Result<f64> {
    if !coefficient.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "coefficient must be finite, got {coefficient}"
        )));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    if sample_size == 0 {
        return Err(Error::InvalidArgument(
            "test statistic needs a positive sample size".into(),
        ));
    }
    Ok(sample_size as f64 * coefficient * coefficient / variance)
}

/// Compare the statistic with the chi-squared(1) critical value at level
/// `alpha`; reject when it exceeds the quantile.
pub fn chi2_decision(statistic: f64, alpha: f64) -> Result<TestOutcome> {
    if !(statistic.is_finite() && statistic >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "test statistic must be nonnegative and finite, got {statistic}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let quantile = chi2_quantile_1df(alpha)?;
    Ok(TestOutcome { statistic, alpha, quantile, reject: statistic > quantile })
}
