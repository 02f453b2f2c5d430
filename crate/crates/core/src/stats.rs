//! Aggregation of independent runs into estimates, error bars and
//! variance reduction factors.

use crate::error::{Error, Result};
use crate::products::ProductKind;

/// Which sensitivity a table row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Greek {
    Delta,
    Vega,
    Gamma,
}

impl Greek {
    pub const ALL: [Greek; 3] = [Greek::Delta, Greek::Vega, Greek::Gamma];

    pub fn name(&self) -> &'static str {
        match self {
            Greek::Delta => "delta",
            Greek::Vega => "vega",
            Greek::Gamma => "gamma",
        }
    }
}

impl std::fmt::Display for Greek {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-run estimate C_P^(ℓ): the average of the per-path estimator over P
/// paths, for each Greek and the price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub product: ProductKind,
    pub strike: f64,
    pub steps: usize,
    pub paths: usize,
    pub price: f64,
    pub delta: f64,
    pub vega: f64,
    pub gamma: f64,
}

impl RunSummary {
    pub fn greek(&self, greek: Greek) -> f64 {
        match greek {
            Greek::Delta => self.delta,
            Greek::Vega => self.vega,
            Greek::Gamma => self.gamma,
        }
    }
}

/// Estimate and error of one (method, Greek) cell across L runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    /// C = (1/L) Σ C_P^(ℓ).
    pub estimate: f64,
    /// σ = sqrt((1/L) Σ (C − C_P^(ℓ))²) — population form with divisor L,
    /// the canonical error figure (slightly biased low for small L).
    pub sigma: f64,
    /// Sample standard deviation with divisor L−1, exposed for reference:
    /// σ = sqrt((L−1)/L) · sample_sigma.
    pub sample_sigma: f64,
    pub runs: usize,
}

/// Aggregates run means into the final estimate and its error.
pub fn aggregate(run_means: &[f64]) -> Result<Aggregate> {
    let l = run_means.len();
    if l < 2 {
        return Err(Error::InsufficientData(format!(
            "error bars need at least 2 runs, got {l}"
        )));
    }
    let mean = run_means.iter().sum::<f64>() / l as f64;
    let ss: f64 = run_means.iter().map(|&c| (c - mean) * (c - mean)).sum();
    Ok(Aggregate {
        estimate: mean,
        sigma: (ss / l as f64).sqrt(),
        sample_sigma: (ss / (l - 1) as f64).sqrt(),
        runs: l,
    })
}

/// Variance reduction factor σ₀²/σ² against the baseline error σ₀.
///
/// A zero method error is reported as +∞ (the caller decides how to
/// surface the sentinel); a zero baseline yields 0.
pub fn vrf(baseline_sigma: f64, method_sigma: f64) -> f64 {
    if method_sigma == 0.0 {
        return f64::INFINITY;
    }
    (baseline_sigma * baseline_sigma) / (method_sigma * method_sigma)
}

/// Cost-adjusted efficiency ratio (σ₀²b₀)/(σ²b): > 1 means the method
/// beats the baseline even after paying its per-run cost b.
pub fn efficiency(
    baseline_sigma: f64,
    baseline_cost: f64,
    method_sigma: f64,
    method_cost: f64,
) -> f64 {
    if method_sigma == 0.0 || method_cost == 0.0 {
        return f64::INFINITY;
    }
    (baseline_sigma * baseline_sigma * baseline_cost) / (method_sigma * method_sigma * method_cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_examples() {
        let a = aggregate(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(a.estimate, 1.0);
        assert_eq!(a.sigma, 0.0);

        let a = aggregate(&[0.0, 2.0]).unwrap();
        assert_eq!(a.estimate, 1.0);
        assert_eq!(a.sigma, 1.0);

        let a = aggregate(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(a.estimate, 2.5);
        assert!((a.sigma - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn aggregate_needs_two_runs() {
        assert!(aggregate(&[]).is_err());
        assert!(aggregate(&[1.0]).is_err());
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let a = aggregate(&[3.0, 1.0, 4.0, 1.0, 5.0]).unwrap();
        let b = aggregate(&[5.0, 4.0, 3.0, 1.0, 1.0]).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-15);
        assert!((a.sigma - b.sigma).abs() < 1e-15);
    }

    #[test]
    fn sigma_forms_are_related() {
        let runs = [0.3, 1.7, -0.4, 2.2, 0.9];
        let l = runs.len() as f64;
        let a = aggregate(&runs).unwrap();
        let want = ((l - 1.0) / l).sqrt() * a.sample_sigma;
        assert!((a.sigma - want).abs() < 1e-15);
    }

    #[test]
    fn vrf_examples() {
        assert_eq!(vrf(1.0, 1.0), 1.0);
        assert_eq!(vrf(10.0, 1.0), 100.0);
        assert!(vrf(1.0, 0.0).is_infinite());
    }

    #[test]
    fn vrf_is_multiplicative() {
        let (a, b, c) = (0.9, 0.31, 0.011);
        let lhs = vrf(a, b) * vrf(b, c);
        let rhs = vrf(a, c);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn efficiency_weights_cost() {
        // same error, double cost: half the efficiency
        assert!((efficiency(1.0, 1.0, 1.0, 2.0) - 0.5).abs() < 1e-15);
        // error halved, cost doubled: 4x variance gain / 2x cost = 2x
        assert!((efficiency(1.0, 1.0, 0.5, 2.0) - 2.0).abs() < 1e-15);
    }
}
