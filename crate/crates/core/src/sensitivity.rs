//! Parameter sensitivity: lognormal sampling of (alpha, beta), coverage
//! filtering, lognormal refits, regression and stencil comparison.

use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::Real;
use crate::seeding::{derive_seed, rng_from_seed};
use crate::walker::{run_batch, Cell, KnnRule, RouteResult, Scenario, WalkParams};

/// Mean and variance of the lognormal variates (not of their logs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamDist {
    pub mean_alpha: f64,
    pub var_alpha: f64,
    pub mean_beta: f64,
    pub var_beta: f64,
}

impl Default for ParamDist {
    fn default() -> Self {
        ParamDist { mean_alpha: 0.5, var_alpha: 0.7, mean_beta: 0.5, var_beta: 0.05 }
    }
}

impl ParamDist {
    pub fn validate(&self) -> Result<()> {
        for (name, m, v) in [("alpha", self.mean_alpha, self.var_alpha), ("beta", self.mean_beta, self.var_beta)] {
            if !(m > 0.0) || !(v > 0.0) {
                return Err(Error::Config(format!("{name} needs positive mean and variance, got {m} and {v}")));
            }
        }
        Ok(())
    }
}

/// Log-space `(mu, sigma)` of the lognormal with the given mean and variance.
pub fn lognormal_from_moments<T: Real>(mean: T, var: T) -> (T, T) {
    let s2 = (T::one() + var / (mean * mean)).ln();
    (mean.ln() - s2 / T::lit(2.0), s2.sqrt())
}

/// Mean and variance of a lognormal given its log-space parameters.
pub fn lognormal_moments<T: Real>(mu: T, sigma: T) -> (T, T) {
    let s2 = sigma * sigma;
    let mean = (mu + s2 / T::lit(2.0)).exp();
    (mean, (s2.exp() - T::one()) * mean * mean)
}

/// `n` independent `(alpha, beta)` draws.
pub fn sample_params(dist: &ParamDist, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::Input("sample size must be at least 1".into()));
    }
    let (ma, sa) = lognormal_from_moments(dist.mean_alpha, dist.var_alpha);
    let (mb, sb) = lognormal_from_moments(dist.mean_beta, dist.var_beta);
    let la = LogNormal::new(ma, sa).map_err(|e| Error::Config(e.to_string()))?;
    let lb = LogNormal::new(mb, sb).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| (la.sample(&mut rng), lb.sample(&mut rng))).collect())
}

/// Home routes whose coverage is strictly above `threshold`.
pub fn filter_by_coverage(results: &[RouteResult], threshold: f64) -> Vec<&RouteResult> {
    results.iter().filter(|r| r.scenario == Scenario::Home && r.coverage > threshold).collect()
}

/// Median coverage of the home routes, if any.
pub fn median_home_coverage(results: &[RouteResult]) -> Option<f64> {
    let mut c: Vec<f64> = results.iter().filter(|r| r.scenario == Scenario::Home).map(|r| r.coverage).collect();
    if c.is_empty() {
        return None;
    }
    c.sort_by(f64::total_cmp);
    let n = c.len();
    Some(if n % 2 == 1 { c[n / 2] } else { (c[n / 2 - 1] + c[n / 2]) / 2.0 })
}

/// Counts over `bins` equal-width bins spanning `[lo, hi]`; values outside
/// the range are ignored and `hi` falls in the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    if bins == 0 || !(hi > lo) {
        return counts;
    }
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if v < lo || v > hi || v.is_nan() {
            continue;
        }
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub mu: T,
    pub sigma: T,
    /// Q-Q coefficient of determination on the log scale.
    pub r_squared: T,
    pub sample_n: usize,
}

impl<T: Real> FitResult<T> {
    /// Mean and variance of the fitted distribution.
    pub fn moments(&self) -> (T, T) {
        lognormal_moments(self.mu, self.sigma)
    }
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Maximum-likelihood lognormal fit plus a Q-Q goodness-of-fit score.
pub fn fit_lognormal<T: Real>(samples: &[T]) -> Result<FitResult<T>> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Input(format!("need at least {MIN_FIT_SAMPLES} samples, got {}", samples.len())));
    }
    if let Some(bad) = samples.iter().find(|&&s| !(s > T::zero()) || !s.is_finite()) {
        return Err(Error::Input(format!("lognormal samples must be positive and finite, got {bad}")));
    }
    let n = T::from_usize(samples.len()).expect("sample count");
    let mut logs: Vec<T> = samples.iter().map(|s| s.ln()).collect();
    let mu = logs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let sigma = (logs.iter().fold(T::zero(), |a, &b| a + (b - mu) * (b - mu)) / n).sqrt();
    if !(sigma > T::zero()) {
        return Err(Error::Degenerate("all samples are equal, log-scale spread is zero".into()));
    }
    logs.sort_by(|a, b| a.partial_cmp(b).expect("finite logs"));
    let std_normal = Normal::new(0.0, 1.0).expect("standard normal");
    let len = samples.len() as f64;
    let (mut ss_res, mut ss_tot) = (T::zero(), T::zero());
    for (i, &x) in logs.iter().enumerate() {
        // Blom plotting positions.
        let p = (i as f64 + 1.0 - 0.375) / (len + 0.25);
        let fitted = mu + sigma * T::lit(std_normal.inverse_cdf(p));
        ss_res += (x - fitted) * (x - fitted);
        ss_tot += (x - mu) * (x - mu);
    }
    Ok(FitResult { mu, sigma, r_squared: T::one() - ss_res / ss_tot, sample_n: samples.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub n: usize,
}

/// Ordinary least squares of `y` on `x`. A constant `y` gives slope 0 and
/// R² 0.
pub fn regress<T: Real>(x: &[T], y: &[T]) -> Result<Regression<T>> {
    if x.len() != y.len() {
        return Err(Error::Input(format!("{} parameters but {} coverages", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Input(format!("need at least 3 points to regress, got {}", x.len())));
    }
    let n = T::from_usize(x.len()).expect("sample count");
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if !(sxx > T::zero()) {
        return Err(Error::Degenerate("parameter values have zero variance, slope is undefined".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::zero() };
    Ok(Regression { slope, intercept: my - slope * mx, r_squared, n: x.len() })
}

/// Runs one walk per sampled `(alpha, beta)`; walk `i` uses
/// `derive_seed(seed, i)`.
pub fn run_param_study(
    field: &Field,
    origin: Cell,
    base: &WalkParams,
    dist: &ParamDist,
    n: usize,
    seed: u64,
) -> Result<Vec<RouteResult>> {
    let draws = sample_params(dist, n, seed)?;
    let params: Vec<WalkParams> = draws
        .iter()
        .enumerate()
        .map(|(i, &(alpha, beta))| WalkParams { alpha, beta, seed: derive_seed(seed, i as u64), ..base.clone() })
        .collect();
    run_batch(field, origin, &params, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub knn_rule: KnnRule,
    pub n: usize,
    pub mean_distance_m: f64,
    pub mean_coverage: f64,
    pub home_rate: f64,
}

/// Same seeds under each of the three stencils.
pub fn knn_rule_comparison(
    field: &Field,
    origin: Cell,
    base: &WalkParams,
    n_per_rule: usize,
    seed: u64,
) -> Result<Vec<RuleSummary>> {
    if n_per_rule == 0 {
        return Err(Error::Input("need at least one walk per rule".into()));
    }
    KnnRule::ALL
        .iter()
        .map(|&rule| {
            let params: Vec<WalkParams> = (0..n_per_rule)
                .map(|i| WalkParams { knn_rule: rule, seed: derive_seed(seed, i as u64), ..base.clone() })
                .collect();
            let results = run_batch(field, origin, &params, None)?;
            let n = results.len() as f64;
            let (dist, cov, homes) = results
                .par_iter()
                .map(|r| (r.distance_m, r.coverage, usize::from(r.scenario == Scenario::Home)))
                .reduce(|| (0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
            Ok(RuleSummary {
                knn_rule: rule,
                n: results.len(),
                mean_distance_m: dist / n,
                mean_coverage: cov / n,
                home_rate: homes as f64 / n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_field, SynthSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn route(coverage: f64, scenario: Scenario) -> RouteResult {
        RouteResult { cells: vec![(0, 0)], distance_m: 0.0, scenario, alpha: 0.2, beta: 0.3, seed: 0, coverage, proposals: 0 }
    }

    #[test]
    fn moment_matching_roundtrip() {
        let (mu, s) = lognormal_from_moments(0.5, 0.7);
        let (m, v) = lognormal_moments(mu, s);
        assert_relative_eq!(m, 0.5, epsilon = 1e-12);
        assert_relative_eq!(v, 0.7, epsilon = 1e-12);
        assert_relative_eq!(s * s, (1.0f64 + 0.7 / 0.25).ln(), epsilon = 1e-12);
    }

    #[test]
    fn sampled_mean_within_three_standard_errors() {
        let d = ParamDist::default();
        let xs = sample_params(&d, 100_000, 11).unwrap();
        assert!(xs.iter().all(|&(a, b)| a > 0.0 && b > 0.0));
        let mean: f64 = xs.iter().map(|p| p.0).sum::<f64>() / xs.len() as f64;
        let se = (d.var_alpha / xs.len() as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "mean {mean}");
        assert_eq!(xs[..10], sample_params(&d, 10, 11).unwrap()[..]);
        assert!(sample_params(&d, 0, 1).is_err());
    }

    #[test]
    fn filter_examples() {
        let rs = vec![route(1.0, Scenario::Home), route(5.0, Scenario::Exhausted), route(3.0, Scenario::Home)];
        assert_eq!(filter_by_coverage(&rs, f64::NEG_INFINITY).len(), 2);
        assert!(filter_by_coverage(&rs, 10.0).is_empty());
        assert_eq!(filter_by_coverage(&rs, 1.0).len(), 1);
        assert_eq!(median_home_coverage(&rs), Some(2.0));
        assert_eq!(median_home_coverage(&rs[1..2]), None);
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(histogram(&[0.0, 0.5, 0.99, 1.0, 2.0, -1.0], 0.0, 1.0, 2), vec![1, 3]);
        assert_eq!(histogram(&[1.0], 0.0, 1.0, 0), Vec::<usize>::new());
    }

    #[test]
    fn fit_recovers_parameters() {
        let dist = LogNormal::new(-0.5, 0.8).unwrap();
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
        let fit = fit_lognormal(&xs).unwrap();
        assert!((fit.mu + 0.5).abs() < 0.025);
        assert!((fit.sigma - 0.8).abs() < 0.04);
        assert!(fit.r_squared > 0.98);
        let f32s: Vec<f32> = xs.iter().map(|&x| x as f32).collect();
        assert!((fit_lognormal(&f32s).unwrap().mu + 0.5).abs() < 0.025);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_lognormal(&[2.0; 20]), Err(Error::Degenerate(_))));
        assert!(matches!(fit_lognormal(&[1.0, 2.0, 3.0, 4.0, 5.0]), Err(Error::Input(_))));
        let mut xs = vec![1.0; 12];
        xs[3] = 0.0;
        assert!(matches!(fit_lognormal(&xs), Err(Error::Input(_))));
    }

    #[test]
    fn regression_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = regress(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert_relative_eq!(r.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.r_squared, 1.0, epsilon = 1e-12);
        let c = regress(&x, &[5.0; 4]).unwrap();
        assert_eq!(c.slope, 0.0);
        assert_eq!(c.r_squared, 0.0);
        assert!(regress(&[1.0; 4], &x).is_err());
        assert!(regress(&x[..2], &x[..2]).is_err());
        assert!(regress(&x, &x[..3]).is_err());
    }

    #[test]
    fn knn_comparison_rows_and_determinism() {
        let spec = SynthSpec { template: "loop-road".into(), n_rows: 31, n_cols: 31, margin: 5, ..Default::default() };
        let f = synth_field(&spec).unwrap();
        let p = WalkParams { mfd_m: 5000.0, ..Default::default() };
        let a = knn_rule_comparison(&f, spec.origin(), &p, 20, 9).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().map(|r| r.knn_rule).collect::<Vec<_>>(), KnnRule::ALL.to_vec());
        assert_eq!(a, knn_rule_comparison(&f, spec.origin(), &p, 20, 9).unwrap());
        assert!(knn_rule_comparison(&f, spec.origin(), &p, 0, 9).is_err());
    }

    proptest! {
        #[test]
        fn filtering_never_enlarges_a_bin(covs in proptest::collection::vec((0.0f64..10.0, any::<bool>()), 0..60), t in -1.0f64..11.0) {
            let rs: Vec<RouteResult> = covs.iter().enumerate().map(|(i, &(c, h))| {
                let mut r = route(c, if h { Scenario::Home } else { Scenario::Exhausted });
                r.alpha = i as f64 / 60.0;
                r
            }).collect();
            let all: Vec<f64> = rs.iter().map(|r| r.alpha).collect();
            let kept: Vec<f64> = filter_by_coverage(&rs, t).iter().map(|r| r.alpha).collect();
            for (k, a) in histogram(&kept, 0.0, 1.0, 10).iter().zip(histogram(&all, 0.0, 1.0, 10)) {
                prop_assert!(*k <= a);
            }
        }
    }
}
