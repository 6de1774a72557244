//! Performance metrics: spectral efficiency, empirical CDFs, first-order
//! dominance between CDFs and the runtime scaling fit.

use crate::error::{Error, Result};
use crate::scalar::{cmp_real, Real};

/// Shannon spectral efficiency in bit/s/Hz for a linear SINR.
pub fn spectral_efficiency<T: Real>(sinr_linear: T) -> Result<T> {
    if !(sinr_linear >= T::zero()) || !sinr_linear.is_finite() {
        return Err(Error::domain(format!(
            "SINR must be finite and non-negative, got {sinr_linear}"
        )));
    }
    Ok((T::one() + sinr_linear).log2())
}

/// Empirical CDF as `(value, P[X <= value])` steps, sorted ascending. Ties
/// collapse into one step holding the largest probability.
pub fn empirical_cdf<T: Real>(samples: &[T]) -> Result<Vec<(T, T)>> {
    if samples.is_empty() {
        return Err(Error::domain("empirical CDF of an empty sample"));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite sample {bad}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(cmp_real);
    let n = T::lit(sorted.len() as f64);
    let mut out: Vec<(T, T)> = Vec::with_capacity(sorted.len());
    for (i, v) in sorted.into_iter().enumerate() {
        let p = T::lit((i + 1) as f64) / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = p,
            _ => out.push((v, p)),
        }
    }
    Ok(out)
}

/// Evaluates a step CDF produced by [`empirical_cdf`] at `x`.
pub fn cdf_at<T: Real>(cdf: &[(T, T)], x: T) -> T {
    let idx = cdf.partition_point(|(v, _)| *v <= x);
    if idx == 0 {
        T::zero()
    } else {
        cdf[idx - 1].1
    }
}

/// Empirical quantile using the lower-order statistic.
pub fn quantile<T: Real>(samples: &[T], q: f64) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(cmp_real);
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    Ok(sorted[idx])
}

/// True when `a` first-order dominates `b` up to `tol`: at every breakpoint
/// of either CDF, `F_a(x) <= F_b(x) + tol`.
pub fn stochastic_dominance<T: Real>(a: &[T], b: &[T], tol: T) -> Result<bool> {
    Ok(max_dominance_violation(a, b)? <= tol)
}

/// Largest `F_a(x) - F_b(x)` over all breakpoints, zero when `a` dominates.
pub fn max_dominance_violation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    let ca = empirical_cdf(a)?;
    let cb = empirical_cdf(b)?;
    Ok(ca
        .iter()
        .chain(cb.iter())
        .map(|&(x, _)| cdf_at(&ca, x) - cdf_at(&cb, x))
        .fold(T::zero(), T::max))
}

/// Indices of the worst `fraction` of UEs by a reference metric (edge UEs).
/// Ties are broken by index so the selection is deterministic.
pub fn edge_mask<T: Real>(reference: &[T], fraction: f64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::domain(format!("edge fraction {fraction} outside (0, 1]")));
    }
    let count = ((reference.len() as f64) * fraction).round() as usize;
    let mut order: Vec<usize> = (0..reference.len()).collect();
    order.sort_by(|&i, &j| cmp_real(&reference[i], &reference[j]).then(i.cmp(&j)));
    let mut mask = vec![false; reference.len()];
    for &i in order.iter().take(count) {
        mask[i] = true;
    }
    Ok(mask)
}

pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("mean of an empty sample".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, var.sqrt()))
}

/// One timed clustering run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTiming {
    pub n_rrhs: usize,
    pub wall_time_s: f64,
    pub iterations: usize,
}

/// Least-squares slope of log(time per iteration) against log(n).
pub fn fit_scaling_exponent(runs: &[RunTiming]) -> Result<f64> {
    let mut distinct: Vec<usize> = runs.iter().map(|r| r.n_rrhs).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    let mut pts = Vec::with_capacity(runs.len());
    for r in runs {
        if r.n_rrhs == 0 || r.iterations == 0 || !(r.wall_time_s > 0.0) {
            return Err(Error::domain(format!("unusable timing {r:?}")));
        }
        pts.push(((r.n_rrhs as f64).ln(), (r.wall_time_s / r.iterations as f64).ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn spectral_efficiency_values() {
        assert_eq!(spectral_efficiency(0.0f64).unwrap(), 0.0);
        assert!((spectral_efficiency(1.0f64).unwrap() - 1.0).abs() < 1e-12);
        assert!((spectral_efficiency(3.0f64).unwrap() - 2.0).abs() < 1e-12);
        assert!(spectral_efficiency(-0.1f64).is_err());
        assert!(spectral_efficiency(f64::NAN).is_err());
    }

    #[test]
    fn cdf_steps() {
        assert!(empirical_cdf::<f64>(&[]).is_err());
        let c = empirical_cdf(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(c, vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
        assert_eq!(cdf_at(&c, 0.5), 0.0);
        assert_eq!(cdf_at(&c, 2.5), 0.75);
        assert_eq!(cdf_at(&c, 9.0), 1.0);
        let one = empirical_cdf(&[5.0f32]).unwrap();
        assert_eq!(one, vec![(5.0, 1.0)]);
    }

    #[test]
    fn uniform_cdf_is_close_to_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let c = empirical_cdf(&xs).unwrap();
        let ks = c.iter().map(|(x, p)| (p - x).abs()).fold(0.0, f64::max);
        assert!(ks < 0.03, "{ks}");
    }

    #[test]
    fn dominance() {
        let a = [2.0f64, 3.0, 4.0];
        let b = [1.0f64, 2.0, 3.0];
        assert!(stochastic_dominance(&a, &b, 0.0).unwrap());
        assert!(!stochastic_dominance(&b, &a, 0.0).unwrap());
        assert!(stochastic_dominance(&a, &a, 0.0).unwrap());
        assert!((max_dominance_violation(&b, &a).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn edge_selection() {
        let m = edge_mask(&[5.0, 1.0, 3.0, 1.0, 9.0], 0.4).unwrap();
        assert_eq!(m, vec![false, true, false, true, false]);
        assert!(edge_mask(&[1.0], 0.0).is_err());
    }

    #[test]
    fn scaling_fit_recovers_cubic() {
        let runs: Vec<_> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| RunTiming {
                n_rrhs: n,
                wall_time_s: 1e-9 * (n as f64).powi(3) * 10.0,
                iterations: 10,
            })
            .collect();
        assert!((fit_scaling_exponent(&runs).unwrap() - 3.0).abs() < 1e-9);
        assert!(fit_scaling_exponent(&runs[..2]).is_err());
    }

    #[test]
    fn quantiles_and_moments() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&xs, 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&xs, 0.0).unwrap(), 1.0);
        let (m, s) = mean_std(&[1.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
    }
}
