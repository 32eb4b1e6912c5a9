//! Small summary statistics shared by the estimators.

use crate::walk::{domain, Stream};

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample standard deviation (0 for fewer than two values).
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn std_err(v: &[f64]) -> f64 {
    std_dev(v) / (v.len() as f64).sqrt()
}

/// Linear-interpolation quantile (type 7); NaNs are ignored.
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
    if s.is_empty() {
        return f64::NAN;
    }
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || s[hi] == s[lo] {
        s[lo]
    } else {
        s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
    }
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

/// Bootstrap standard error of the mean of `v` from `resamples` resamples
/// drawn from the keyed bootstrap stream.
pub fn bootstrap_se(v: &[f64], resamples: usize, seed: u64, tag: u64) -> f64 {
    if v.len() < 2 || resamples < 2 {
        return std_err(v);
    }
    let means: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut s = Stream::new(seed, domain::BOOTSTRAP, tag.wrapping_mul(1 << 20).wrapping_add(b as u64));
            (0..v.len()).map(|_| v[s.index(v.len())]).sum::<f64>() / v.len() as f64
        })
        .collect();
    std_dev(&means)
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two
/// distinct abscissae.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((std_dev(&v) - 1.2909944487358056).abs() < 1e-15);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(median(&v), 2.5);
        assert_eq!(ls_slope(&v, &[3.0, 5.0, 7.0, 9.0]), Some(2.0));
        assert_eq!(ls_slope(&[1.0, 1.0], &[0.0, 1.0]), None);
    }

    #[test]
    fn bootstrap_tracks_analytic_error() {
        let v: Vec<f64> = (0..2000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
        let se = bootstrap_se(&v, 400, 1, 0);
        let analytic = std_err(&v);
        assert!((se / analytic - 1.0).abs() < 0.15, "{se} vs {analytic}");
    }
}
