//! Goodness-of-fit statistics used by trace validation and the sampler tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Outcome of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

impl GofResult {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Pearson chi-square test of integer observations against a pmf on `{first, first+1, ...}`.
///
/// Cells are merged from the right until each expected count is at least 5; the
/// final cell absorbs the whole upper tail so the cell probabilities sum to one.
pub fn chi_square_discrete<F>(observations: &[u64], first: u64, pmf: F) -> GofResult
where
    F: Fn(u64) -> f64,
{
    let n = observations.len();
    let total = n as f64;
    // Cells up to the point where at most 5 expected observations remain in the tail.
    let mut probs = Vec::new();
    let mut cum = 0.0;
    let mut k = first;
    loop {
        let p = pmf(k);
        if (1.0 - cum - p) * total < 5.0 || probs.len() > 10_000 {
            break;
        }
        probs.push(p);
        cum += p;
        k += 1;
    }
    probs.push((1.0 - cum).max(0.0));
    // Merge leading cells that are too small into their right neighbour.
    let mut cells: Vec<(u64, f64)> = Vec::new(); // (upper key inclusive, prob)
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        let last = i + 1 == probs.len();
        if acc * total >= 5.0 || last {
            cells.push((first + i as u64, acc));
            acc = 0.0;
        }
    }
    // Make sure the final cell is big enough by merging backwards.
    while cells.len() > 1 && cells.last().map(|c| c.1 * total < 5.0).unwrap_or(false) {
        let tail = cells.pop().unwrap();
        if let Some(prev) = cells.last_mut() {
            prev.1 += tail.1;
        }
    }
    let mut counts = vec![0u64; cells.len()];
    for &x in observations {
        let idx = cells
            .iter()
            .position(|&(upper, _)| x <= upper)
            .unwrap_or(cells.len() - 1);
        counts[idx] += 1;
    }
    let statistic: f64 = cells
        .iter()
        .zip(&counts)
        .map(|(&(_, p), &c)| {
            let e = p * total;
            if e > 0.0 {
                (c as f64 - e).powi(2) / e
            } else {
                0.0
            }
        })
        .sum();
    let df = cells.len().saturating_sub(1).max(1) as f64;
    let p_value = ChiSquared::new(df).map(|d| d.sf(statistic)).unwrap_or(0.0);
    GofResult {
        statistic,
        p_value,
        samples: n,
    }
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_test<F>(samples: &[f64], cdf: F) -> GofResult
where
    F: Fn(f64) -> f64,
{
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    GofResult {
        statistic: d,
        p_value: kolmogorov_p_value(d, sorted.len()),
        samples: sorted.len(),
    }
}

/// Asymptotic tail probability of the KS statistic with the Stephens small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_accepts_evenly_spaced_uniform() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn ks_rejects_shifted_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 2000.0).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn chi_square_exact_counts_pass() {
        // Counts proportional to a fair die.
        let obs: Vec<u64> = (0..600).map(|i| 1 + (i % 6) as u64).collect();
        let r = chi_square_discrete(&obs, 1, |k| if (1..=6).contains(&k) { 1.0 / 6.0 } else { 0.0 });
        assert!(r.statistic < 1e-9);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn chi_square_rejects_wrong_law() {
        let obs: Vec<u64> = (0..6000).map(|i| 1 + (i % 3) as u64).collect();
        let r = chi_square_discrete(&obs, 1, |k| if (1..=6).contains(&k) { 1.0 / 6.0 } else { 0.0 });
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn spearman_of_monotone_map_is_one() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        assert!((spearman(&x, &y) - 1.0).abs() < 1e-12);
    }
}
