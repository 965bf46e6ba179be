//! Kolmogorov–Smirnov statistics.

/// `sup_x |F_n(x) - F(x)|` for the sample against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample statistic `sup_x |F_n(x) - G_m(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail `P(K > λ) = 2 Σ_{k>=1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_pvalue(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of the two-sample statistic `d` for sizes `n`, `m`.
pub fn ks_two_sample_pvalue(d: f64, n: usize, m: usize) -> f64 {
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    kolmogorov_pvalue((en + 0.12 + 0.11 / en) * d)
}

/// One-sample 95% band `1.36/√n`.
pub fn band95(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

/// Two-sample critical value at level 1%.
pub fn two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Standard error used for comparing KS distances across runs. The
/// statistic has spread of order `0.5/√n` under the null (the standard
/// deviation of the Kolmogorov law is about 0.26).
pub fn ks_standard_error(n: usize) -> f64 {
    0.5 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_sample_is_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        let d = ks_one_sample(&x, |v| v.clamp(0.0, 1.0));
        assert!(d < band95(5000), "{d}");
        let d = ks_one_sample(&x, |v| (v * v).clamp(0.0, 1.0));
        assert!(d > 0.2);
    }

    #[test]
    fn two_sample_statistic() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        let d = ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn kolmogorov_quantiles() {
        assert!((kolmogorov_pvalue(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_pvalue(1.628) - 0.01).abs() < 1e-3);
    }
}
