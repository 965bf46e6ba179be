use levy_invert::fourier::GilPelaezCdf;
use levy_invert::geometry::SphericalMeasure;
use levy_invert::ks::{band95, ks_one_sample, ks_two_sample, two_sample_critical_1pct};
use levy_invert::measure::{Atom, ID0Law, LevyMeasure, RosinskiMeasure};
use levy_invert::simulate::{empirical_char_fn, sample_increment, sample_stable, sample_tempered_increment, SimConfig};
use levy_invert::specfun::TemperingParams;

fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    x[x.len() / 2]
}

#[test]
fn symmetric_stable_matches_fourier_cdf() {
    let sigma = SphericalMeasure::two_sided(0.6, 0.6).unwrap();
    let n = 20_000;
    // a 95% band: any fixed seed fails it with probability 0.05
    let x = sample_stable(1.4, &sigma, &[0.0], n, 5).unwrap().column(0);
    let cdf = GilPelaezCdf::new(&ID0Law::centered(LevyMeasure::stable(1.4, sigma).unwrap())).unwrap();
    assert!(ks_one_sample(&x, |v| cdf.cdf(v)) < band95(n));
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!(ks_two_sample(&x, &neg) < two_sample_critical_1pct(n, n));
    assert!(median(x).abs() < 0.05);
}

#[test]
fn stable_samples_are_self_similar() {
    let (eta, m) = (0.7, 4usize);
    let sigma = SphericalMeasure::two_sided(1.0, 0.3).unwrap();
    let n = 10_000;
    let many = sample_stable(eta, &sigma, &[0.0], n * m, 5).unwrap().column(0);
    let sums: Vec<f64> = many.chunks(m).map(|c| c.iter().sum::<f64>() / (m as f64).powf(1.0 / eta)).collect();
    let single = sample_stable(eta, &sigma, &[0.0], n, 6).unwrap().column(0);
    // for an asymmetric law the scaled sum differs from X₁ by a constant
    let shift = centering_shift(eta, &sigma, m);
    let sums: Vec<f64> = sums.iter().map(|v| v - shift).collect();
    assert!(ks_two_sample(&sums, &single) < two_sample_critical_1pct(n, n));
}

// s = m^{-1/η} maps the m-fold sum back to Lévy measure M; s (X_m - c) is
// centered, so the scaled sum exceeds S_η(σ, 0) by s c.
fn centering_shift(eta: f64, sigma: &SphericalMeasure, m: usize) -> f64 {
    let s = (m as f64).powf(-1.0 / eta);
    let law = ID0Law::centered(LevyMeasure::stable(eta, sigma.clone()).unwrap());
    let c = levy_invert::limits::exact_centering(&law, m as f64, s).unwrap();
    s * c[0]
}

#[test]
fn increments_add_in_law() {
    let params = TemperingParams::new(1.0, 0.6).unwrap();
    let r = RosinskiMeasure::new(
        LevyMeasure::atomic(vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-2.0], 0.4)], None).unwrap(),
    )
    .unwrap();
    let b = [0.2];
    let eps = 1e-3;
    let n = 10_000;
    let whole = sample_tempered_increment(&r, params, &b, &SimConfig::new(0.7, n, 1).with_eps(eps)).unwrap();
    let first = sample_tempered_increment(&r, params, &b, &SimConfig::new(0.3, n, 2).with_eps(eps)).unwrap();
    let second = sample_tempered_increment(&r, params, &b, &SimConfig::new(0.4, n, 3).with_eps(eps)).unwrap();
    let sum: Vec<f64> = first.column(0).iter().zip(second.column(0)).map(|(a, b)| a + b).collect();
    assert!(ks_two_sample(&whole.column(0), &sum) < two_sample_critical_1pct(n, n));
}

#[test]
fn refining_eps_approaches_the_characteristic_function() {
    let law = ID0Law::new(
        LevyMeasure::stable(1.6, SphericalMeasure::two_sided(1.0, 0.5).unwrap()).unwrap(),
        vec![0.1],
    )
    .unwrap();
    let n = 40_000;
    let z = [1.5];
    let exact = law.char_exponent(&z).unwrap().exp();
    let noise = 3.0 / (n as f64).sqrt();
    let errs: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| {
            let s = sample_increment(&law, &SimConfig::new(1.0, n, 9).with_eps(eps)).unwrap();
            (empirical_char_fn(&s, &z) - exact).norm()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] + noise, "{errs:?}");
    }
    assert!(errs[3] < errs[0]);
}

#[test]
fn sampling_is_deterministic_per_seed_and_blocks() {
    let law = ID0Law::centered(LevyMeasure::stable(0.9, SphericalMeasure::two_sided(1.0, 1.0).unwrap()).unwrap());
    let cfg = SimConfig::new(0.5, 500, 77).with_eps(1e-3).with_blocks(4);
    let a = sample_increment(&law, &cfg).unwrap();
    let b = sample_increment(&law, &cfg).unwrap();
    assert_eq!(a.data, b.data);
    let c = sample_increment(&law, &cfg.clone().with_blocks(5)).unwrap();
    assert_ne!(a.data, c.data);
}

#[test]
fn tempered_jump_rate_grows_as_eps_shrinks() {
    let params = TemperingParams::new(1.0, 0.8).unwrap();
    let r = RosinskiMeasure::new(LevyMeasure::atomic(vec![Atom::new(vec![1.0], 1.0)], None).unwrap()).unwrap();
    let rate = |eps: f64| {
        sample_tempered_increment(&r, params, &[0.0], &SimConfig::new(1.0, 1, 0).with_eps(eps))
            .unwrap()
            .jump_rate
    };
    // Γ(-α, u) = Γ(-α) - Σ_k (-1)^k u^{k-α} / (k! (k-α))
    let series = |u: f64| {
        let a = 0.8;
        let mut s = levy_invert::specfun::gamma(1.0 - a) / -a;
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            s -= (-1f64).powi(k) * u.powf(k as f64 - a) / (fact * (k as f64 - a));
        }
        s
    };
    for eps in [1e-2, 1e-4] {
        assert!((rate(eps) / series(eps) - 1.0).abs() < 1e-9);
    }
    assert!(rate(1e-4) > 40.0 * rate(1e-2));
}
