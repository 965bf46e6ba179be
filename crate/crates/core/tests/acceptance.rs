//! Acceptance suite. Every criterion prints one PASS/FAIL line with its
//! measured value, pinned tolerance and runtime; the test fails if any
//! criterion does. Run with `cargo test --test acceptance -- --nocapture`.

use std::time::Instant;

use levy_invert::geometry::{Direction, DirectionSet, SphericalMeasure};
use levy_invert::inversion::beta_inversion;
use levy_invert::ks::band95;
use levy_invert::limits::{
    inversion_correspondence_check, long_time_limit_check, long_time_norming, loglog_slope,
    sequence_convergence_check, short_time_limit_check, short_time_scaling_from_long, invert_sequence, LimitConfig,
    ScalingMode, SequenceMode, SequenceTerm,
};
use levy_invert::measure::{Atom, ID0Law, LevyMeasure, MeasureRepr, RadialProfile, RosinskiMeasure};
use levy_invert::regvar::{estimate_rv_index, prop2_constant_check, prop2_ratios, Endpoint};
use levy_invert::LevyError;
use levy_invert::simulate::{empirical_char_fn, sample_increment, SimConfig};
use levy_invert::specfun::{k_const, ln_gamma, TemperingParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(k: usize, name: &str, limit_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    let pass = out.pass && secs < limit_s;
    println!(
        "{} [{k}] {name}: {} ({secs:.2} s, limit {limit_s} s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Composite Simpson rule with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    if dim == 1 {
        vec![if rng.random_bool(0.5) { 1.0 } else { -1.0 }]
    } else {
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        vec![th.cos(), th.sin()]
    }
}

fn random_atomic(rng: &mut ChaCha8Rng, dim: usize, atoms: usize, log_r: (f64, f64), w: (f64, f64)) -> LevyMeasure {
    let atoms = (0..atoms)
        .map(|_| {
            let r = 10f64.powf(rng.random_range(log_r.0..=log_r.1));
            let u = random_direction(rng, dim);
            Atom::new(u.iter().map(|v| r * v).collect(), rng.random_range(w.0..=w.1))
        })
        .collect();
    LevyMeasure::atomic(atoms, Some(dim)).unwrap()
}

fn atoms_of(m: &LevyMeasure) -> &[Atom] {
    match m.repr() {
        MeasureRepr::Atomic { atoms } => atoms,
        _ => panic!("expected an atomic measure"),
    }
}

fn involution() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut w_err, mut loc_ulps, mut drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..200 {
        let dim = rng.random_range(1..=2);
        let count = rng.random_range(1..=50);
        let m = random_atomic(&mut rng, dim, count, (-3.0, 3.0), (1e-3, 1e3));
        let gamma = rng.random_range(-1.0f64..2.0).max(0.0);
        for beta in [0.0, 0.5, gamma, 2.0] {
            let back = beta_inversion(&beta_inversion(&m, beta).unwrap(), beta).unwrap();
            let (a, b) = (atoms_of(&m), atoms_of(&back));
            ok &= a.len() == b.len();
            for (x, y) in a.iter().zip(b) {
                w_err = w_err.max((x.w - y.w).abs() / x.w);
                // x ↦ x/|x|² applied twice, computed independently
                let once: Vec<f64> = {
                    let r2: f64 = x.x.iter().map(|v| v * v).sum();
                    x.x.iter().map(|v| v / r2).collect()
                };
                let twice: Vec<f64> = {
                    let r2: f64 = once.iter().map(|v| v * v).sum();
                    once.iter().map(|v| v / r2).collect()
                };
                for ((o, v), orig) in twice.iter().zip(&y.x).zip(&x.x) {
                    loc_ulps = loc_ulps.max((o - v).abs() / (o.abs() * f64::EPSILON));
                    drift = drift.max((orig - v).abs() / orig.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    let pass = ok && w_err <= 1e-12 && loc_ulps <= 4.0;
    Outcome {
        pass,
        detail: format!(
            "max weight rel err {w_err:.2e} (tol 1e-12), location vs double map {loc_ulps:.1} ulp (tol 4), \
             location vs original {drift:.2e}"
        ),
    }
}

fn stable_closed_form() -> Outcome {
    let gamma = 0.25;
    let sigma = SphericalMeasure::two_sided(0.7, 0.4).unwrap();
    let radii = log_grid(1e-3, 1e3, 40);
    let all = DirectionSet::All;
    let mut worst = 0.0f64;
    for eta in [0.3, 0.8, 1.2, 1.7] {
        let polar = LevyMeasure::polar(
            sigma.clone(),
            RadialProfile::PowerLaw {
                index: eta,
                lo: 0.0,
                hi: f64::INFINITY,
            },
        )
        .unwrap();
        // one node per decade; the log-log interpolant of a power law is exact
        let nodes = log_grid(1e-60, 1e60, 121);
        let table = LevyMeasure::polar(
            sigma.clone(),
            RadialProfile::Table {
                density: nodes.iter().map(|r| r.powf(-1.0 - eta)).collect(),
                r: nodes,
            },
        )
        .unwrap();
        for beta in [0.0, gamma] {
            let closed = beta_inversion(&LevyMeasure::stable(eta, sigma.clone()).unwrap(), beta).unwrap();
            let from_polar = beta_inversion(&polar, beta).unwrap();
            let from_table = beta_inversion(&table, beta).unwrap();
            for &r in &radii {
                // M^β(|x| > r) = σ(S) ∫_0^{1/r} s^{2+β} s^{-1-η} ds, in log variable
                let top = (1.0 / r).ln();
                let e = 2.0 + beta - eta;
                let oracle = sigma.total() * simpson(|v| (e * v).exp(), top - 50.0 / e, top, 4000);
                let c = closed.tail_mass(r, &all).unwrap();
                for v in [from_polar.tail_mass(r, &all).unwrap(), from_table.tail_mass(r, &all).unwrap(), oracle] {
                    worst = worst.max((v - c).abs() / c);
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max rel tail deviation {worst:.2e} over 40 radii (tol 1e-8)"),
    }
}

fn k_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let alpha = rng.random_range(-1.0..1.9);
        let gamma = f64::max(alpha, 0.0);
        let eta = rng.random_range((gamma + 0.05).max(alpha + 0.1)..2.0);
        let p = rng.random_range(0.3..3.0);
        let params = TemperingParams::new(p, alpha).unwrap();
        let k = k_const(eta, &params).unwrap();
        // ∫_0^∞ s^{η-α-1} e^{-s^p} ds with s = e^v
        let a = eta - alpha;
        let lo = -40.0 / a;
        let hi = (45.0f64).ln() / p;
        let quad = simpson(|v| (a * v - (p * v).exp()).exp(), lo, hi, 20_000);
        let closed = (ln_gamma(a / p)).exp() / p;
        worst = worst.max((k - quad).abs() / k).max((k - closed).abs() / k);
    }
    let unit = k_const(1.5, &TemperingParams::new(1.0, 0.5).unwrap()).unwrap();
    Outcome {
        pass: worst <= 1e-10 && (unit - 1.0).abs() <= 1e-12,
        detail: format!("max rel err {worst:.2e} (tol 1e-10), K(1.5, 0.5, 1) - 1 = {:.1e} (tol 1e-12)", unit - 1.0),
    }
}

fn prop2() -> Outcome {
    let sigma = SphericalMeasure::two_sided(1.0, 0.5).unwrap();
    let mut stable_dev = 0.0f64;
    let mut outside = Vec::new();
    for eta in [0.5, 1.5] {
        let m = LevyMeasure::stable(eta, sigma.clone()).unwrap();
        for beta in [0.0, 0.5] {
            let (rho, grid) = (-(2.0 + beta - eta), [1e2, 1e3, 1e4]);
            // η = β = 0.5 lies outside the β-moment class: the checked entry
            // point rejects it and the ratios are evaluated directly
            let rep = match prop2_constant_check(&m, beta, rho, &sigma, &grid) {
                Ok(rep) => rep,
                Err(LevyError::NotInMomentClass { .. }) => {
                    outside.push(format!("(η {eta}, β {beta})"));
                    prop2_ratios(&m, beta, rho, &sigma, &grid).unwrap()
                }
                Err(e) => panic!("{e}"),
            };
            stable_dev = stable_dev.max(rep.max_small_deviation()).max(rep.max_large_deviation());
        }
    }
    let alpha = 0.8;
    let params = TemperingParams::new(1.0, alpha).unwrap();
    let atoms = vec![Atom::new(vec![1.5], 1.0), Atom::new(vec![-0.5], 2.0), Atom::new(vec![3.0], 0.2)];
    // σ on each half-line is Σ w |x|^α over the atoms in it
    let side = |pos: bool| -> f64 {
        atoms
            .iter()
            .filter(|a| (a.x[0] > 0.0) == pos)
            .map(|a| a.w * a.x[0].abs().powf(alpha))
            .sum()
    };
    let ts_sigma = SphericalMeasure::two_sided(side(true), side(false)).unwrap();
    let r = RosinskiMeasure::new(LevyMeasure::atomic(atoms, None).unwrap()).unwrap();
    let m = LevyMeasure::tempered(params, r).unwrap();
    let mut ts_dev = 0.0f64;
    for beta in [0.0, 0.5] {
        let rep = prop2_constant_check(&m, beta, -(2.0 + beta - alpha), &ts_sigma, &[1e4]).unwrap();
        ts_dev = ts_dev.max(rep.max_small_deviation()).max(rep.max_large_deviation());
    }
    Outcome {
        pass: stable_dev <= 1e-6 && ts_dev <= 0.01,
        detail: format!(
            "stable max |ratio - 1| {stable_dev:.2e} (tol 1e-6; outside the moment class, ratios only: {}), \
             tempered at t = 1e4 {ts_dev:.2e} (tol 1e-2)",
            outside.join(", ")
        ),
    }
}

fn corollary3() -> Outcome {
    let params = TemperingParams::new(1.0, 0.5).unwrap();
    let sigma = SphericalMeasure::two_sided(1.0, 0.6).unwrap();
    let r = RosinskiMeasure::new(LevyMeasure::stable(1.3, sigma).unwrap()).unwrap();
    let m = LevyMeasure::tempered(params, r.clone()).unwrap();
    let est = |x: &LevyMeasure| estimate_rv_index(x, Endpoint::Zero, None, None, 0.05).unwrap().rho_hat;
    let (er, em) = (est(r.as_measure()), est(&m));
    Outcome {
        pass: (er + 1.3).abs() <= 0.02 && (em + 1.3).abs() <= 0.02,
        detail: format!("index at 0: R {er:.4}, M {em:.4} (target -1.3 ± 0.02)"),
    }
}

fn ts_short_time() -> Outcome {
    let params = TemperingParams::new(1.0, 0.8).unwrap();
    let r = RosinskiMeasure::new(
        LevyMeasure::atomic(vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-1.0], 1.0)], None).unwrap(),
    )
    .unwrap();
    let law = ID0Law::centered(LevyMeasure::tempered(params, r).unwrap());
    let mut cfg = LimitConfig::new(10_000, 11);
    cfg.threshold = Some(0.05);
    let rep = short_time_limit_check(&law, 0.8, None, &[1e-1, 1e-2, 1e-3], &cfg).unwrap();
    let mut literal = true;
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|row| {
            let bias = row.scaled_bias / (row.norming * row.norming);
            literal &= bias <= 1e-3 / row.norming;
            format!("t {:.0e}: KS {:.4}, bias {bias:.1e} vs 1e-3/b_t {:.1e}", row.t, row.ks, 1e-3 / row.norming)
        })
        .collect();
    Outcome {
        pass: rep.pass && literal,
        detail: format!(
            "{}; monotone within 2 SE {}, final KS <= 0.05 {}",
            rows.join("; "),
            rep.monotone,
            rep.final_pass
        ),
    }
}

fn correspondence() -> Outcome {
    let eta = 1.2;
    let law = ID0Law::centered(LevyMeasure::stable(eta, SphericalMeasure::two_sided(0.5, 0.5).unwrap()).unwrap());
    let inv = ID0Law::centered(beta_inversion(&law.measure, 0.0).unwrap());
    let cfg = LimitConfig::new(10_000, 21);
    let short = short_time_limit_check(&inv, 2.0 - eta, None, &[1e-3], &cfg).unwrap();
    let long = long_time_limit_check(&inv, 2.0 - eta, &[1e3], &cfg).unwrap();
    let norming = long_time_norming(&law, eta).unwrap();
    let scaling = short_time_scaling_from_long(&norming, ScalingMode::Id0, None).unwrap();
    let slope = loglog_slope(|t| Ok(scaling.b(t)), 1e-6, 1e-2, 9).unwrap();
    let paired = inversion_correspondence_check(&law, eta, ScalingMode::Id0, &[1e-3], &[1e3], &cfg).unwrap();
    let threshold = band95(cfg.n) + 0.02;
    let (ks_s, ks_l) = (short.rows[0].ks, long.rows[0].ks);
    Outcome {
        pass: ks_s <= threshold && ks_l <= threshold && (slope + 1.25).abs() <= 0.01 && paired.pass(),
        detail: format!(
            "short KS {ks_s:.4}, long KS {ks_l:.4} (tol {threshold:.4}), b_t slope {slope:.5} (target -1.25 ± 0.01), \
             paired check long {:.4} / short {:.4} with b ratio {:.6}",
            paired.long.rows[0].ks, paired.short.rows[0].ks, paired.norming[0].ratio
        ),
    }
}

fn sequence_suite() -> Outcome {
    let tol = 1e-2;
    let sigma = SphericalMeasure::two_sided(1.0, 0.5).unwrap();
    let ns: Vec<f64> = (1..=20).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
    let truncated: Vec<SequenceTerm> = ns
        .iter()
        .map(|&n| {
            SequenceTerm::centered(
                LevyMeasure::polar(
                    sigma.clone(),
                    RadialProfile::PowerLaw {
                        index: 1.4,
                        lo: 1.0 / n,
                        hi: n,
                    },
                )
                .unwrap(),
            )
        })
        .collect();
    let limit = SequenceTerm::centered(LevyMeasure::stable(1.4, sigma).unwrap());
    let trunc = sequence_convergence_check(&truncated, &limit, SequenceMode::Id0, 0.0, tol).unwrap();

    let escaping: Vec<SequenceTerm> = ns
        .iter()
        .map(|&n| SequenceTerm::centered(LevyMeasure::atomic(vec![Atom::new(vec![n], 1.0)], None).unwrap()))
        .collect();
    let zero = SequenceTerm::centered(LevyMeasure::atomic(vec![], Some(1)).unwrap());
    let esc = sequence_convergence_check(&escaping, &zero, SequenceMode::Id0, 0.0, tol).unwrap();
    let escaping_ok = esc.vague.pass && esc.shift.pass && esc.small_ball.pass && !esc.tail.pass;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut agree, mut converging_pass, mut oscillating_fail) = (0, 0, 0);
    for case in 0..20 {
        let dim = rng.random_range(1..=2);
        let count = rng.random_range(1..=5);
        let base = random_atomic(&mut rng, dim, count, (-0.3, 0.3), (1.0, 3.0));
        let beta = rng.random_range(0.0..=2.0);
        let converging = case % 2 == 0;
        let terms: Vec<SequenceTerm> = (1..=30)
            .map(|n| {
                let n = n as f64;
                let atoms = atoms_of(&base)
                    .iter()
                    .map(|a| {
                        if converging {
                            Atom::new(a.x.iter().map(|v| v * (1.0 + n.powi(-3))).collect(), a.w * (1.0 + n.powi(-3)))
                        } else {
                            Atom::new(a.x.clone(), a.w * (1.0 + 0.5 * (-1f64).powi(n as i32)))
                        }
                    })
                    .collect();
                SequenceTerm::centered(LevyMeasure::atomic(atoms, Some(dim)).unwrap())
            })
            .collect();
        let lim = SequenceTerm::centered(base);
        let orig = sequence_convergence_check(&terms, &lim, SequenceMode::Id0, 0.0, tol).unwrap();
        let (it, il) = invert_sequence(&terms, &lim, beta).unwrap();
        let inv = sequence_convergence_check(&it, &il, SequenceMode::Id0, 0.0, tol).unwrap();
        agree += usize::from(orig.vague.pass == inv.vague.pass);
        converging_pass += usize::from(converging && orig.vague.pass);
        oscillating_fail += usize::from(!converging && !orig.vague.pass);
    }
    Outcome {
        pass: trunc.pass() && escaping_ok && agree == 20 && converging_pass == 10 && oscillating_fail == 10,
        detail: format!(
            "truncated stable all criteria {}, escaping atom fails only tail {escaping_ok}, \
             inverted vague verdict agrees {agree}/20 (converging pass {converging_pass}/10, oscillating fail {oscillating_fail}/10)",
            trunc.pass()
        ),
    }
}

fn ecf_case(law: &ID0Law, t: f64, eps: Option<f64>, zs: &[Vec<f64>], n: usize, seed: u64) -> (f64, f64) {
    let mut cfg = SimConfig::new(t, n, seed);
    if let Some(e) = eps {
        cfg = cfg.with_eps(e);
    }
    let s = sample_increment(law, &cfg).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_err = 0.0f64;
    for z in zs {
        let exact: Complex64 = (law.char_exponent(z).unwrap() * t).exp();
        let err = (empirical_char_fn(&s, z) - exact).norm();
        let z2: f64 = z.iter().map(|v| v * v).sum();
        let bound = 3.0 / (n as f64).sqrt() + 0.5 * z2 * s.bias_bound;
        worst_excess = worst_excess.max(err - bound);
        worst_err = worst_err.max(err);
    }
    (worst_err, worst_excess)
}

fn sampler_validity() -> Outcome {
    let n = 100_000;
    let z1: Vec<Vec<f64>> = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0]
        .iter()
        .flat_map(|&z| [vec![z], vec![-z]])
        .collect();
    let z2: Vec<Vec<f64>> = (0..16)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 16.0;
            let r = 0.2 + 0.15 * k as f64;
            vec![r * th.cos(), r * th.sin()]
        })
        .collect();
    let tempered = {
        let r = RosinskiMeasure::new(
            LevyMeasure::atomic(vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-1.0], 0.5)], None).unwrap(),
        )
        .unwrap();
        LevyMeasure::tempered(TemperingParams::new(1.0, 0.8).unwrap(), r).unwrap()
    };
    let plane = SphericalMeasure::new(
        [(0.0, 0.4), (2.0, 0.3), (4.0, 0.3)]
            .iter()
            .map(|&(th, w)| (Direction::new(vec![f64::cos(th), f64::sin(th)]).unwrap(), w))
            .collect(),
    )
    .unwrap();
    let cases: Vec<(&str, ID0Law, f64, Option<f64>, &Vec<Vec<f64>>)> = vec![
        (
            "atomic",
            ID0Law::new(
                LevyMeasure::atomic(vec![Atom::new(vec![1.0], 2.0), Atom::new(vec![-0.5], 1.0)], None).unwrap(),
                vec![0.3],
            )
            .unwrap(),
            1.0,
            None,
            &z1,
        ),
        (
            "stable 0.7",
            ID0Law::centered(LevyMeasure::stable(0.7, SphericalMeasure::two_sided(0.25, 0.25).unwrap()).unwrap()),
            1.0,
            Some(1e-4),
            &z1,
        ),
        (
            "stable 1.3",
            ID0Law::new(LevyMeasure::stable(1.3, SphericalMeasure::two_sided(0.4, 0.1).unwrap()).unwrap(), vec![0.2])
                .unwrap(),
            0.5,
            Some(3e-3),
            &z1,
        ),
        ("tempered 0.8", ID0Law::centered(tempered), 1.0, Some(1e-3), &z1),
        ("2-d stable 0.9", ID0Law::centered(LevyMeasure::stable(0.9, plane).unwrap()), 1.0, Some(1e-3), &z2),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, law, t, eps, zs)) in cases.iter().enumerate() {
        let start = Instant::now();
        let (err, excess) = ecf_case(law, *t, *eps, zs, n, 100 + i as u64);
        pass &= excess <= 0.0;
        parts.push(format!("{name} max err {err:.4} in {:.1} s", start.elapsed().as_secs_f64()));
    }
    Outcome {
        pass,
        detail: format!("{} (bound 3/sqrt(n) + |z|²/2 bias = {:.4} + bias term)", parts.join(", "), 3.0 / (n as f64).sqrt()),
    }
}

#[test]
fn acceptance() {
    let results = [
        run(1, "involution", 1.0, involution),
        run(2, "stable closed form", 10.0, stable_closed_form),
        run(3, "K identity", 5.0, k_identity),
        run(4, "tail constant", 30.0, prop2),
        run(5, "index at 0 under tempering", 30.0, corollary3),
        run(6, "tempered short-time limit", 180.0, ts_short_time),
        run(7, "short/long correspondence", 180.0, correspondence),
        run(8, "sequence suite", 60.0, sequence_suite),
        run(9, "sampler validity", 120.0, sampler_validity),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
