use super::*;
use crate::asymptotics::{s_n, w1_closed, w2_closed};
use crate::special::normal_tail;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn pareto(alpha: f64) -> JumpModel {
    JumpModel::standardized_pareto(alpha).unwrap()
}

fn mc(samples: u64) -> MCConfig {
    MCConfig::default().with_samples(samples)
}

fn within(a: &Estimate, b: &Estimate, k: f64) -> bool {
    (a.p_hat - b.p_hat).abs() <= k * (a.std_err.powi(2) + b.std_err.powi(2)).sqrt()
}

// P(S_100 > 0) for alpha = 3 from 4e6 numpy walks: 0.4494665, standard error 2.49e-4
const PLAIN_SUM_ORACLE: (f64, f64) = (0.449_466_5, 2.49e-4);

#[test]
fn plain_trivial_levels() {
    let c = WalkConfig::new(100, 1e6, pareto(3.0)).unwrap();
    let e = estimate_plain_many(&c, &[-1e9, 1e9], &mc(2_000)).unwrap();
    assert_eq!((e[0].p_hat, e[0].std_err), (1.0, 0.0));
    assert_eq!((e[1].p_hat, e[1].std_err), (0.0, 0.0));
    assert_eq!(e[0].method, Method::Plain);
}

#[test]
fn plain_matches_uncensored_oracle() {
    let c = WalkConfig::new(100, 1e6, pareto(3.0)).unwrap();
    let e = estimate_plain(&c, 0.0, &mc(40_000)).unwrap();
    let (p, se) = PLAIN_SUM_ORACLE;
    assert!(
        (e.p_hat - p).abs() <= 3.0 * (e.std_err.powi(2) + se * se).sqrt(),
        "{e:?}"
    );
}

#[test]
fn plain_matches_independent_generator() {
    // same walk drawn with an unrelated generator and the textbook inverse CDF
    let model = pareto(3.0);
    let (n, m, x) = (50u64, 20.0, 5.0);
    let mut g = StdRng::seed_from_u64(99);
    let trials = 40_000;
    let mut hits = 0u32;
    for _ in 0..trials {
        let y: f64 = (0..n)
            .map(|_| model.sample_uniform(1.0 - g.random::<f64>()).min(m))
            .sum();
        hits += u32::from(y > x);
    }
    let p = f64::from(hits) / trials as f64;
    let c = WalkConfig::new(n, m, model).unwrap();
    let e = estimate_plain(&c, x, &mc(trials)).unwrap();
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((e.p_hat - p).abs() <= 3.0 * (e.std_err.powi(2) + se * se).sqrt());
}

#[test]
fn stratified_matches_plain_at_small_n() {
    let c = WalkConfig::new(100, 1e6, pareto(3.0)).unwrap();
    let m = mc(20_000);
    let p = estimate_plain(&c, 0.0, &m).unwrap();
    let s = estimate_stratified(&c, 0.0, &m).unwrap();
    assert!(within(&p, &s, 3.0), "{} vs {}", p.p_hat, s.p_hat);
}

#[test]
fn stratified_matches_plain_on_random_configs() {
    let mut g = StdRng::seed_from_u64(2026);
    let m = mc(10_000);
    for _ in 0..10 {
        let n = g.random_range(20..200u64);
        let alpha = g.random_range(2.5..4.0);
        let ratio = g.random_range(1.5..4.0);
        let c = WalkConfig::with_ratio(n, ratio, pareto(alpha)).unwrap();
        let xs: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1 * c.m).collect();
        let plain = estimate_plain_many(&c, &xs, &m).unwrap();
        // largest level with at least 100 plain hits
        let Some(i) = plain
            .iter()
            .rposition(|e| e.p_hat * m.samples as f64 >= 100.0)
        else {
            continue;
        };
        let s = estimate_stratified(&c, xs[i], &m).unwrap();
        assert!(
            within(&plain[i], &s, 3.0),
            "n={n} alpha={alpha} ratio={ratio} x={}: {} +- {} vs {} +- {}",
            xs[i],
            plain[i].p_hat,
            plain[i].std_err,
            s.p_hat,
            s.std_err
        );
    }
}

#[test]
fn deterministic_across_workers() {
    let c = WalkConfig::with_ratio(1000, 10.0, pareto(3.0)).unwrap();
    let xs = [0.5 * c.m, c.m, 1.5 * c.m];
    let one = estimate_stratified_many(&c, &xs, &mc(1_500).with_workers(1)).unwrap();
    let eight = estimate_stratified_many(&c, &xs, &mc(1_500).with_workers(8)).unwrap();
    for (a, b) in one.iter().zip(&eight) {
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
    }
    let p1 = estimate_plain(&c, 0.0, &mc(1_500).with_workers(1)).unwrap();
    let p8 = estimate_plain(&c, 0.0, &mc(1_500).with_workers(8)).unwrap();
    assert_eq!(p1, p8);
    let other = estimate_stratified_many(&c, &xs, &mc(1_500).with_seed(1)).unwrap();
    assert_ne!(other[1].p_hat, one[1].p_hat);
}

#[test]
fn estimate_invariants() {
    let c = WalkConfig::with_ratio(500, 5.0, pareto(3.0)).unwrap();
    for e in estimate_stratified_many(&c, &[0.0, 0.7 * c.m, 1.5 * c.m], &mc(2_000)).unwrap() {
        let sum: f64 = e.strata.iter().map(|s| s.weight * s.cond_p).sum();
        let var: f64 = e
            .strata
            .iter()
            .map(|s| (s.weight * s.cond_se).powi(2))
            .sum();
        assert_eq!(e.p_hat, sum);
        assert_eq!(e.std_err, var.sqrt());
        assert!((0.0..=1.0).contains(&e.p_hat));
        assert_eq!(e.strata.len(), DEFAULT_K_CAP + 1);
        // the censoring parts recombine into their strata
        for s in &e.strata {
            let parts: Vec<_> = e.censored.iter().filter(|p| p.j == s.j).collect();
            assert_eq!(parts.len(), s.j + 1);
            let w: f64 = parts.iter().map(|p| p.weight).sum();
            let v: f64 = parts.iter().map(|p| p.weight * p.cond_p).sum();
            assert!((w / s.weight - 1.0).abs() < 1e-12);
            assert!((v - s.weight * s.cond_p).abs() <= 1e-12 * s.weight);
        }
    }
}

#[test]
fn weight_table_completeness() {
    let model = pareto(3.0);
    let t = WeightTable::new(10_000, &model, 300.0, DEFAULT_K_CAP).unwrap();
    assert!(t.total() + t.bias_bound >= 1.0 - 1e-12);
    assert!(t.bias_bound < 1e-12);
    // (n V(y))^9 / 9!
    let nv = 1e4 * model.tail_v(300.0);
    assert!((t.bias_bound / (nv.powi(9) / 362_880.0) - 1.0).abs() < 1e-12);
    // P(ν = 0) = (1 - V(y))^n
    assert!((t.weights[0] / (1.0 - model.tail_v(300.0)).powi(10_000) - 1.0).abs() < 1e-12);
    let all = WeightTable::new(5, &model, 0.0, 8).unwrap();
    assert_eq!(all.weights.len(), 6);
    assert_eq!(all.bias_bound, 0.0);
    assert!((all.total() - 1.0).abs() < 1e-15);
}

#[test]
fn weight_errors() {
    let model = pareto(3.0);
    assert!(matches!(
        WeightTable::new(100, &model, -10.0, 8),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        WeightTable::new(1_000_000_000_000, &model, 0.0, 8),
        Err(Error::StratumOverflow(_))
    ));
    let c = WalkConfig::new(100, 50.0, model).unwrap();
    let mut bad = mc(1_000);
    bad.y = Some(60.0);
    assert!(matches!(
        estimate_stratified(&c, 1.0, &bad),
        Err(Error::Domain(_))
    ));
    assert!(estimate_stratified(&c, 1.0, &mc(999)).is_err());
    let mut f = mc(1_000);
    f.y_factor = 1.0;
    assert!(f.validate().is_err());
    assert!(estimate_plain_many(&c, &[], &mc(1_000)).is_err());
}

#[test]
fn monotone_in_x() {
    let c = WalkConfig::with_ratio(1000, 10.0, pareto(3.0)).unwrap();
    let xs: Vec<f64> = (0..=24).map(|i| i as f64 * 0.1 * c.m).collect();
    let e = estimate_stratified_many(&c, &xs, &mc(2_000)).unwrap();
    for w in e.windows(2) {
        let slack = 3.0 * (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
        assert!(
            w[1].p_hat <= w[0].p_hat + slack,
            "{} then {}",
            w[0].p_hat,
            w[1].p_hat
        );
    }
}

#[test]
fn all_censored_part_dominates_at_multiples() {
    let c = WalkConfig::with_ratio(1000, 30.0, pareto(3.0)).unwrap();
    let e = estimate_stratified_many(&c, &[c.m, 2.0 * c.m], &mc(2_000)).unwrap();
    assert!(e[0].share(1, 1) >= 0.8, "{}", e[0].share(1, 1));
    assert!(e[1].share(2, 2) >= 0.8, "{}", e[1].share(2, 2));
}

#[test]
fn uncensored_examples() {
    let n = 10_000u64;
    let model = pareto(3.0);
    let s = s_n(3.0, n).unwrap();
    let xs = [0.0, 0.5 * (n as f64).sqrt(), 2.0 * s];
    // three strata suffice at this threshold: the reported remainder is below 1e-15
    let cfg = MCConfig {
        k_cap: 3,
        ..mc(10_000)
    };
    let e = simulate_uncensored_tail_many(n, &xs, &model, &cfg).unwrap();
    assert!(e[2].bias_bound < 1e-15);
    assert!((e[0].p_hat - 0.5).abs() < 0.02, "{}", e[0].p_hat);
    assert!(
        (e[1].p_hat - normal_tail(0.5)).abs() < 0.02,
        "{}",
        e[1].p_hat
    );
    let ratio = e[2].p_hat / (n as f64 * model.tail_v(2.0 * s));
    assert!((0.8..=1.25).contains(&ratio), "{ratio}");
    assert!(e[0].censored.is_empty());
}

#[test]
fn simplex_oracle_examples() {
    let one = oracle_w_simplex(1, 0.5, 3.0, 10_000, 5).unwrap();
    assert!((one.value - w1_closed(0.5, 3.0).unwrap()).abs() < 1e-12);
    assert_eq!(one.truncation_bias, 0.0);
    let two = oracle_w_simplex(2, 1.5, 3.0, 1_000_000, 5).unwrap();
    let exact = w2_closed(1.5, 3.0).unwrap();
    assert!(
        (two.value - exact).abs() <= 3.0 * two.std_err,
        "{} +- {} vs {exact}",
        two.value,
        two.std_err
    );
    let edge = oracle_w_simplex(2, 1.999, 3.0, 100_000, 5).unwrap();
    assert!(edge.value < 1e-3 * two.value);
    let cut = oracle_w_simplex(2, 1.0 + 1e-7, 3.0, 1_000, 5).unwrap();
    assert!(cut.truncation_bias > 0.0);
    assert!(oracle_w_simplex(2, 2.5, 3.0, 1_000, 5).is_err());
    assert!(oracle_w_simplex(0, 0.5, 3.0, 1_000, 5).is_err());
}
