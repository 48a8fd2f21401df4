use ifs_core::dimension::lyapunov;
use ifs_core::sampler::*;
use ifs_core::Params;

fn params(b1: &str, b2: &str) -> Params {
    Params::parse(b1, b2, 128).unwrap()
}

/// Truncated sums at b = 1/2 and depth 30 are `j / 2^29` for `j` uniform in
/// `0..2^30`; count the grid points inside each bin exactly.
fn dyadic_bin_probabilities(em: &EmpiricalMeasure) -> Vec<f64> {
    let grid = (1u64 << 29) as f64;
    let total = (1u64 << 30) as f64;
    let first_at_or_above = |x: f64| (x * grid).ceil().clamp(0.0, total);
    (0..em.bin_count)
        .map(|i| {
            let (lo, hi) = em.bin_edges(i);
            let hi = if i + 1 == em.bin_count { f64::INFINITY } else { hi };
            (first_at_or_above(hi) - first_at_or_above(lo)) / total
        })
        .collect()
}

#[test]
fn half_half_histogram_is_uniform() {
    let n = 1_000_000u64;
    let em = sample_measure(&params("0.5", "0.5"), n, 30, 2024, 20).unwrap();
    assert_eq!(em.counts.iter().sum::<u64>(), n);
    for (count, p) in em.counts.iter().zip(dyadic_bin_probabilities(&em)) {
        let expected = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((*count as f64 - expected).abs() <= 4.0 * sd, "{count} vs {expected}");
        assert!((*count as f64 - 50_000.0).abs() <= 4.0 * (1e6f64 * 0.05 * 0.95).sqrt());
    }
}

#[test]
fn fixed_seed_is_reproducible_and_thread_independent() {
    let p = params("5/6", "0.3");
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_measure(&p, 50_000, 80, 99, 512).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
    let other_seed = sample_measure(&p, 50_000, 80, 100, 512).unwrap();
    assert_ne!(one.counts, other_seed.counts);

    let l1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
        .install(|| lyapunov_monte_carlo(&p, 10_000, 200, 5).unwrap());
    assert_eq!(l1, lyapunov_monte_carlo(&p, 10_000, 200, 5).unwrap());
}

#[test]
fn samples_stay_in_the_support_interval() {
    for (b1, b2) in [("0.99", "0.25"), ("0.3", "0.3"), ("5/6", "0.3"), ("0.6", "0.25")] {
        let p = params(b1, b2);
        let em = sample_measure(&p, 20_000, 64, 11, 1000).unwrap();
        assert_eq!(em.counts.iter().sum::<u64>(), 20_000);
        let right = 1.0 / (1.0 - p.to_f64().1);
        assert!((em.interval_right - right).abs() < 1e-15);
        let (lo, hi) = em.sample_range;
        assert!(0.0 <= lo && hi <= right, "{b1},{b2}: [{lo}, {hi}]");
    }
    let em = sample_measure(&params("0.6", "0.25"), 5_000, 40, 1, 3).unwrap();
    assert!(em.sample_range.1 <= 4.0 / 3.0);
}

#[test]
fn truncation_error_is_reported() {
    let p = params("5/6", "0.3");
    let depth = default_depth(&p);
    let em = sample_measure(&p, 10, depth, 0, 16).unwrap();
    assert!(em.truncation_error < 2f64.powi(-40) * em.interval_right);
    assert!(em.truncation_error < em.bin_width);
}

#[test]
fn lyapunov_words_obey_hoeffding() {
    let p = params("5/6", "0.3");
    let (b1, b2) = p.to_f64();
    let xi = lyapunov(&p).to_f64();
    let depth = 1000u32;
    let delta = 1e-6f64;
    let radius = (b1.ln() - b2.ln()).abs() * (depth as f64 * (1.0 / delta).ln() / 2.0).sqrt() / depth as f64;
    for seed in 0..300 {
        let word = lyapunov_monte_carlo(&p, 1, depth, seed).unwrap();
        assert!((word.mean - xi).abs() <= radius, "seed {seed}: {}", word.mean);
    }
}

#[test]
fn depth_one_is_a_fair_coin() {
    let p = params("0.8", "0.3");
    let (b1, b2) = p.to_f64();
    let l = lyapunov_monte_carlo(&p, 40_000, 1, 8).unwrap();
    let expected = -(b1.ln() + b2.ln()) / 2.0;
    assert!((l.mean - expected).abs() < 4.0 * l.stderr);
}

#[test]
fn entropy_dimension_of_reference_measures() {
    let uniform = sample_measure(&params("0.5", "0.5"), 1_000_000, 41, 3, 4096).unwrap();
    let est = entropy_dimension_estimate(&uniform, &default_scales(&uniform)).unwrap();
    assert!((est.slope - 1.0).abs() < 0.05, "{est:?}");

    let p = params("0.4", "0.4");
    let cantor = sample_measure(&p, 1_000_000, default_depth(&p), 3, 4096).unwrap();
    let est = entropy_dimension_estimate(&cantor, &default_scales(&cantor)).unwrap();
    let reference = 2f64.ln() / 2.5f64.ln();
    assert!(est.slope <= reference + 0.05, "{est:?}");
    assert!(est.slope >= reference - 0.05, "{est:?}");
}
