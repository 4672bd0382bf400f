use partlab_core::moments::{expected_size, size_distribution, variance_size, ENUMERATION_CAP};
use partlab_core::rational::{int, ratio, to_f64, Deviation};
use partlab_core::sampler::{
    chebyshev_tail_exact, chebyshev_tail_sampled, empirical_moments, sample_size, TrialAccumulator,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson statistic of sampled sizes against the exact distribution, with
/// cells of expected count below 5 pooled into their neighbour.
fn chi_square(m: usize, trials: u64, seed: u64) -> (f64, usize) {
    let exact = size_distribution(m, ENUMERATION_CAP).unwrap();
    let total: u64 = exact.iter().sum();
    let mut observed = vec![0u64; exact.len()];
    for i in 0..trials {
        observed[sample_size(m, seed, i) as usize] += 1;
    }
    let scale = trials as f64 / total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for (c, o) in exact.iter().zip(&observed) {
        e_acc += *c as f64 * scale;
        o_acc += *o as f64;
        if e_acc >= 5.0 {
            cells.push((e_acc, o_acc));
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        let last = cells.last_mut().unwrap();
        last.0 += e_acc;
        last.1 += o_acc;
    }
    let stat = cells.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    (stat, cells.len() - 1)
}

#[test]
fn sampled_sizes_follow_enumerated_distribution() {
    for m in 1..=10 {
        let (stat, dof) = chi_square(m, 100_000, 20_240_601 + m as u64);
        let q = ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.999);
        assert!(stat < q, "m={m}: chi2 {stat:.2} >= {q:.2} on {dof} dof");
    }
}

#[test]
fn small_m_distribution_within_three_sigma() {
    let exact = size_distribution(3, ENUMERATION_CAP).unwrap();
    let draws = 8000u64;
    let mut seen = vec![0u64; exact.len()];
    for i in 0..draws {
        seen[sample_size(3, 99, i) as usize] += 1;
    }
    for (n, (&c, &o)) in exact.iter().zip(&seen).enumerate() {
        let p = c as f64 / 8.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((o as f64 - draws as f64 * p).abs() <= 3.0 * sigma, "N={n}");
    }
}

#[test]
fn large_m_moments() {
    let m = 1000;
    let stats = empirical_moments(m, 100_000, 42, &[Deviation::sqrt3()]).unwrap();
    let mean = to_f64(&expected_size(m as u64));
    assert_eq!(mean, 125_375.0);
    assert!((stats.mean_n - mean).abs() < 5.0 * stats.se_mean, "{stats:?}");
    let ratio_var = stats.var_n / to_f64(&variance_size(m as u64));
    assert!((0.95..=1.05).contains(&ratio_var), "{ratio_var}");
    assert!(stats.relaxed_fraction(0) <= 1.0 / 3.0 + 0.02);
}

#[test]
fn single_flip_mean() {
    let stats = empirical_moments(1, 1_000_000, 5, &[]).unwrap();
    assert!((stats.mean_n - 0.5).abs() < 5.0 * stats.se_mean);
}

#[test]
fn split_runs_are_identical() {
    let ds = [Deviation::sqrt3(), "2".parse().unwrap()];
    let whole = empirical_moments(200, 10_000, 3, &ds).unwrap();
    let mut parts: Vec<TrialAccumulator> = [0..1234u64, 1234..7000, 7000..10_000]
        .into_iter()
        .map(|r| {
            let mut acc = TrialAccumulator::new(200, 3, &ds);
            acc.run(r);
            acc
        })
        .collect();
    let mut merged = parts.pop().unwrap();
    for p in parts.iter().rev() {
        merged.merge(p);
    }
    assert_eq!(merged.finish().unwrap(), whole);
}

#[test]
fn exact_chebyshev_tails() {
    for m in 3..=16 {
        for d in ["1.5", "sqrt(3)", "2", "3"] {
            let d: Deviation = d.parse().unwrap();
            let tail = chebyshev_tail_exact(m, &d, ENUMERATION_CAP).unwrap();
            assert!(tail <= d.square().recip(), "m={m} d={d}: {tail}");
        }
    }
    assert_eq!(chebyshev_tail_exact(4, &Deviation::sqrt3(), 20).unwrap(), ratio(1, 16));
    assert_eq!(chebyshev_tail_exact(3, &"100".parse().unwrap(), 20).unwrap(), int(0));
    let sampled = chebyshev_tail_sampled(1000, &Deviation::sqrt3(), 100_000, 42).unwrap();
    assert!(sampled <= 1.0 / 3.0 + 0.02);
}
