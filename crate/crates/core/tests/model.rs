use proptest::prelude::*;
use streammoments::hash::{p_inverse_of_unit, quantile_estimate, LevelParams, PInverseSampler, PairwiseHash};
use streammoments::io::{read_stream, write_stream, Format};
use streammoments::stream::{exact_moment_of, generate, GeneratorKind, GeneratorSpec, Stream};

fn stream_strategy() -> impl Strategy<Value = Stream> {
    (1u64..40).prop_flat_map(|n| prop::collection::vec(1..=n, 0..200).prop_map(move |v| Stream::new(n, v).unwrap()))
}

proptest! {
    #[test]
    fn moments_ignore_order(s in stream_strategy(), seed in any::<u64>(), p in 0.1f64..3.0) {
        let a = s.exact_moment(p);
        let b = s.shuffle(seed).exact_moment(p);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn shuffle_keeps_multiset(s in stream_strategy(), seed in any::<u64>()) {
        let mut a = s.updates().to_vec();
        let mut b = s.shuffle(seed).into_updates();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn partition_splits_length(s in stream_strategy(), cut in 1u64..40) {
        let left = s.induce(|a| a < cut).exact_moment(1.0);
        let right = s.induce(|a| a >= cut).exact_moment(1.0);
        prop_assert_eq!(left + right, s.len() as f64);
    }

    #[test]
    fn files_round_trip(s in stream_strategy(), binary in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        let format = if binary { Format::Binary } else { Format::Text };
        write_stream(&path, &s, format).unwrap();
        let back = read_stream(&path, Some(s.universe())).unwrap();
        prop_assert_eq!(back.updates(), s.updates());
        prop_assert_eq!(back.universe(), s.universe());
    }

    #[test]
    fn every_scaling_has_one_level(x in 1u64..=1024, pi in 0usize..3) {
        let p = [0.5, 1.0, 1.5][pi];
        let lp = LevelParams::with_scale(p, 1024.0, 1.0, 0);
        let w = lp.level_of(x as f64).expect("tracked");
        if w == 0 {
            prop_assert!(x as f64 >= lp.cl());
        } else {
            prop_assert!(x as f64 > lp.lower_edge(w) && x as f64 <= lp.lower_edge(w - 1));
        }
    }

    #[test]
    fn level_is_monotone(a in 1.0f64..5000.0, b in 1.0f64..5000.0) {
        let lp = LevelParams::with_scale(1.0, 64.0, 64.0, 0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(lp.level_of(hi).unwrap() <= lp.level_of(lo).unwrap());
    }

    #[test]
    fn quantile_of_constant_values(v in 0.5f64..1e6, half in 1usize..50) {
        prop_assert_eq!(quantile_estimate(&vec![v; 2 * half], 2 * half).unwrap(), v);
    }
}

#[test]
fn exact_moment_examples() {
    assert_eq!(exact_moment_of(&[1, 1, 2], 2.0), 5.0);
    assert_eq!(exact_moment_of(&[], 1.5), 0.0);
    assert_eq!(exact_moment_of(&[1, 1, 2], 0.0), 2.0);
}

#[test]
fn induce_keeps_order() {
    let s = Stream::new(3, vec![1, 2, 1, 3]).unwrap();
    assert_eq!(s.induce(|a| a != 2).updates(), &[1, 1, 3]);
    assert_eq!(s.slice(1, 4).unwrap().updates(), s.updates());
}

#[test]
fn shuffles_of_three_are_uniform() {
    let base = Stream::new(3, vec![1, 2, 3]).unwrap();
    let mut hist = std::collections::HashMap::new();
    let trials = 10_000u64;
    for seed in 0..trials {
        *hist.entry(base.shuffle(seed).into_updates()).or_insert(0u64) += 1;
    }
    assert_eq!(hist.len(), 6);
    let (e, sd) = (trials as f64 / 6.0, (trials as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt());
    for (perm, &c) in &hist {
        assert!((c as f64 - e).abs() <= 3.0 * sd, "{perm:?}: {c}");
    }
}

#[test]
fn planted_and_uniform_profiles() {
    let spec = GeneratorSpec {
        kind: GeneratorKind::PlantedHeavy { heavy_count: 1, heavy_freq: 50, background: 50 },
        n: 100,
        m: 100,
        seed: 4,
    };
    assert_eq!(generate(&spec).unwrap().exact_moment(2.0), 2550.0);
    let uni = generate(&GeneratorSpec { kind: GeneratorKind::Uniform, n: 1, m: 17, seed: 0 }).unwrap();
    assert!(uni.updates().iter().all(|&a| a == 1));
}

#[test]
fn zipf_rank_frequency_slope() {
    let spec = GeneratorSpec { kind: GeneratorKind::Zipf { skew: 1.0 }, n: 1000, m: 100_000, seed: 2 };
    let counts = spec.profile().unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = counts
        .iter()
        .enumerate()
        .take(100)
        .map(|(i, &c)| (((i + 1) as f64).ln(), (c as f64).ln()))
        .unzip();
    let slope = streammoments::harness::slope(&xs, &ys);
    assert!((slope + 1.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn inverse_cdf_edges() {
    assert_eq!(p_inverse_of_unit(1.0, 1.3), 1.0);
    assert_eq!(p_inverse_of_unit(0.25, 2.0), 2.0);
}

#[test]
fn pair_expansion_scales_frequencies() {
    let s = PInverseSampler::new(1.0, 5, 3).unwrap();
    let data = [1u64, 1, 2];
    let mut by_pair = std::collections::HashMap::new();
    for &a in &data {
        for (key, x) in s.expand(a) {
            *by_pair.entry(key).or_insert(0.0) += x;
        }
    }
    assert_eq!(by_pair.len(), 10);
    for r in 0..5 {
        assert_eq!(by_pair[&(1, r)], 2.0 * s.value(1, r));
        assert_eq!(by_pair[&(2, r)], s.value(2, r));
    }
}

#[test]
fn pairwise_hash_pairs_are_uniform() {
    // joint buckets of two fixed keys over many seeds: chi-square with 15 dof
    let (x, y, range) = (17u64, 99_001u64, 4u64);
    let trials = 16_000u64;
    let mut cells = [0u64; 16];
    for s in 0..trials {
        let h = PairwiseHash::from_seed(s);
        cells[(h.bucket(x, range) * range + h.bucket(y, range)) as usize] += 1;
    }
    let e = trials as f64 / 16.0;
    let chi2: f64 = cells.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    assert!(chi2 < 37.7, "chi2 {chi2}");
}
