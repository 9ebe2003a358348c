use streammoments::derand::{deterministic_fp, extract_bits, Answer, DerandConfig, Observed, PrimeSieve};
use streammoments::fp::FpConfig;
use streammoments::harness::naive_table_bits;
use streammoments::stream::{generate, GeneratorKind, GeneratorSpec, Stream};

fn obs(id: u64, count: u64, first: u64) -> Observed {
    Observed { id, count, first }
}

fn mixture(n: u64, m: u64) -> Stream {
    generate(&GeneratorSpec { kind: GeneratorKind::Mixture { skew: 1.0, heavy_count: 4, heavy_freq: m / 50 }, n, m, seed: 3 })
        .unwrap()
}

fn det(s: &Stream, p: f64) -> streammoments::derand::DetOutcome {
    let cfg = FpConfig { copies: Some(1), ..FpConfig::default() };
    deterministic_fp(p, 0.25, 0.1, s.universe(), &mut s.cursor(), &DerandConfig::default(), cfg).unwrap()
}

#[test]
fn lone_bit_is_parity_of_smallest_id() {
    // a hundred singletons at δ = 0.01: one bit
    let items: Vec<Observed> = (0..100u64).map(|i| obs(1000 - i, 1, 2 * i + 2)).collect();
    let smallest_first = items.iter().min_by_key(|o| o.id).unwrap().first;
    let b = extract_bits(&items, 1).unwrap();
    assert_eq!(b.bits(), &[smallest_first % 2 == 1]);
}

#[test]
fn even_arrivals_pick_the_first_prime() {
    let sieve = PrimeSieve::over(5000).unwrap();
    let need = sieve.index_bits();
    let items: Vec<Observed> = (1..=need as u64).map(|i| obs(i, 1, 2 * i)).collect();
    let bits = extract_bits(&items, need).unwrap();
    assert_eq!(sieve.pick(&bits, need).unwrap(), sieve.primes()[0]);
}

#[test]
fn prime_index_bias_within_tenth_of_delta() {
    let delta = 0.9;
    let sieve = PrimeSieve::new(1 << 10, delta).unwrap();
    let len = sieve.preferred_bits(delta);
    let count = sieve.count() as u64;
    let total = 1u64 << len;
    let mut hits = vec![0u64; count as usize];
    for v in 0..total {
        hits[(v % count) as usize] += 1;
    }
    let tv: f64 = hits.iter().map(|&h| (h as f64 / total as f64 - 1.0 / count as f64).abs()).sum::<f64>() / 2.0;
    assert!(tv <= delta / 10.0, "tv {tv} with {len} bits over {count} primes");
}

#[test]
fn residues_of_small_universe_are_distinct() {
    let n = 1u64 << 20;
    let sieve = PrimeSieve::new(n, 0.1).unwrap();
    let mut ids: Vec<u64> = (0..64u64).map(|i| 1 + streammoments::seed::mix64(i) % n).collect();
    ids.sort_unstable();
    ids.dedup();
    let colliding = sieve
        .primes()
        .iter()
        .filter(|&&q| {
            let mut r: Vec<u64> = ids.iter().map(|a| a % q).collect();
            r.sort_unstable();
            r.dedup();
            r.len() < ids.len()
        })
        .count();
    assert!(colliding as f64 <= 0.1 * sieve.count() as f64);
}

#[test]
fn short_streams_are_counted_exactly() {
    let s = Stream::new(64, vec![1, 2, 2, 3, 3, 3]).unwrap();
    for p in [0.5, 1.0, 1.5] {
        let out = det(&s, p);
        assert_eq!(out.answer, Answer::Exact);
        assert!((out.estimate - s.exact_moment(p)).abs() < 1e-9);
    }
}

#[test]
fn replays_are_bit_identical() {
    let s = mixture(1024, 200_000).shuffle(9);
    let a = det(&s, 1.5);
    let b = det(&s, 1.5);
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    assert_eq!((a.prime, a.seed, a.peak_bits, a.answer), (b.prime, b.seed, b.peak_bits, b.answer));
}

#[test]
fn seed_ignores_order_after_the_prefix() {
    let s = mixture(1024, 200_000).shuffle(4);
    let a = det(&s, 1.0);
    let cut = a.prefix_len.expect("ledger completes") as usize;
    let mut updates = s.updates().to_vec();
    updates[cut..].reverse();
    let b = det(&Stream::new(s.universe(), updates).unwrap(), 1.0);
    assert_eq!((a.prime, a.seed, a.prefix_len), (b.prime, b.seed, b.prefix_len));
}

#[test]
fn ledger_is_smaller_than_a_counter_table() {
    let s = mixture(1 << 16, 200_000).shuffle(2);
    let out = det(&s, 1.5);
    assert!(out.ledger_bits < naive_table_bits(&s), "{} vs {}", out.ledger_bits, naive_table_bits(&s));
}
