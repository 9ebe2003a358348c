use streammoments::harness::{run_experiment, write_csv, Algo, ExperimentSpec, Source};
use streammoments::stream::{GeneratorKind, GeneratorSpec};

fn spec(algo: Algo, trials: u64) -> ExperimentSpec {
    ExperimentSpec {
        algo,
        source: Source::Generated(GeneratorSpec { kind: GeneratorKind::Zipf { skew: 1.0 }, n: 100, m: 10_000, seed: 1 }),
        p: 1.5,
        eps: 0.25,
        delta: 0.1,
        trials,
        seed: 7,
        copies: Some(1),
        shuffle: true,
    }
}

fn csv_of(s: &ExperimentSpec) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, &run_experiment(s).unwrap()).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn oracle_rows_have_zero_error() {
    let out = run_experiment(&spec(Algo::Oracle, 5)).unwrap();
    assert!(out.rows.iter().all(|r| r.relerr() == Some(0.0)));
    assert!(out.summary.passed());
}

#[test]
fn seeded_runs_write_identical_bytes() {
    for algo in [Algo::F2Rand, Algo::FpRand] {
        let s = spec(algo, 4);
        assert_eq!(csv_of(&s), csv_of(&s));
    }
}

#[test]
fn csv_opens_with_schema_and_columns() {
    let text = csv_of(&spec(Algo::FpRand, 2));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema=streammoments.fprand.v1");
    assert_eq!(lines[1], "trial,estimate,exact,relerr,bits_peak,updates_consumed_by_hhr,failed");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("# summary trials=2 "));
    let f2 = csv_of(&spec(Algo::F2Rand, 1));
    assert_eq!(f2.lines().nth(1), Some("trial,Y,exactF2,relerr,bits"));
}

#[test]
fn invalid_specs_are_rejected() {
    let mut s = spec(Algo::FpRand, 1);
    s.p = 2.5;
    assert!(run_experiment(&s).is_err());
    let mut s = spec(Algo::F2Rand, 1);
    s.eps = 0.0;
    assert!(run_experiment(&s).is_err());
}
