use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streammoments")).args(args).env_remove("STREAMMOMENTS_THREADS").output().unwrap()
}

fn generate(dir: &Path, name: &str, gen: &str, n: &str, m: &str, binary: bool) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["generate", "--gen", gen, "--n", n, "--m", m, "--output", &path];
    if binary {
        args.push("--binary");
    }
    assert_eq!(cli(&args).status.code(), Some(0));
    path
}

#[test]
fn f2rand_writes_schema_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "z.txt", "zipf:1.0", "100", "10000", false);
    let out = cli(&["f2rand", "--epsilon", "0.1", "--delta", "0.1", "--input", &input, "--seed", "3", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=streammoments.f2rand.v1"));
    assert_eq!(lines.next(), Some("trial,Y,exactF2,relerr,bits"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 21);
}

#[test]
fn fprand_and_fpdet_read_binary_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "m.bin", "mixture:1.0:4:2000", "256", "50000", true);
    let csv = dir.path().join("out.csv");
    let csv = csv.to_str().unwrap();
    let out = cli(&["fprand", "--p", "1.0", "--input", &input, "--copies", "1", "--csv-out", csv]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("# schema=streammoments.fprand.v1\ntrial,estimate,exact,relerr,bits_peak,updates_consumed_by_hhr,failed\n"));
    // p = 1 is answered exactly by the length counter
    assert!(text.lines().nth(2).unwrap().starts_with("0,50000,50000,0,"));
    let out = cli(&["fpdet", "--p", "0.5", "--input", &input, "--csv-out", csv]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("# schema=streammoments.fpdet.v1\n"));
}

#[test]
fn missed_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "short.txt", "uniform", "10", "30", false);
    // the block is far longer than the stream, so no estimate is produced
    let out = cli(&["f2rand", "--epsilon", "0.01", "--delta", "0.01", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_exit_one() {
    assert_eq!(cli(&["f2rand", "--input", "/nonexistent/stream"]).status.code(), Some(1));
    assert_eq!(cli(&["bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["harness", "--algo", "nope"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn harness_oracle_runs_generated_streams() {
    let out = cli(&["harness", "--algo", "oracle", "--p", "1.5", "--n", "64", "--m", "1000", "--gen", "zipf:1.2", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# schema=streammoments.oracle.v1\n"));
    assert!(text.contains("# summary trials=3 successes=3"));
}
