use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/streammoments.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 10);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for t in ["typedef struct SmF2 SmF2;", "typedef struct SmFp SmFp;", "SM_OK = 0"] {
        assert!(header.contains(t), "{t} missing from header");
    }
}

/// Builds the static library into a scratch target dir; the one under the
/// shared target dir is only refreshed by `cargo build`.
fn static_lib() -> Option<PathBuf> {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("capi");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let status = Command::new(cargo)
        .args(["build", "--release", "--quiet", "-p", "streammoments-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(crate_dir())
        .status()
        .ok()?;
    let lib = target.join("release/libstreammoments_ffi.a");
    (status.success() && lib.exists()).then_some(lib)
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
}

#[test]
fn c_program_links_and_runs() {
    let (Some(lib), Some(cc)) = (static_lib(), compiler()) else {
        panic!("need a C compiler and the static library next to the test binary");
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_MAIN).unwrap();
    let bin = dir.path().join("main");
    let out = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "compile failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(Path::new(&bin)).output().unwrap();
    assert!(run.status.success(), "C program failed: {}", String::from_utf8_lossy(&run.stdout));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}

const C_MAIN: &str = r#"
#include <stdio.h>
#include "streammoments.h"

int main(void) {
    uint64_t items[4000];
    for (int i = 0; i < 4000; i++) items[i] = 1 + (uint64_t)(i % 20);
    SmF2 *f2 = NULL;
    if (sm_f2_new(0.2, 0.1, 20, &f2) != SM_OK) { puts("new"); return 1; }
    if (sm_f2_update(f2, items, 4000) != SM_OK) { puts("update"); return 1; }
    double y = 0, exact = 0;
    if (sm_f2_estimate(f2, &y) != SM_OK) { puts("estimate"); return 1; }
    sm_exact_moment(items, 4000, 2.0, &exact);
    sm_f2_free(f2);
    if (y < 0.8 * exact || y > 1.2 * exact) { printf("estimate %f, exact %f\n", y, exact); return 1; }
    uint64_t bad = 21;
    SmFp *fp = NULL;
    if (sm_fp_new(0.5, 0.25, 0.1, 20, 3, 1, &fp) != SM_OK) { puts("fp new"); return 1; }
    if (sm_fp_update(fp, &bad, 1) != SM_ITEM_OUT_OF_RANGE) { puts("range"); return 1; }
    sm_fp_free(fp);
    puts(sm_status_message(SM_OK));
    return 0;
}
"#;
