//! Committed reference CSVs for the five-point sweeps. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test --test golden`.

use std::path::{Path, PathBuf};

use jcladder::scenarios::{emit_outputs, run_fig1, run_fig2, ResultTable, ScenarioConfig};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn check_against_golden(kind: &str, emitted: &[PathBuf]) {
    let golden = root().join("tests/golden").join(kind);
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    if update {
        std::fs::create_dir_all(&golden).unwrap();
    }
    // the manifest holds wall time and thread count, so it is not compared
    for path in emitted.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
        let name = path.file_name().unwrap();
        let fresh = std::fs::read(path).unwrap();
        let reference = golden.join(name);
        if update {
            std::fs::write(&reference, &fresh).unwrap();
            continue;
        }
        let expected = std::fs::read(&reference).unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", reference.display()));
        assert!(fresh == expected, "{} differs from {}", path.display(), reference.display());
    }
}

fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&root().join("configs").join(format!("{name}.toml"))).unwrap()
}

fn run_into(dir: &Path, name: &str) -> Vec<PathBuf> {
    let cfg = load(name);
    let emitted = if name.starts_with("fig1") {
        emit_outputs(&ResultTable::Fig1(&run_fig1(&cfg).unwrap()), &cfg, dir, 0.0)
    } else {
        emit_outputs(&ResultTable::Fig2(&run_fig2(&cfg).unwrap()), &cfg, dir, 0.0)
    };
    emitted.unwrap().files
}

#[test]
fn fig1_small_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    check_against_golden("fig1_small", &run_into(tmp.path(), "fig1_small"));
}

#[test]
fn fig2_small_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    check_against_golden("fig2_small", &run_into(tmp.path(), "fig2_small"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let one = jcladder::scenarios::with_threads(1, || run_into(&tmp.path().join("one"), "fig1_small"));
    let four = jcladder::scenarios::with_threads(4, || run_into(&tmp.path().join("four"), "fig1_small"));
    for (a, b) in one.iter().zip(&four).filter(|(a, _)| a.extension().is_some_and(|e| e == "csv")) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{}", a.display());
    }
}
