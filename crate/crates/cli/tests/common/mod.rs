#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ffi::OsStr;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const FIXTURE_SEED: u64 = 42;
pub const FIXTURE_PAIRS: usize = 1000;
pub const RUN_TIMESTAMP: &str = "1700000000";

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// The committed generator corpus.
pub fn fixture_dir() -> PathBuf {
    repo_root().join("fixtures/synthetic-1000-seed42")
}

pub fn golden_dir() -> PathBuf {
    repo_root().join("fixtures/golden")
}

pub fn prelink<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_prelink"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("run prelink")
}

/// Runs the binary and returns stdout, panicking with stderr on failure.
pub fn run_ok<I, S>(args: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    let args: Vec<_> = args.into_iter().map(|a| a.as_ref().to_os_string()).collect();
    let out = prelink(&args);
    assert!(
        out.status.success(),
        "prelink {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Every file under `dir`, keyed by its path relative to `dir`.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Ingest, scope, train, match, eval, merge and stats on the committed
/// fixture inside `work`. Returns every file written plus the captured
/// stats output.
pub fn full_pipeline(work: &Path) -> BTreeMap<String, Vec<u8>> {
    let fixture = fixture_dir();
    let store = work.join("store");
    let model = work.join("model.json");
    let reports = work.join("reports");
    fs::create_dir_all(&reports).unwrap();
    let seed = FIXTURE_SEED.to_string();
    let s = store.as_os_str();

    run_ok([
        OsStr::new("ingest"),
        "--store".as_ref(),
        s,
        "--preprints".as_ref(),
        fixture.join("preprints.jsonl").as_os_str(),
        "--published".as_ref(),
        fixture.join("published.jsonl").as_os_str(),
    ]);
    run_ok([
        OsStr::new("scope"),
        "--store".as_ref(),
        s,
        "--report".as_ref(),
        reports.join("scope.csv").as_os_str(),
    ]);
    run_ok([
        OsStr::new("train"),
        "--store".as_ref(),
        s,
        "--model".as_ref(),
        model.as_os_str(),
        "--seed".as_ref(),
        seed.as_ref(),
    ]);
    run_ok([
        OsStr::new("eval"),
        "--store".as_ref(),
        s,
        "--seed".as_ref(),
        seed.as_ref(),
        "--report".as_ref(),
        reports.join("eval.json").as_os_str(),
    ]);
    run_ok([
        OsStr::new("match"),
        "--store".as_ref(),
        s,
        "--model".as_ref(),
        model.as_os_str(),
        "--timestamp".as_ref(),
        RUN_TIMESTAMP.as_ref(),
        "--report".as_ref(),
        reports.join("match.json").as_os_str(),
    ]);
    let merged = run_ok([OsStr::new("merge"), "--store".as_ref(), s]);
    fs::write(reports.join("merge.json"), merged).unwrap();
    let stats = run_ok([OsStr::new("stats"), "--store".as_ref(), s]);
    fs::write(reports.join("stats.txt"), stats).unwrap();
    read_tree(work)
}
