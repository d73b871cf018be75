//! End-to-end runs of the command line against temporary directories.

use std::path::Path;

use spchs_cli::run_with_output;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("spchs").chain(args.iter().copied());
    let code = run_with_output(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

/// Runs the whole key-to-search flow and returns the search report.
fn full_flow(backend: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("keywords.txt"), "invoice\nreport\ninvoice\ninvoice\nreport\n").unwrap();

    let (code, _) = run(&[
        "setup",
        "--mpk", &path(d, "mpk.key"),
        "--msk", &path(d, "msk.key"),
        "--backend", backend,
        "--seed", "7",
    ]);
    assert_eq!(code, 0);

    let (code, _) = run(&[
        "struct-init",
        "--mpk", &path(d, "mpk.key"),
        "--pri", &path(d, "pri.key"),
        "--pub", &path(d, "pub.key"),
        "--backend", backend,
        "--seed", "8",
    ]);
    assert_eq!(code, 0);

    let (code, report) = run(&[
        "encrypt",
        "--mpk", &path(d, "mpk.key"),
        "--pri", &path(d, "pri.key"),
        "--pub", &path(d, "pub.key"),
        "--store", &path(d, "store.db"),
        "--keywords", &path(d, "keywords.txt"),
        "--backend", backend,
        "--seed", "9",
    ]);
    assert_eq!(code, 0);
    assert!(report.contains("appended 5 ciphertexts"));

    let (code, _) = run(&[
        "trapdoor",
        "--msk", &path(d, "msk.key"),
        "--keyword", "invoice",
        "--out", &path(d, "trap.key"),
        "--backend", backend,
    ]);
    assert_eq!(code, 0);

    let (code, report) = run(&[
        "search",
        "--mpk", &path(d, "mpk.key"),
        "--store", &path(d, "store.db"),
        "--trapdoor", &path(d, "trap.key"),
        "--backend", backend,
    ]);
    assert_eq!(code, 0);
    report
}

#[test]
fn scratch_flow_finds_the_three_matching_ordinals() {
    let report = full_flow("scratch");
    // Keyword lines 0, 2, 3 were "invoice".
    assert!(report.contains("matches: 0 2 3"), "report: {report}");
}

#[test]
fn generic_flow_finds_the_three_matching_ordinals() {
    let report = full_flow("generic");
    assert!(report.contains("matches: 0 2 3"), "report: {report}");
}

#[test]
fn foreign_trapdoor_matches_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("keywords.txt"), "invoice\n").unwrap();

    for (mpk, msk, seed) in [("mpk.key", "msk.key", "7"), ("mpk2.key", "msk2.key", "77")] {
        let (code, _) = run(&[
            "setup",
            "--mpk", &path(d, mpk),
            "--msk", &path(d, msk),
            "--seed", seed,
        ]);
        assert_eq!(code, 0);
    }
    let (code, _) = run(&[
        "struct-init",
        "--mpk", &path(d, "mpk.key"),
        "--pri", &path(d, "pri.key"),
        "--pub", &path(d, "pub.key"),
        "--seed", "8",
    ]);
    assert_eq!(code, 0);
    let (code, _) = run(&[
        "encrypt",
        "--mpk", &path(d, "mpk.key"),
        "--pri", &path(d, "pri.key"),
        "--pub", &path(d, "pub.key"),
        "--store", &path(d, "store.db"),
        "--keywords", &path(d, "keywords.txt"),
        "--seed", "9",
    ]);
    assert_eq!(code, 0);

    // Trapdoor under the second, unrelated master key.
    let (code, _) = run(&[
        "trapdoor",
        "--msk", &path(d, "msk2.key"),
        "--keyword", "invoice",
        "--out", &path(d, "trap.key"),
    ]);
    assert_eq!(code, 0);
    let (code, report) = run(&[
        "search",
        "--mpk", &path(d, "mpk.key"),
        "--store", &path(d, "store.db"),
        "--trapdoor", &path(d, "trap.key"),
    ]);
    assert_eq!(code, 0);
    assert!(report.contains("matches:\n") || report.trim_end().ends_with("matches:"),
        "expected an empty match list, got: {report}");
}

#[test]
fn search_can_be_restricted_to_one_structure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("keywords.txt"), "invoice\n").unwrap();
    let (code, _) = run(&[
        "setup",
        "--mpk", &path(d, "mpk.key"),
        "--msk", &path(d, "msk.key"),
        "--seed", "1",
    ]);
    assert_eq!(code, 0);

    for i in 0..2 {
        let pri = format!("pri{i}.key");
        let public = format!("pub{i}.key");
        let (code, _) = run(&[
            "struct-init",
            "--mpk", &path(d, "mpk.key"),
            "--pri", &path(d, &pri),
            "--pub", &path(d, &public),
            "--seed", &format!("{}", 10 + i),
        ]);
        assert_eq!(code, 0);
        let (code, _) = run(&[
            "encrypt",
            "--mpk", &path(d, "mpk.key"),
            "--pri", &path(d, &pri),
            "--pub", &path(d, &public),
            "--store", &path(d, "store.db"),
            "--keywords", &path(d, "keywords.txt"),
            "--seed", &format!("{}", 20 + i),
        ]);
        assert_eq!(code, 0);
    }
    let (code, _) = run(&[
        "trapdoor",
        "--msk", &path(d, "msk.key"),
        "--keyword", "invoice",
        "--out", &path(d, "trap.key"),
    ]);
    assert_eq!(code, 0);

    let (code, unrestricted) = run(&[
        "search",
        "--mpk", &path(d, "mpk.key"),
        "--store", &path(d, "store.db"),
        "--trapdoor", &path(d, "trap.key"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(unrestricted.matches("structure ").count(), 2);

    let (code, restricted) = run(&[
        "search",
        "--mpk", &path(d, "mpk.key"),
        "--store", &path(d, "store.db"),
        "--trapdoor", &path(d, "trap.key"),
        "--pub", &path(d, "pub1.key"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(restricted.matches("structure ").count(), 1);
    assert!(restricted.contains("matches: 1"));
}

#[test]
fn seeded_setups_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a", "b"] {
        let (code, _) = run(&[
            "setup",
            "--mpk", &path(d, &format!("mpk-{name}.key")),
            "--msk", &path(d, &format!("msk-{name}.key")),
            "--seed", "42",
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(
        std::fs::read(d.join("mpk-a.key")).unwrap(),
        std::fs::read(d.join("mpk-b.key")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("msk-a.key")).unwrap(),
        std::fs::read(d.join("msk-b.key")).unwrap()
    );
}

#[test]
fn unknown_subcommands_exit_with_usage() {
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn missing_files_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _) = run(&[
        "struct-init",
        "--mpk", &path(d, "does-not-exist.key"),
        "--pri", &path(d, "pri.key"),
        "--pub", &path(d, "pub.key"),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn trapdoor_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, _) = run(&[
        "setup",
        "--mpk", &path(d, "mpk.key"),
        "--msk", &path(d, "msk.key"),
        "--seed", "5",
    ]);
    assert_eq!(code, 0);
    for name in ["t1.key", "t2.key"] {
        let (code, _) = run(&[
            "trapdoor",
            "--msk", &path(d, "msk.key"),
            "--keyword", "w",
            "--out", &path(d, name),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(
        std::fs::read(d.join("t1.key")).unwrap(),
        std::fs::read(d.join("t2.key")).unwrap()
    );
}

#[test]
fn bench_writes_csv_with_exact_counters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, report) = run(&[
        "bench",
        "--n", "60",
        "--structures", "3",
        "--keyword-universe", "8",
        "--m-list", "0,4",
        "--reps", "2",
        "--seed", "3",
        "--out", &path(d, "bench.csv"),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(d.join("bench.csv")).unwrap();
    assert_eq!(report, csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "backend,n,n_structures,m,median_ms,pairings,comparisons,reps");
    assert_eq!(lines.len(), 5);
    // scratch m=0: pairings = structures; peks rows always n.
    assert!(lines[1].starts_with("scratch,60,3,0,"));
    assert!(lines[1].contains(",3,"));
    assert!(lines[2].starts_with("peks,60,3,0,"));
    assert!(lines[2].contains(",60,"));
}
