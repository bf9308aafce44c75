use std::path::Path;
use std::process::{Command, Output};

fn secord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secord")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = secord(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_writes_window_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let pairs = dir.path().join("p.txt");
    std::fs::write(&corpus, "a b c d\n").unwrap();
    ok(&["extract", "--corpus", s(&corpus), "--window", "1", "--out", s(&pairs)]);
    assert_eq!(std::fs::read_to_string(&pairs).unwrap(), "a\tb\nb\ta\nb\tc\nc\tb\nc\td\nd\tc\n");
}

#[test]
fn simulate_then_score_groups_with_ppmi() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.txt");
    let manifest = dir.path().join("groups.tsv");
    let matrix = dir.path().join("ppmi.txt");
    let report = dir.path().join("cd.txt");
    let sim = ["--targets", "4", "--context-types", "12", "--samples", "15", "--seed", "3"];
    let mut args = vec!["simulate", "--out", s(&pairs), "--manifest", s(&manifest)];
    args.extend(sim);
    ok(&args);
    let first = std::fs::read(&pairs).unwrap();
    ok(&args);
    assert_eq!(std::fs::read(&pairs).unwrap(), first);

    ok(&["train-ppmi", "--pairs", s(&pairs), "--out", s(&matrix)]);
    let table = ok(&["eval-groups", "--matrix", s(&matrix), "--manifest", s(&manifest), "--report", s(&report)]);
    assert!(table.contains("2nd    1.0000"), "{table}");
    assert!(table.contains("none   1.0000"), "{table}");
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("cd.2nd=1\n") && text.contains("cd.none=1\n"), "{text}");
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sim.conf");
    let pairs = dir.path().join("pairs.txt");
    let manifest = dir.path().join("groups.tsv");
    std::fs::write(&conf, "targets=3\ncontext_types=5\nsamples=4\ngroups=none\n").unwrap();
    ok(&["--config", s(&conf), "simulate", "--targets", "2", "--out", s(&pairs), "--manifest", s(&manifest)]);
    assert_eq!(std::fs::read_to_string(&manifest).unwrap(), "none\tnone_t0\nnone\tnone_t1\n");
    // 2 targets, 4 samples, 5 context types, reverses included.
    assert_eq!(std::fs::read_to_string(&pairs).unwrap().lines().count(), 2 * 2 * 4 * 6);
}

#[test]
fn train_and_evaluate_dense_models() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let pairs = dir.path().join("p.txt");
    let svd = dir.path().join("svd.txt");
    let sgns = dir.path().join("sgns.txt");
    let ctx = dir.path().join("sgns_ctx.txt");
    let dataset = dir.path().join("sim.tsv");
    std::fs::write(&corpus, "cat dog pet\ndog cat animal\ncar road drive\nroad car wheel\ncat pet animal\n").unwrap();
    std::fs::write(&dataset, "cat\tdog\t9\ncat\tcar\t1\nroad\tcar\t8\nzebra\tcat\t5\n").unwrap();
    ok(&["extract", "--corpus", s(&corpus), "--out", s(&pairs)]);
    ok(&["train-svd", "--pairs", s(&pairs), "--dim", "3", "--k", "1", "--out", s(&svd)]);
    assert!(std::fs::read_to_string(&svd).unwrap().starts_with("8 3\n"));
    ok(&["train-sgns", "--pairs", s(&pairs), "--dim", "4", "--epochs", "2", "--out", s(&sgns), "--context-out", s(&ctx)]);
    assert!(dir.path().join("sgns.meta").exists());
    let out = ok(&["eval-wordsim", "--embedding", s(&svd), "--dataset", s(&dataset)]);
    assert!(out.contains("coverage=3/4"), "{out}");
}

#[test]
fn bootstrap_reports_adjusted_p() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::write(&a, "0.1\n0.2\n0.15\n0.12\n").unwrap();
    std::fs::write(&b, "0.9\n0.95\n0.85\n0.91\n").unwrap();
    let out = ok(&["bootstrap", "--a", s(&a), "--b", s(&b), "--samples", "1000", "--tests", "9"]);
    assert!(out.contains("degenerate=false"), "{out}");
    let p: f64 = out.lines().find_map(|l| l.strip_prefix("p=")).unwrap().parse().unwrap();
    let adj: f64 = out.lines().find_map(|l| l.strip_prefix("p_adjusted=")).unwrap().parse().unwrap();
    assert!((adj - (9.0 * p).min(1.0)).abs() < 1e-12);
}

#[test]
fn errors_name_the_stage_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.tsv");
    std::fs::write(&data, "a\tb\t1\n").unwrap();
    let out = secord(&[
        "exp2", "--pairs", "missing.pairs", "--dataset", s(&data), "--ratio", "0", "--out-dir", s(dir.path()),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[exp2]") && err.contains("ratio"), "{err}");

    let out = secord(&["extract", "--corpus", "does/not/exist", "--out", s(&dir.path().join("x"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[extract]"));
}
