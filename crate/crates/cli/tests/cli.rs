use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csembed"))
        .current_dir(dir)
        .env_remove("CSEMBED_CONFIG")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn chain_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("chain.txt"), "a b\nb c\n").unwrap();
    dir
}

/// Two 10-cliques joined by one edge, with block labels.
fn blocks_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = String::new();
    let mut labels = String::new();
    for base in [0, 10] {
        for u in 0..10 {
            labels += &format!("n{} block{}\n", base + u, base / 10);
            for v in u + 1..10 {
                edges += &format!("n{} n{}\n", base + u, base + v);
            }
        }
    }
    edges += "n0 n10\n";
    fs::write(dir.path().join("g.txt"), edges).unwrap();
    fs::write(dir.path().join("labels.txt"), labels).unwrap();
    dir
}

#[test]
fn neighborhoods_on_a_chain() {
    let dir = chain_dir();
    let args = ["--graph", "chain.txt", "-e", "3", "-r", "2", "neighborhoods"];
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let expanded = fs::read_to_string(dir.path().join("out/expanded.txt")).unwrap();
    let refined = fs::read_to_string(dir.path().join("out/refined.txt")).unwrap();
    assert_eq!(refined.lines().count(), 3);
    for (e, r) in expanded.lines().zip(refined.lines()) {
        let e: Vec<&str> = e.split(':').nth(1).unwrap().split_whitespace().collect();
        let members = r.split(':').nth(1).unwrap().split('|').next().unwrap();
        assert!(members.split_whitespace().all(|m| e.contains(&m)));
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("expansion_size = 3"));
    assert!(stderr.contains("time neighborhoods"));

    // rerun gives the same bytes
    let before = fs::read(dir.path().join("out/refined.txt")).unwrap();
    assert!(run(dir.path(), &args).status.success());
    assert_eq!(fs::read(dir.path().join("out/refined.txt")).unwrap(), before);
}

#[test]
fn validation_failures_exit_2() {
    let dir = chain_dir();
    let out = run(dir.path(), &["--graph", "chain.txt", "-e", "2", "-r", "3", "neighborhoods"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--graph", "absent.txt", "neighborhoods"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--graph", "chain.txt", "--labels", "absent.txt", "evaluate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--graph", "chain.txt", "--set", "bogus=1", "neighborhoods"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--graph", "chain.txt", "-e", "3", "-r", "2", "stability", "--runs", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["--graph", "chain.txt", "sweep", "--param", "e", "--values", "2", "--log2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_input_exits_3() {
    let dir = chain_dir();
    fs::write(dir.path().join("bad.txt"), "a b c d\n").unwrap();
    let out = run(dir.path(), &["--graph", "bad.txt", "neighborhoods"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn embed_shapes_and_replay() {
    let dir = blocks_dir();
    let args = ["--preset", "desk", "-e", "10", "-r", "6", "--graph", "g.txt", "embed"];
    assert!(run(dir.path(), &args).status.success());
    let first = fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap();
    assert_eq!(first.lines().next(), Some("20 16"));
    assert_eq!(first.lines().count(), 21);
    assert!(run(dir.path(), &args).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap(), first);

    // training from the persisted dump gives the same file
    let mut from_dump = args.to_vec();
    from_dump.extend(["--neighborhoods", "out/refined.txt"]);
    assert!(run(dir.path(), &from_dump).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap(), first);
}

#[test]
fn zero_epochs_writes_the_initialization() {
    let dir = blocks_dir();
    let base = ["--preset", "desk", "-e", "10", "-r", "6", "--graph", "g.txt"];
    let mut args = base.to_vec();
    args.extend(["--epochs", "0", "embed"]);
    assert!(run(dir.path(), &args).status.success());
    let init = fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap();
    let mut args = base.to_vec();
    args.extend(["--epochs", "0", "--seed", "2", "embed"]);
    assert!(run(dir.path(), &args).status.success());
    assert_ne!(fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap(), init);
    let bound = 0.5 / 16.0;
    for line in init.lines().skip(1) {
        assert!(line.split_whitespace().skip(1).all(|x| x.parse::<f64>().unwrap().abs() <= bound));
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = blocks_dir();
    fs::write(
        dir.path().join("run.conf"),
        "graph = g.txt\nexpansion_size = 10\nrefinement_size = 6\ndimensions = 4\nepochs = 1\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_csembed"))
        .current_dir(dir.path())
        .env("CSEMBED_CONFIG", "run.conf")
        .args(["-d", "8", "embed"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let emb = fs::read_to_string(dir.path().join("out/embedding.txt")).unwrap();
    assert_eq!(emb.lines().next(), Some("20 8"));

    // the resolved config replays to the same bytes
    let resolved = fs::read_to_string(dir.path().join("out/config.resolved")).unwrap();
    assert!(resolved.contains("dimensions = 8"));
    let replay = resolved.replace("output_dir = out", "output_dir = replay");
    fs::write(dir.path().join("replay.conf"), replay).unwrap();
    assert!(run(dir.path(), &["--config", "replay.conf", "embed"]).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("replay/embedding.txt")).unwrap(), emb);
}

#[test]
fn evaluate_reports_every_fold() {
    let dir = blocks_dir();
    let args = [
        "--preset", "desk", "-e", "10", "-r", "6", "--graph", "g.txt", "--labels", "labels.txt",
        "--folds", "10", "evaluate", "--tsv", "folds.tsv",
    ];
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout(&out);
    assert_eq!(report.lines().filter(|l| l.starts_with("fold.")).count(), 10);
    let mean: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("mean_micro_f1="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&mean));
    let tsv = fs::read_to_string(dir.path().join("folds.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 12);
}

#[test]
fn evaluate_rejects_mismatched_embedding() {
    let dir = blocks_dir();
    fs::write(dir.path().join("small.txt"), "1 2\nn0 0.1 0.2\n").unwrap();
    let out = run(
        dir.path(),
        &["--graph", "g.txt", "--labels", "labels.txt", "evaluate", "--embedding", "small.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stability_passes_and_reports_seed_variation() {
    let dir = blocks_dir();
    let base = ["--preset", "desk", "-e", "10", "-r", "6", "--epochs", "2", "--graph", "g.txt"];
    let mut args = base.to_vec();
    args.extend(["stability", "--runs", "2"]);
    let out = run(dir.path(), &args);
    assert!(out.status.success());
    let report = stdout(&out);
    assert!(report.contains("global_max=0\n"));
    assert!(report.contains("pass=true"));
    assert!(dir.path().join("out/stability/run1.txt").is_file());

    let mut args = base.to_vec();
    args.extend(["stability", "--runs", "2", "--vary-seeds"]);
    let out = run(dir.path(), &args);
    assert!(out.status.success());
    let report = stdout(&out);
    let max: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("global_max="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(max > 0.0);
    assert!(report.contains("pass=false"));
}

#[test]
fn sweep_table() {
    let dir = blocks_dir();
    let args = [
        "--preset", "desk", "-r", "4", "--epochs", "2", "--graph", "g.txt", "--labels", "labels.txt",
        "--folds", "4", "sweep", "--param", "e", "--values", "3,6,12", "--tsv", "sweep.tsv",
    ];
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = stdout(&out);
    // e=3 is below r=4 and is skipped
    assert_eq!(table.lines().count(), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped expansion_size=3"));
    assert_eq!(fs::read_to_string(dir.path().join("sweep.tsv")).unwrap(), table);
}
