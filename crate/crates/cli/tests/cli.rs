use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const TINY_MODEL: &[&str] = &[
    "--classes", "2",
    "--fields", "title,text",
    "--arch", "small",
    "--input-length", "123",
    "--conv-frames", "8",
    "--fc-units", "16",
    "--batch-size", "4",
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chartcn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Two-class corpus where class 1 texts mention "apple" and class 2 texts
/// mention "zebra".
fn write_corpus(dir: &Path, name: &str, rows: usize) -> PathBuf {
    let mut out = String::new();
    for i in 0..rows {
        let (label, word) = if i % 2 == 0 { (1, "apple") } else { (2, "zebra") };
        out.push_str(&format!("{label},\"headline {i}\",\"the {word} story number {i}, with some filler\"\n"));
    }
    let path = dir.join(name);
    fs::write(&path, out).unwrap();
    path
}

fn train_tiny(dir: &TempDir, data: &Path, out: &str, extra: &[&str]) -> (PathBuf, Output) {
    let ckpt = dir.path().join(out);
    let mut args = vec!["train", "--data", path_str(data), "--out", path_str(&ckpt)];
    if !extra.contains(&"--epochs") {
        args.extend(["--epochs", "1"]);
    }
    args.extend_from_slice(TINY_MODEL);
    args.extend_from_slice(extra);
    let o = run(&args);
    (ckpt, o)
}

#[test]
fn missing_data_file_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    let (_, o) = train_tiny(&dir, &missing, "m.ckpt", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_option_is_a_usage_error() {
    let o = run(&["train", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_epoch_writes_a_loadable_checkpoint() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 12);
    let log = dir.path().join("train.log");
    let (ckpt, o) = train_tiny(&dir, &data, "m.ckpt", &["--log", path_str(&log)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("epoch=1 "), "{}", stdout(&o));
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 1);
    let model = chartcn::model::Model::load(&ckpt).unwrap();
    assert_eq!(model.config().class_count, 2);
    assert_eq!(model.config().input_length, 123);
}

#[test]
fn same_seed_gives_identical_checkpoints() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 12);
    let (a, _) = train_tiny(&dir, &data, "a.ckpt", &["--seed", "5", "--epochs", "2"]);
    let (b, _) = train_tiny(&dir, &data, "b.ckpt", &["--seed", "5", "--epochs", "2"]);
    let (c, _) = train_tiny(&dir, &data, "c.ckpt", &["--seed", "6", "--epochs", "2"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn resume_matches_an_uninterrupted_run() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 12);
    let (full, _) = train_tiny(&dir, &data, "full.ckpt", &["--epochs", "2"]);
    let (half, _) = train_tiny(&dir, &data, "half.ckpt", &[]);
    let (resumed, o) = train_tiny(&dir, &data, "resumed.ckpt", &["--epochs", "2", "--resume", path_str(&half)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("epoch=2 "), "{}", stdout(&o));
    assert_eq!(fs::read(&full).unwrap(), fs::read(&resumed).unwrap());
}

#[test]
fn eval_reports_accuracy_and_confusion() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 10);
    let (ckpt, _) = train_tiny(&dir, &data, "m.ckpt", &[]);
    let confusion = dir.path().join("cm.csv");
    let o = run(&[
        "eval", "--checkpoint", path_str(&ckpt), "--data", path_str(&data),
        "--fields", "title,text", "--confusion", path_str(&confusion),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let acc: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("accuracy="))
        .expect("accuracy line")
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(out.contains("samples=10"));
    let cm = fs::read_to_string(&confusion).unwrap();
    let lines: Vec<&str> = cm.lines().collect();
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        let total: u64 = row.split(',').skip(1).map(|v| v.parse::<u64>().unwrap()).sum();
        assert_eq!(total, 5);
    }
}

#[test]
fn eval_rejects_a_class_count_mismatch() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 8);
    let (ckpt, _) = train_tiny(&dir, &data, "m.ckpt", &[]);
    let o = run(&["eval", "--checkpoint", path_str(&ckpt), "--data", path_str(&data), "--classes", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn probabilities(line: &str) -> Vec<f64> {
    let probs = line.split("probabilities=").nth(1).expect("probabilities field");
    probs
        .split(',')
        .map(|kv| kv.rsplit(':').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn predict_prints_a_distribution_per_text() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 8);
    let (ckpt, _) = train_tiny(&dir, &data, "m.ckpt", &[]);

    for text in ["the apple story", ""] {
        let o = run(&["predict", "--checkpoint", path_str(&ckpt), "--text", text]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = stdout(&o);
        assert!(out.starts_with("class="), "{out}");
        let p = probabilities(out.trim());
        assert_eq!(p.len(), 2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-3, "{out}");
    }

    let mut child = bin()
        .args(["predict", "--checkpoint", path_str(&ckpt)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"one\ntwo\nthree\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn viz_weights_writes_a_deterministic_pgm() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 8);
    let (ckpt, _) = train_tiny(&dir, &data, "m.ckpt", &[]);
    let render = |name: &str| {
        let out = dir.path().join(name);
        let o = run(&[
            "viz-weights", "--checkpoint", path_str(&ckpt), "--out", path_str(&out),
            "--count", "6", "--columns", "3", "--seed", "1",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    let a = render("a.pgm");
    assert_eq!(a, render("b.pgm"));
    assert!(a.starts_with(b"P5\n"));
    let header = String::from_utf8_lossy(&a[..20]).into_owned();
    let dims: Vec<usize> = header.split_whitespace().skip(1).take(2).map(|v| v.parse().unwrap()).collect();
    // Three kernels per row, each 70 frames wide and 7 taps tall, one-pixel gaps.
    assert_eq!(dims, vec![3 * 70 + 2, 2 * 7 + 1]);
}

#[test]
fn augment_rewrites_text_fields_deterministically() {
    let dir = TempDir::new().unwrap();
    let data = write_corpus(dir.path(), "train.csv", 20);
    let thesaurus = dir.path().join("syn.tsv");
    fs::write(&thesaurus, "story\ttale|account\nfiller\tpadding\n").unwrap();
    let go = |name: &str, p: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = run(&[
            "augment", "--data", path_str(&data), "--thesaurus", path_str(&thesaurus),
            "--out", path_str(&out), "--p", p, "--seed", seed,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(out).unwrap()
    };
    let a = go("a.csv", "0.5", "3");
    assert_eq!(a, go("b.csv", "0.5", "3"));
    assert_eq!(a.lines().count(), 20);
    assert_ne!(a, fs::read_to_string(&data).unwrap());

    let identity = go("c.csv", "0.000001", "3");
    let original = fs::read_to_string(&data).unwrap();
    // The writer only quotes fields that need it, so compare without quotes.
    let unchanged = identity
        .lines()
        .zip(original.lines())
        .filter(|(x, y)| x.replace('"', "") == y.replace('"', ""))
        .count();
    assert_eq!(unchanged, 20);
}

#[test]
fn bag_of_words_baseline_separates_keyword_classes() {
    let dir = TempDir::new().unwrap();
    let train = write_corpus(dir.path(), "train.csv", 40);
    let test = write_corpus(dir.path(), "test.csv", 10);
    let o = run(&[
        "baseline", "--kind", "bow", "--data", path_str(&train), "--test", path_str(&test),
        "--classes", "2", "--fields", "title,text", "--train-epochs", "30", "--learning-rate", "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("baseline=bow"), "{out}");
    assert!(out.trim_end().ends_with("accuracy=1.0000"), "{out}");
}

#[test]
fn centroid_baseline_requires_embeddings() {
    let dir = TempDir::new().unwrap();
    let train = write_corpus(dir.path(), "train.csv", 10);
    let o = run(&["baseline", "--kind", "centroids", "--data", path_str(&train), "--classes", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("embeddings"), "{}", stderr(&o));
}

#[test]
fn centroid_baseline_runs_with_embeddings() {
    let dir = TempDir::new().unwrap();
    let train = write_corpus(dir.path(), "train.csv", 40);
    let emb = dir.path().join("vectors.txt");
    fs::write(&emb, "apple 1.0 0.0\nzebra 0.0 1.0\nstory 0.5 0.5\nthe 0.4 0.6\n").unwrap();
    let o = run(&[
        "baseline", "--kind", "centroids", "--data", path_str(&train), "--embeddings", path_str(&emb),
        "--k", "2", "--classes", "2", "--fields", "title,text", "--train-epochs", "30", "--learning-rate", "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("features=2"), "{}", stdout(&o));
}

#[test]
fn convert_thesaurus_writes_tsv() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("th.dat");
    fs::write(&input, "UTF-8\nhappy|1\n(adj)|happy|glad|content (similar term)\n").unwrap();
    let out = dir.path().join("th.tsv");
    let o = run(&["convert-thesaurus", "--input", path_str(&input), "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out).unwrap(), "happy\tglad|content\n");
}
