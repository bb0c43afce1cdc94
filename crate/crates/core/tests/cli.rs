use std::path::Path;
use std::process::{Command, Output};

fn senmap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_senmap"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = senmap(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const CONFIG: &str = r#"
seed = 2
target = 0
sources = [1]
method = "senone-map"
output_dir = "out"
hidden_dims = [8]
target_train_fraction = 0.5

[train]
epochs = 2
batch_size = 8

[mt_train]
epochs = 2
batch_size = 8

[finetune]
epochs = 1
batch_size = 8

[corpus.synth]
num_languages = 2
feature_dim = 4
phones_per_language = 4
senones_per_phone = 2
frames_per_senone = 30
frames_per_utterance = 6
"#;

#[test]
fn step_by_step_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("exp.toml"), CONFIG).unwrap();
    let c = ["--config", "exp.toml", "--seed", "2"];
    let with = |rest: &[&str]| -> Vec<String> { c.iter().chain(rest).map(|s| s.to_string()).collect() };
    let run = |rest: &[&str]| {
        let args = with(rest);
        ok(d, &args.iter().map(String::as_str).collect::<Vec<_>>())
    };

    run(&["synth", "--out", "data/corpus.txt", "--format", "text", "--truth-dir", "truth"]);
    assert!(d.join("data/corpus.txt").is_file());
    assert!(d.join("truth/manual_1_to_0.txt").is_file());
    assert!(d.join("truth/phones_0_to_1.txt").is_file());

    run(&["train-baseline", "--out", "m/base.json"]);
    run(&["build-map", "--model", "m/base.json", "--source", "1", "--out", "m/senone.txt"]);
    run(&["build-map", "--model", "m/base.json", "--source", "1", "--kind", "phone", "--out", "m/phone.txt"]);
    run(&["build-map", "--kind", "all-pairs", "--out", "m/maps"]);
    assert!(d.join("m/maps/manifest.txt").is_file());

    run(&["pool-train", "--map", "1=m/senone.txt", "--out", "m/pooled.json"]);
    run(&["pool-train", "--map", "1=m/phone.txt", "--level", "phone", "--model", "m/base.json", "--out", "m/pooled_phone.json"]);
    run(&["mt-train", "--mode", "mapped", "--maps", "m/maps", "--out", "m/mt.json"]);
    run(&["prune", "--model", "m/mt.json", "--out", "m/pruned.json"]);
    let log = run(&["finetune", "--model", "m/pruned.json", "--out", "m/final.json"]);
    assert_eq!(log.lines().filter(|l| l.starts_with("epoch")).count(), 1);
    let eval = run(&["evaluate", "--model", "m/final.json"]);
    assert!(eval.starts_with("dev "), "{eval}");
    assert!(eval.contains("\ntest "), "{eval}");
}

#[test]
fn experiment_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("exp.toml"), CONFIG).unwrap();
    let table = ok(d, &["--config", "exp.toml", "experiment", "--methods", "senone-map,mtdnn-masked", "--seeds", "1,2"]);
    assert!(table.contains("senone-map"));
    assert!(d.join("out/seed-1/results.json").is_file());
    assert!(d.join("out/results.json").is_file());
    let report = ok(d, &["report", "out/seed-1/results.json", "out/seed-2/results.json"]);
    let averaged = std::fs::read_to_string(d.join("out/results.txt")).unwrap();
    assert_eq!(report, averaged);
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("clash.toml"), "target = 1\nsources = [1]\n").unwrap();
    let out = senmap(d, &["--config", "clash.toml", "train-baseline", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(15));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[config]"));

    let out = senmap(d, &["--config", "missing.toml", "train-baseline", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(27));

    std::fs::write(d.join("manual.toml"), "method = \"manual-map\"\n").unwrap();
    let out = senmap(d, &["--config", "manual.toml", "experiment"]);
    assert_eq!(out.status.code(), Some(15));

    let out = senmap(d, &["prune", "--model", "nothing.json", "--out", "y.json"]);
    assert_eq!(out.status.code(), Some(27));

    let out = senmap(d, &["bogus-command"]);
    assert_eq!(out.status.code(), Some(2));
}
