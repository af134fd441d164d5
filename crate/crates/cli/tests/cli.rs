use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
systems = ["lfcc", "mfcc"]

[paths]
corpus_dir = "corpus"
work_dir = "work"

[corpus]
n_speakers = 4
utts_per_speaker = 3
test_speakers = 2
seed = 5

[gmm]
components = 4
"#;

fn maskspeech(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskspeech"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = maskspeech(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn failure(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = maskspeech(dir, args);
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn project(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

fn count_lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn synth_is_deterministic_and_counts_segments() {
    let dir = project("[corpus]\nn_speakers = 4\nutts_per_speaker = 10\n");
    let d = dir.path();
    ok(d, &["--config", "run.toml", "synth", "--out", "a"]);
    ok(d, &["--config", "run.toml", "synth", "--out", "b"]);
    let a = fs::read(d.join("a/manifest.tsv")).unwrap();
    assert_eq!(a, fs::read(d.join("b/manifest.tsv")).unwrap());
    assert_eq!(fs::read_dir(d.join("a/wav")).unwrap().count(), 80);

    ok(d, &["--config", "run.toml", "synth", "--out", "c", "--seed", "9"]);
    assert_ne!(fs::read(d.join("a/wav/spk00_u000_mask.wav")).unwrap(), fs::read(d.join("c/wav/spk00_u000_mask.wav")).unwrap());
}

#[test]
fn invalid_config_exits_two_naming_the_field() {
    let dir = project("[corpus.mask]\nattenuation_db_at_8khz = -3.0\n");
    let (code, err) = failure(dir.path(), &["--config", "run.toml", "synth"]);
    assert_eq!(code, 2);
    assert!(err.contains("corpus.mask.attenuation_db_at_8khz"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = failure(dir.path(), &["--config", "absent.toml", "eval"]);
    assert_eq!(code, 1);
    assert!(err.contains("absent.toml"), "{err}");
}

#[test]
fn extract_caches_and_reports_broken_files() {
    let dir = project("[corpus]\nn_speakers = 1\nutts_per_speaker = 5\n");
    let d = dir.path();
    ok(d, &["--config", "run.toml", "synth"]);
    let out = ok(d, &["--config", "run.toml", "extract", "--feature", "lfcc"]);
    assert!(out.contains("10 written, 0 up to date"), "{out}");
    let files = fs::read_dir(d.join("work/features/lfcc")).unwrap();
    assert_eq!(files.filter(|f| f.as_ref().unwrap().path().extension().unwrap() == "mskf").count(), 10);

    let out = ok(d, &["--config", "run.toml", "extract", "--feature", "lfcc"]);
    assert!(out.contains("0 written, 10 up to date"), "{out}");

    fs::write(d.join("corpus/wav/spk00_u002_mask.wav"), b"RIFF garbage").unwrap();
    let (code, err) = failure(d, &["--config", "run.toml", "extract", "--feature", "lfcc"]);
    assert_ne!(code, 0);
    assert!(err.contains("spk00_u002_mask"), "{err}");
    assert!(err.contains("1 of 10"), "{err}");
}

#[test]
fn changed_feature_settings_invalidate_the_cache() {
    let dir = project("[corpus]\nn_speakers = 1\nutts_per_speaker = 2\n");
    let d = dir.path();
    ok(d, &["--config", "run.toml", "synth"]);
    ok(d, &["--config", "run.toml", "extract", "--feature", "mfcc"]);
    fs::write(
        d.join("run.toml"),
        "[corpus]\nn_speakers = 1\nutts_per_speaker = 2\n[features]\nn_filters = 48\n",
    )
    .unwrap();
    let out = ok(d, &["--config", "run.toml", "extract", "--feature", "mfcc"]);
    assert!(out.contains("4 written"), "{out}");
}

#[test]
fn full_pipeline() {
    let dir = project(TINY);
    let d = dir.path();
    let cfg = ["--config", "run.toml"];
    let run = |extra: &[&str]| ok(d, &[&cfg[..], extra].concat());

    run(&["synth"]);
    let (code, err) = failure(d, &[&cfg[..], &["train", "--feature", "lfcc"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("missing artifact"), "{err}");
    assert!(err.contains(&format!("features{0}lfcc{0}spk00_u000", std::path::MAIN_SEPARATOR)), "{err}");

    run(&["extract"]);
    run(&["train"]);
    run(&["score"]);
    let w = d.join("work");
    for kind in ["lfcc", "mfcc"] {
        assert!(w.join(format!("models/{kind}.gmm")).exists());
        assert_eq!(count_lines(&w.join(format!("scores/{kind}_dev.tsv"))), 12);
        assert_eq!(count_lines(&w.join(format!("scores/{kind}_test.tsv"))), 12);
        assert_eq!(count_lines(&w.join(format!("scores/{kind}_dev.pred.tsv"))), 12);
    }
    let fuse = run(&["fuse"]);
    assert!(fuse.starts_with("bias "), "{fuse}");
    assert!(w.join("models/fusion.txt").exists());
    assert_eq!(count_lines(&w.join("scores/fusion_test.tsv")), 12);

    let table = run(&["eval"]);
    let rows: Vec<&str> = table.lines().map(|l| l.split("  ").next().unwrap()).collect();
    assert_eq!(rows, ["System", "LFCC", "MFCC", "Majority Vote", "Score Fusion"]);
    assert_eq!(fs::read_to_string(w.join("reports/uar.txt")).unwrap(), table);
    // test speakers are blind only when asked to be
    assert!(table.lines().all(|l| !l.ends_with('-')), "{table}");

    // rerunning changes nothing
    let before = fs::read(w.join("scores/fusion_dev.tsv")).unwrap();
    run(&["extract"]);
    run(&["train"]);
    run(&["score"]);
    run(&["fuse"]);
    assert_eq!(run(&["eval"]), table);
    assert_eq!(fs::read(w.join("scores/fusion_dev.tsv")).unwrap(), before);

    // a model trained on features from other settings is refused
    run(&["train", "--feature", "lfcc", "--seed", "3"]);
    run(&["score", "--feature", "lfcc"]);
    fs::write(d.join("run.toml"), format!("{TINY}\n[features]\nn_filters = 48\n")).unwrap();
    let (code, err) = failure(d, &[&cfg[..], &["score", "--feature", "lfcc"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("lfcc.gmm"), "{err}");
}

#[test]
fn fuse_rejects_mismatched_system_sets() {
    let dir = project(TINY);
    let d = dir.path();
    let cfg = ["--config", "run.toml"];
    let run = |extra: &[&str]| ok(d, &[&cfg[..], extra].concat());
    run(&["synth"]);
    run(&["extract"]);
    run(&["train"]);
    run(&["score"]);
    fs::remove_file(d.join("work/scores/mfcc_test.tsv")).unwrap();
    let (code, err) = failure(d, &[&cfg[..], &["fuse"]].concat());
    assert_eq!(code, 2);
    assert!(err.contains("[LFCC]"), "{err}");
}

#[test]
fn eval_on_perfect_predictions_reports_100() {
    let dir = project("systems = [\"lfcc\"]\n[corpus]\nn_speakers = 2\nutts_per_speaker = 2\n");
    let d = dir.path();
    ok(d, &["--config", "run.toml", "synth"]);
    let manifest = fs::read_to_string(d.join("corpus/manifest.tsv")).unwrap();
    let preds: String = manifest
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').collect::<Vec<_>>())
        .filter(|f| f[2] == "dev")
        .map(|f| format!("{}\t{}\n", f[0], f[3]))
        .collect();
    fs::create_dir_all(d.join("work/scores")).unwrap();
    fs::write(d.join("work/scores/lfcc_dev.pred.tsv"), &preds).unwrap();
    fs::write(d.join("work/scores/fusion_dev.pred.tsv"), &preds).unwrap();
    let table = ok(d, &["--config", "run.toml", "eval"]);
    assert_eq!(
        table,
        "System               Dev    Test\n\
         LFCC              100.00       -\n\
         Majority Vote     100.00       -\n\
         Score Fusion      100.00       -\n"
    );
}

#[test]
fn render_writes_both_panels() {
    let dir = project("[corpus]\nn_speakers = 1\nutts_per_speaker = 1\n");
    let d = dir.path();
    ok(d, &["--config", "run.toml", "synth"]);
    let out = ok(
        d,
        &["render", "--input", "corpus/wav/spk00_u000_mask.wav", "--out", "figs"],
    );
    assert_eq!(out.lines().count(), 4);
    for name in ["spectrogram", "pyknogram"] {
        assert!(d.join(format!("figs/spk00_u000_mask_{name}.png")).exists());
        assert!(d.join(format!("figs/spk00_u000_mask_{name}.txt")).exists());
    }
    let (code, _) = failure(d, &["render", "--input", "nope.wav"]);
    assert_eq!(code, 1);
}
