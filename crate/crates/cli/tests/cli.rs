//! Command-line behavior: exit codes, usage errors, and the per-command
//! contracts that don't need a trained model.

use std::path::Path;
use std::process::{Command, Output};

fn tqe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tqe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn write_ten_pair_corpus(dir: &Path) {
    let mut out = String::from("id\tlp\tsrc\tmt\tref\tscore\n");
    for i in 0..10 {
        out.push_str(&format!(
            "p{i}\tde-en\tquelle {i} eins zwei\tplatzhalter\ttarget {i} one two\t\n"
        ));
    }
    std::fs::write(dir.join("parallel.tsv"), out).unwrap();
}

#[test]
fn help_exits_zero_and_unknown_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let help = tqe(dir.path(), &["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("synth"));

    let unknown = tqe(dir.path(), &["synth", "--bogus-flag", "x", "--seed", "1"]);
    assert_eq!(code(&unknown), 1);
    assert!(stderr(&unknown).to_lowercase().contains("usage"), "{}", stderr(&unknown));

    let unknown_cmd = tqe(dir.path(), &["frobnicate"]);
    assert_eq!(code(&unknown_cmd), 1);
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_ten_pair_corpus(dir.path());
    let out = tqe(
        dir.path(),
        &["synth", "--in", "parallel.tsv", "--out", "synth.tsv"],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("seed"), "{}", stderr(&out));
}

#[test]
fn malformed_input_is_a_data_error_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.tsv"),
        "id\tlp\tsrc\tmt\tref\tscore\na\tde-en\ts\th\t0.5\n",
    )
    .unwrap();
    let out = tqe(
        dir.path(),
        &["synth", "--seed", "1", "--in", "bad.tsv", "--out", "x.tsv"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn degenerate_evaluation_is_a_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gold.tsv"),
        "id\tlp\tsrc\tmt\tref\tscore\na\tde-en\ts\th\t\t1\nb\tde-en\ts\th\t\t2\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("preds.tsv"), "id\tscore\na\t0.5\nb\t0.5\n").unwrap();
    let out = tqe(
        dir.path(),
        &[
            "evaluate", "--seed", "1", "--in", "gold.tsv", "--preds", "preds.tsv", "--out",
            "report.tsv",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("constant"), "{}", stderr(&out));
}

#[test]
fn synth_maps_ten_pairs_to_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_ten_pair_corpus(dir.path());
    let out = tqe(
        dir.path(),
        &["synth", "--seed", "7", "--in", "parallel.tsv", "--out", "synth.tsv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("synth.tsv")).unwrap();
    assert_eq!(text.lines().count(), 11); // header + 10 rows
    let manifest = stdout(&out);
    assert!(manifest.contains("run: command=synth seed=7"), "{manifest}");
    assert!(manifest.contains("sha256="), "{manifest}");
    assert!(manifest.contains("output: synth.tsv"), "{manifest}");
}

#[test]
fn evaluate_pooled_writes_one_entry() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gold.tsv"),
        "id\tlp\tsrc\tmt\tref\tscore\n\
         a\tde-en\ts\th\t\t1\nb\tde-en\ts\th\t\t2\nc\tzh-en\ts\th\t\t3\nd\tzh-en\ts\th\t\t4\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("preds.tsv"),
        "id\tscore\na\t0.1\nb\t0.4\nc\t0.2\nd\t0.9\n",
    )
    .unwrap();
    let out = tqe(
        dir.path(),
        &[
            "evaluate", "--seed", "1", "--in", "gold.tsv", "--preds", "preds.tsv", "--mode",
            "pooled", "--out", "report.tsv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.tsv")).unwrap();
    assert_eq!(report.lines().count(), 2); // header + pooled row
    assert!(report.lines().nth(1).unwrap().starts_with("pooled\t4\t"));

    // JSON output by extension.
    let out = tqe(
        dir.path(),
        &[
            "evaluate", "--seed", "1", "--in", "gold.tsv", "--preds", "preds.tsv", "--mode",
            "per_lp", "--out", "report.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"kendall_b\""));
}

#[test]
fn commands_do_not_mutate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write_ten_pair_corpus(dir.path());
    let before = std::fs::read(dir.path().join("parallel.tsv")).unwrap();
    let out = tqe(
        dir.path(),
        &["synth", "--seed", "7", "--in", "parallel.tsv", "--out", "synth.tsv"],
    );
    assert_eq!(code(&out), 0);
    let after = std::fs::read(dir.path().join("parallel.tsv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn set_overrides_reach_the_command() {
    let dir = tempfile::tempdir().unwrap();
    write_ten_pair_corpus(dir.path());
    // Degenerate drop probabilities echo the reference exactly.
    let out = tqe(
        dir.path(),
        &[
            "synth", "--seed", "7", "--in", "parallel.tsv", "--out", "synth.tsv", "--set",
            "degrade.word_drop_prob=0.0", "--set", "degrade.span_drop_prob=0.0",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("synth.tsv")).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols[3], cols[4], "hyp should equal ref when nothing drops");
    }
}

#[test]
fn split_writes_three_disjoint_parts() {
    let dir = tempfile::tempdir().unwrap();
    write_ten_pair_corpus(dir.path());
    let out = tqe(
        dir.path(),
        &["split", "--seed", "3", "--in", "parallel.tsv", "--out-dir", "parts"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut total = 0;
    for name in ["part-ref.tsv", "part-src.tsv", "part-srcref.tsv"] {
        let text = std::fs::read_to_string(dir.path().join("parts").join(name)).unwrap();
        total += text.lines().count() - 1;
    }
    assert_eq!(total, 10);
}
