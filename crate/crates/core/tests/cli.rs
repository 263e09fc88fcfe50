use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kandinsky::dataset::{write_dataset, Dataset, DatasetRecord, Label};
use kandinsky::dsl::{EvalContext, Statement};
use kandinsky::model::UniverseConfig;
use kandinsky::render::RenderStyle;
use kandinsky::sampler::{generate_positives, Pattern, SamplerConfig};
use serde_json::Value;

fn kandinsky(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kandinsky"));
    cmd.args(args).env_remove("KANDINSKY_SEED").env_remove("KANDINSKY_OUT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_writes_dataset_and_resolved_config() {
    let d = tempfile::tempdir().unwrap();
    let stmt = write(d.path(), "red.txt", "EXISTS a IN objects : a.color = red\n");
    let cfg = write(d.path(), "run.toml", "[generate]\nn_true = 9\nn_false = 4\nn_cf = 2\n\n[universe]\nn_max = 6\n");
    let out = p(d.path(), "ds");
    let o = kandinsky(&["generate", "--config", &cfg, "--statement", &stmt, "--n-true", "5", "--out", &out], &[("KANDINSKY_SEED", "17")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout_json(&o);
    assert_eq!(summary["by_label"]["true"], 5);
    assert_eq!(summary["by_label"]["false"], 4);
    assert_eq!(summary["by_label"]["counterfactual"], 2);
    assert_eq!(summary["positives"]["seed"], 17);

    let resolved = fs::read_to_string(Path::new(&out).join("run_config.toml")).unwrap();
    assert!(resolved.contains("n_true = 5"));
    assert!(resolved.contains("n_max = 6"));
    assert!(resolved.contains("seed = 17"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_true = 5"), "config is echoed to the log");
    for folder in ["true", "false", "counterfactual"] {
        assert!(Path::new(&out).join(folder).is_dir());
    }
    let manifest = fs::read_to_string(Path::new(&out).join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 11);
    let first: Value = serde_json::from_str(manifest.lines().next().unwrap()).unwrap();
    let keys: BTreeSet<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, BTreeSet::from(["id", "label", "statement_id", "seed", "objects", "image_path"]));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let stmt = write(d.path(), "s.txt", "COUNT(objects) <= 3");
    let out = p(d.path(), "from-env");
    let o = kandinsky(
        &["generate", "--statement", &stmt, "--n-true", "2", "--n-false", "2", "--n-cf", "1"],
        &[("KANDINSKY_OUT", &out), ("KANDINSKY_SEED", "3")],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&out).join("manifest.jsonl").is_file());
}

#[test]
fn statement_files_with_several_entries_need_an_id() {
    let d = tempfile::tempdir().unwrap();
    let stmt = write(d.path(), "many.txt", "few: COUNT(objects) <= 3\nmany: COUNT(objects) >= 5\n");
    let out = p(d.path(), "ds");
    let o = kandinsky(&["generate", "--statement", &stmt, "--out", &out], &[]);
    assert_eq!(code(&o), 3);
    let o = kandinsky(
        &["generate", "--statement", &stmt, "--statement-id", "many", "--n-true", "3", "--n-false", "3", "--n-cf", "0", "--out", &out],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ds: Value = serde_json::from_str(&fs::read_to_string(Path::new(&out).join("dataset.json")).unwrap()).unwrap();
    assert_eq!(ds["statements"]["many"], "COUNT(objects) >= 5");
}

#[test]
fn exit_codes_are_stable() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path(), "o");
    let bad = write(d.path(), "bad.txt", "EXISTS a IN objects : a.color = green");
    let never = write(d.path(), "never.txt", "COUNT(objects) = 0");
    let always = write(d.path(), "always.txt", "COUNT(objects) >= 0");
    let any = write(d.path(), "any.txt", "COUNT(objects) >= 1");
    let crowded = write(d.path(), "crowded.toml", "[universe]\nn_min = 40\nn_max = 40\nsize_min = 0.3\nsize_max = 0.3\n");
    let typo = write(d.path(), "typo.toml", "[universe]\nn_maxx = 4\n");
    let file = write(d.path(), "plain-file", "");
    let under_file = format!("{file}/sub");
    let missing = p(d.path(), "missing.txt");

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["generate", "--bogus"], 2),
        (vec!["generate", "--config", &typo, "--statement", &any, "--out", &out], 2),
        (vec!["generate", "--statement", &bad, "--out", &out], 3),
        (vec!["generate", "--statement", &never, "--out", &out], 4),
        (vec!["generate", "--config", &crowded, "--statement", &any, "--out", &out], 5),
        (vec!["generate", "--statement", &any, "--n-true", "1", "--n-false", "0", "--n-cf", "0", "--out", &under_file], 6),
        (vec!["challenge", "challenge-2", "--out", &out], 9),
        (vec!["generate", "--statement", &always, "--n-true", "2", "--n-false", "0", "--n-cf", "1", "--out", &out], 11),
        (vec!["generate", "--statement", &missing, "--out", &out], 6),
        (vec!["challenge", "challenge-9", "--out", &out], 2),
    ];
    for (args, want) in cases {
        let o = kandinsky(&args, &[]);
        assert_eq!(code(&o), want, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        if want != 0 {
            assert!(!o.stderr.is_empty(), "{args:?} explains itself on stderr");
        }
    }
}

#[test]
fn evaluate_reports_confusion_and_detects_tampering() {
    let d = tempfile::tempdir().unwrap();
    let stmt = write(d.path(), "s.txt", "COUNT(objects WHERE shape = square) = 1");
    let hyp = write(d.path(), "h.txt", "(COUNT(objects WHERE shape = square) = 1) AND (COUNT(objects) <= 5)");
    let out = p(d.path(), "ds");
    let o = kandinsky(&["generate", "--statement", &stmt, "--n-true", "20", "--n-false", "20", "--n-cf", "5", "--out", &out], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = kandinsky(&["evaluate", "--dataset", &out, "--statement-id", "s"], &[]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["agreement"], 45);
    assert_eq!(r["confusion"]["true"]["true"], 20);
    assert_eq!(r["confusion"]["counterfactual"]["false"], 5);

    let o = kandinsky(&["evaluate", "--dataset", &out, "--statement", &hyp], &[]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["confusion"]["false"]["true"], 0, "the hypothesis implies the ground truth");

    let o = kandinsky(&["evaluate", "--dataset", &out, "--statement-id", "nope"], &[]);
    assert_eq!(code(&o), 10);

    let manifest = Path::new(&out).join("manifest.jsonl");
    let text = fs::read_to_string(&manifest).unwrap().replacen("\"label\":\"true\"", "\"label\":\"false\"", 1);
    fs::write(&manifest, text).unwrap();
    let o = kandinsky(&["evaluate", "--dataset", &out, "--statement-id", "s"], &[]);
    assert_eq!(code(&o), 7);
}

#[test]
fn empty_dataset_evaluates_to_zero_counts() {
    let d = tempfile::tempdir().unwrap();
    let stmt = write(d.path(), "s.txt", "COUNT(objects) >= 2");
    let out = p(d.path(), "empty");
    let o = kandinsky(&["generate", "--statement", &stmt, "--n-true", "0", "--n-false", "0", "--n-cf", "0", "--out", &out], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = kandinsky(&["evaluate", "--dataset", &out, "--statement-id", "s"], &[]);
    assert_eq!(code(&o), 0);
    let r = stdout_json(&o);
    assert_eq!(r["records"], 0);
    assert_eq!(r["confusion"]["true"]["true"], 0);
}

#[test]
fn challenges_generate_their_own_universes() {
    let d = tempfile::tempdir().unwrap();
    for id in ["definitions-example", "challenge-1"] {
        let out = p(d.path(), id);
        let o = kandinsky(&["challenge", id, "--n-true", "5", "--n-false", "5", "--n-cf", "2", "--out", &out], &[]);
        assert_eq!(code(&o), 0, "{id}: {}", String::from_utf8_lossy(&o.stderr));
        let o = kandinsky(&["evaluate", "--dataset", &out, "--statement-id", if id == "challenge-1" { "all-small" } else { "h2" }], &[]);
        assert_eq!(code(&o), 0, "{id}");
    }
    let c1 = fs::read_to_string(d.path().join("challenge-1").join("manifest.jsonl")).unwrap();
    let first: Value = serde_json::from_str(c1.lines().next().unwrap()).unwrap();
    assert!(first["latent"]["regions"].as_array().is_some_and(|r| !r.is_empty()));

    let gt = write(d.path(), "mirror.txt", "SYMMETRIC(objects)");
    let out = p(d.path(), "c2");
    let o = kandinsky(&["challenge", "2", "--statement", &gt, "--n-true", "4", "--n-false", "4", "--n-cf", "1", "--out", &out], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let toml = fs::read_to_string(Path::new(&out).join("run_config.toml")).unwrap();
    assert!(toml.contains("challenge = \"challenge-2\""));
}

#[test]
fn split_writes_disjoint_id_lists() {
    let d = tempfile::tempdir().unwrap();
    let u = UniverseConfig { n_max: 8, ..UniverseConfig::default() };
    let texts = [
        ("s0", "(COUNT(objects WHERE color = red) >= 1) AND (COUNT(objects WHERE shape = circle) >= 1)"),
        ("s1", "(COUNT(objects WHERE color = red) >= 1) AND (COUNT(objects WHERE shape = square) >= 1)"),
        ("s2", "(COUNT(objects WHERE color = blue) >= 1) AND (COUNT(objects WHERE shape = circle) >= 1)"),
        ("s3", "(COUNT(objects WHERE color = blue) >= 1) AND (COUNT(objects WHERE shape = square) >= 1)"),
    ];
    let mut records = Vec::new();
    let mut statements = BTreeMap::new();
    for (k, (id, text)) in texts.iter().enumerate() {
        let pat = Pattern::new(*id, text, u.clone()).unwrap();
        let g = generate_positives(&pat, 10, k as u64, &SamplerConfig::default(), None).unwrap();
        records.extend(g.figures.iter().enumerate().map(|(i, f)| DatasetRecord::new(id, Label::True, i, 0, f)));
        statements.insert(id.to_string(), Statement::parse(text).unwrap().source().to_string());
    }
    let ds = Dataset { statements, context: EvalContext::for_universe(&u), records, edits: Vec::new() };
    let dir = d.path().join("ds");
    write_dataset(&ds, &dir, &RenderStyle::default()).unwrap();
    let dir = dir.to_str().unwrap();
    let metrics_dir = p(d.path(), "split");

    let o = kandinsky(&["split", "--dataset", dir, "--out", &metrics_dir, "--max-atom-div", "0.2"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let read = |name: &str| -> BTreeSet<String> {
        fs::read_to_string(Path::new(&metrics_dir).join(name)).unwrap().lines().map(String::from).collect()
    };
    let (train, test) = (read("train.txt"), read("test.txt"));
    assert_eq!(train.len() + test.len(), 40);
    assert!(train.is_disjoint(&test));
    let m: Value = serde_json::from_str(&fs::read_to_string(Path::new(&metrics_dir).join("split_metrics.json")).unwrap()).unwrap();
    assert!(m["compound_divergence"].as_f64().unwrap() > 0.5);

    let again = p(d.path(), "split-again");
    let o = kandinsky(&["split", "--dataset", dir, "--out", &again, "--max-atom-div", "0.2"], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(Path::new(&again).join("train.txt")).unwrap(), fs::read(Path::new(&metrics_dir).join("train.txt")).unwrap());

    let o = kandinsky(&["split", "--dataset", dir, "--alpha-atoms", "1.5"], &[]);
    assert_eq!(code(&o), 2);

    // One statement class cannot be split by compounds.
    let single = p(d.path(), "single");
    let stmt = write(d.path(), "one.txt", "COUNT(objects) >= 2");
    assert_eq!(code(&kandinsky(&["generate", "--statement", &stmt, "--n-true", "10", "--n-false", "5", "--n-cf", "0", "--out", &single], &[])), 0);
    let o = kandinsky(&["split", "--dataset", &single], &[]);
    assert_eq!(code(&o), 8);
}

#[test]
fn render_validates_before_drawing() {
    let d = tempfile::tempdir().unwrap();
    let good = write(
        d.path(),
        "good.json",
        r#"{"objects":[{"shape":"circle","color":"red","size":0.2,"x":0.5,"y":0.5}]}"#,
    );
    let svg = p(d.path(), "out/good.svg");
    let o = kandinsky(&["render", "--figure", &good, "--out", &svg, "--px", "100"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&svg).unwrap().contains(r#"<circle cx="50.000" cy="50.000" r="10.000""#));

    let overlap = write(
        d.path(),
        "overlap.json",
        r#"{"objects":[{"shape":"circle","color":"red","size":0.2,"x":0.5,"y":0.5},{"shape":"square","color":"blue","size":0.2,"x":0.55,"y":0.5}]}"#,
    );
    let o = kandinsky(&["render", "--figure", &overlap, "--out", &p(d.path(), "bad.svg")], &[]);
    assert_eq!(code(&o), 12);
    let garbage = write(d.path(), "garbage.json", "{\"objects\": 3}");
    assert_eq!(code(&kandinsky(&["render", "--figure", &garbage, "--out", &p(d.path(), "g.svg")], &[])), 12);
}

#[test]
fn print_config_shows_merged_values() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[split]\nmax_atom_div = 0.05\n");
    let o = kandinsky(&["print-config", "--config", &cfg], &[]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("max_atom_div = 0.05"));
    assert!(text.contains("n_true = 100"));
    assert!(text.contains("[universe]"));
}
