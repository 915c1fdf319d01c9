use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use boxology::corpus::{corpus_file, CORPUS, MUTATIONS};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> PathBuf {
    root().join("corpus").join(name)
}

fn config(name: &str) -> PathBuf {
    root().join("configs").join(name)
}

fn boxc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxc"))
        .args(args)
        .env("BOXC_NO_COLOR", "1")
        .output()
        .expect("boxc runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_passes_on_corpus_silently() {
    for f in &CORPUS {
        let out = boxc(&["check", path_str(&corpus(f.file_name))]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", f.file_name, stdout(&out));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn check_reports_findings_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = MUTATIONS.iter().find(|m| m.expected == boxology::Code::E004).unwrap();
    let path = dir.path().join("bad.bxl");
    fs::write(&path, m.apply(corpus_file(m.file_name).unwrap().source).unwrap()).unwrap();

    let out = boxc(&["check", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let line = text.lines().next().unwrap();
    let prefix = format!("{}:", path.display());
    assert!(line.starts_with(&prefix), "{line}");
    assert!(line.contains(": error[E004]: "), "{line}");
    assert!(!text.contains('\x1b'));

    let out = boxc(&["check", path_str(&path), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["code", "severity", "message", "file", "line", "column"] {
            assert!(v.get(key).is_some(), "{key} missing in {line}");
        }
        assert_eq!(v["code"], "E004");
    }
}

#[test]
fn strict_promotes_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lonely.bxl");
    fs::write(&path, "diagram \"lonely\" {\n    instance d : data\n}\n").unwrap();
    let out = boxc(&["check", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("warning[W001]"));
    let out = boxc(&["check", path_str(&path), "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("error[W001]"));
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.bxl");
    fs::write(&path, "diagram \"x\" {\n    instance d data\n").unwrap();
    let out = boxc(&["check", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("error[P001]"));
    assert!(stdout(&out).contains("error[P002]"));
    let out = boxc(&["fmt", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("P001"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec!["check"],
        vec!["check", "x.bxl", "--bogus"],
        vec!["check", "/nonexistent/file.bxl"],
        vec!["detect", path_str(&corpus("fig2_ml_pipeline.bxl")), "--pattern", "no-such"],
        vec!["expand", "--pattern", "1a-train", "--prefix", "not an id"],
        vec!["sim", "contract-net", "--config", path_str(&config("contract_net.json")), "--trace", "t.jsonl"],
    ] {
        let out = boxc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!stderr(&out).is_empty(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = boxc(&["frobnicate"]);
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn fmt_prints_canonical_text_and_only_writes_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("messy.bxl");
    let messy = "diagram \"m\" { process p : infer  instance d : data\r\n d -> p }";
    fs::write(&path, messy).unwrap();

    let out = boxc(&["fmt", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let expected = "diagram \"m\" {\n    instance d : data\n    process p : infer\n\n    d -> p\n}\n";
    assert_eq!(stdout(&out), expected);
    assert_eq!(fs::read_to_string(&path).unwrap(), messy);

    let out = boxc(&["fmt", path_str(&path), "--write"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), expected);

    for f in &CORPUS {
        assert_eq!(stdout(&boxc(&["fmt", path_str(&corpus(f.file_name))])), f.source);
    }
}

#[test]
fn render_writes_golden_dot() {
    let dir = tempfile::tempdir().unwrap();
    let golden = root().join("crates/core/tests/golden");
    for f in &CORPUS {
        let out_path = dir.path().join("out.dot");
        let out = boxc(&["render", path_str(&corpus(f.file_name)), "-o", path_str(&out_path)]);
        assert_eq!(out.status.code(), Some(0));
        let expected = fs::read_to_string(golden.join(f.file_name.replace(".bxl", ".dot"))).unwrap();
        assert_eq!(fs::read_to_string(&out_path).unwrap(), expected, "{}", f.file_name);
    }
    let out = boxc(&[
        "render",
        path_str(&corpus("fig3_mobile_learning.bxl")),
        "--no-pattern-frames",
        "--rankdir",
        "TB",
    ]);
    let expected = fs::read_to_string(golden.join("fig3_mobile_learning.no-patterns.tb.dot")).unwrap();
    assert_eq!(stdout(&out), expected);
    let out = boxc(&["render", path_str(&corpus("fig5_bdi.bxl")), "--no-zoom-frames"]);
    assert!(!stdout(&out).contains("cluster_zoom"));
}

#[test]
fn detect_lists_matches() {
    let fig2 = corpus("fig2_ml_pipeline.bxl");
    let out = boxc(&["detect", path_str(&fig2), "--pattern", "1a-train", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["pattern"], "1a-train");
    assert_eq!(v["binding"]["data"], "training_data");
    assert_eq!(v["binding"]["gen"], "train");
    assert_eq!(v["binding"]["model"], "classifier");

    let out = boxc(&["detect", path_str(&fig2)]);
    let names: Vec<String> = stdout(&out).lines().map(|l| l.split(':').next().unwrap().to_string()).collect();
    assert_eq!(names, ["1a-train", "2a-apply", "3a-pipeline"]);
}

#[test]
fn expand_emits_a_clean_detectable_fragment() {
    let dir = tempfile::tempdir().unwrap();
    for p in boxology::patterns::builtin_patterns() {
        let path = dir.path().join("fragment.bxl");
        let out = boxc(&["expand", "--pattern", &p.name, "--prefix", "demo", "-o", path_str(&path)]);
        assert_eq!(out.status.code(), Some(0), "{}", p.name);
        assert_eq!(boxc(&["check", path_str(&path), "--strict"]).status.code(), Some(0), "{}", p.name);
        let found = stdout(&boxc(&["detect", path_str(&path), "--pattern", &p.name]));
        assert_eq!(found.lines().count(), 1, "{}", p.name);
    }
    let printed = stdout(&boxc(&["expand", "--pattern", "1a-train", "--prefix", "x"]));
    assert!(printed.starts_with("diagram \"1a-train x\" {"));
}

#[test]
fn sim_runs_every_kind_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, cfg) in [
        ("contract-net", "contract_net.json"),
        ("planning", "planning.json"),
        ("federated", "federated.json"),
        ("bdi", "bdi.json"),
    ] {
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        let cfg = config(cfg);
        let run = |p: &Path| boxc(&["sim", kind, "--config", path_str(&cfg), "--seed", "7", "--trace", path_str(p), "--check"]);
        let (ra, rb) = (run(&a), run(&b));
        assert_eq!(ra.status.code(), Some(0), "{kind}: {}", stderr(&ra));
        assert_eq!(ra.stdout, rb.stdout);
        let ta = fs::read(&a).unwrap();
        assert_eq!(ta, fs::read(&b).unwrap(), "{kind}");
        for line in String::from_utf8(ta).unwrap().lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }
    }
}

#[test]
fn sim_seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let with_seed = dir.path().join("seeded.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(config("bdi.json")).unwrap()).unwrap();
    cfg["seed"] = 12345.into();
    fs::write(&with_seed, cfg.to_string()).unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    boxc(&["sim", "bdi", "--config", path_str(&config("bdi.json")), "--seed", "3", "--trace", path_str(&a)]);
    boxc(&["sim", "bdi", "--config", path_str(&with_seed), "--seed", "3", "--trace", path_str(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.jsonl");
    boxc(&["sim", "bdi", "--config", path_str(&config("bdi.json")), "--seed", "4", "--trace", path_str(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn sim_bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"participants": [], "deadline_ticks": 2}"#).unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = boxc(&["sim", "contract-net", "--config", path_str(&cfg), "--seed", "1", "--trace", path_str(&trace)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("participant"));
}

#[test]
fn sim_bind_attaches_diagram_refs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = boxc(&[
        "sim",
        "contract-net",
        "--config",
        path_str(&config("contract_net.json")),
        "--seed",
        "1",
        "--trace",
        path_str(&trace),
        "--bind",
        path_str(&corpus("fig6_contractnet.bxl")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&trace).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["diagram_ref"], v["sender"], "{line}");
    }
}
