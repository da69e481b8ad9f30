mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use aurcase::coverage::coverage_map;
use aurcase::dsl::parse;
use aurcase::report::fill;
use regex::Regex;

use common::{fixture, read_fixture};

fn aurcase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aurcase"))
        .args(args)
        .current_dir(fixture(""))
        .env_remove("AURCASE_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"generated_at\"")).collect::<Vec<_>>().join("\n")
}

fn golden_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn report_matches_golden_files() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let start = Instant::now();
    let o = aurcase(&["report", "golden_cat.aur", "--ledger", "golden.ledger", "--out", dir]);
    assert!(start.elapsed() < Duration::from_secs(2));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["report.txt", "report.json", "heatmap.svg", "trace.txt"] {
        let got = std::fs::read_to_string(out.path().join(name)).unwrap();
        let golden = golden_dir().join(name);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::write(&golden, &got).unwrap();
        }
        let want = std::fs::read_to_string(&golden).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(without_timestamp(&got), without_timestamp(&want), "{name} differs from the golden file");
    }
}

#[test]
fn check_exit_codes() {
    let o = aurcase(&["check", "golden_cat.aur"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 errors, 0 warnings\n");

    let o = aurcase(&["check", "missing_sc1.aur"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let errors: Vec<&str> = text.lines().filter(|l| l.contains(": error[")).collect();
    assert_eq!(errors.len(), 1);
    assert!(Regex::new(r"^missing_sc1\.aur:\d+:\d+: error\[E002\]: ").unwrap().is_match(errors[0]), "{}", errors[0]);

    let o = aurcase(&["check", "corpus/no_criteria.aur"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no acceptance criteria declared"));
}

#[test]
fn usage_and_parse_failures_exit_two() {
    assert_eq!(aurcase(&["lint", "golden_cat.aur"]).status.code(), Some(2));
    let o = aurcase(&["check", "golden_cat.aur", "--colour"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.aur");
    std::fs::write(&broken, "safety_case \"x\" {\n  context {\n").unwrap();
    let o = aurcase(&["check", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("error[E008]"));
}

#[test]
fn coverage_table() {
    let o = aurcase(&["coverage", "golden_cat.aur"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("covered  4/96"));
    assert!(Regex::new(r"role\s+responder\s+4/48").unwrap().is_match(&text));
    assert!(Regex::new(r"role\s+initiator\s+0/48").unwrap().is_match(&text));
}

#[test]
fn trace_table() {
    let o = aurcase(&["trace", "golden_cat.aur"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("H1      AC1,AC2   C1,C2   E1,E2     yes"), "{text}");
}

#[test]
fn heatmap_fills_follow_the_map() {
    let out = tempfile::tempdir().unwrap();
    let rect = Regex::new(r#"fill="(#[0-9a-f]{6})"[^>]*data-cell="([^"]+)""#).unwrap();
    for name in ["golden_cat.aur", "corpus/multi_category.aur", "corpus/no_criteria.aur"] {
        let o = aurcase(&["report", name, "--out", out.path().to_str().unwrap()]);
        assert!(matches!(o.status.code(), Some(0 | 1)));
        let svg = std::fs::read_to_string(out.path().join("heatmap.svg")).unwrap();
        let case = parse(&read_fixture(name), name).case.unwrap();
        let map = coverage_map(&case).unwrap();
        let mut seen = 0;
        for cap in rect.captures_iter(&svg) {
            let cell = aurcase::space::Cell::all().find(|c| c.key() == cap[2]).unwrap();
            assert_eq!(&cap[1], fill(map.signal(&cell)), "{name} {}", &cap[2]);
            seen += 1;
        }
        assert_eq!(seen, 96);
    }
}

#[test]
fn machine_output_is_reproducible_and_structured() {
    let a = aurcase(&["check", "golden_cat.aur", "--format", "machine"]);
    let b = aurcase(&["check", "golden_cat.aur", "--format", "machine"]);
    assert_eq!(without_timestamp(&stdout(&a)), without_timestamp(&stdout(&b)));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["coverage"]["overall"]["numerator"], 4);
    assert_eq!(doc["coverage"]["overall"]["denominator"], 96);

    let dir = tempfile::tempdir().unwrap();
    let thin = dir.path().join("thin.ledger");
    std::fs::write(&thin, read_fixture("golden.ledger").replace("1000000", "100000")).unwrap();
    let o = aurcase(&["review", "golden_cat.aur", "--ledger", thin.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["review"]["status"], "blocked");
    assert!(!doc["review"]["blockers"].as_array().unwrap().is_empty());
}

#[test]
fn config_from_flag_and_environment() {
    let o = aurcase(&["check", "golden_cat.aur", "--config", "strict.conf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = aurcase(&["check", "golden_cat.aur", "--coverage-threshold", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning[W106]"));
    let o = Command::new(env!("CARGO_BIN_EXE_aurcase"))
        .args(["check", "golden_cat.aur"])
        .current_dir(fixture(""))
        .env("AURCASE_CONFIG", "strict.conf")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = read_fixture("golden_cat.aur").replace("deployment_scale = \"up to 500 vehicles\"", "deployment_scale = \"\"");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blank.aur");
    std::fs::write(&path, text).unwrap();
    let o = aurcase(&["check", path.to_str().unwrap(), "--review-ready"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error[E011]"));
}

#[test]
fn fmt_prints_canonical_text() {
    let o = aurcase(&["fmt", "golden_cat.aur"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read_fixture("golden_cat.aur"));
}
