use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use billiard_cli::artifacts::{sha256_hex, Manifest};
use billiard_cli::config::Scenario;
use billiard_cli::error::CliError;
use billiard_cli::figure::Figure;

fn lab(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard-lab"))
        .args(args)
        .env("BILLIARD_LAB_OUT", out_root)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const GUTKIN: &str = r#"schema_version = 1
name = "small"
seed = 5

[[experiment]]
kind = "gutkin"
deltas = [0.4]
samples = 16
table = { kind = "circle", radius = 1.0 }
"#;

#[test]
fn negative_radius_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, GUTKIN.replace("radius = 1.0", "radius = -2.0")).unwrap();
    for verb in ["validate", "run"] {
        let o = lab(&[verb, path.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("experiment[0].table.radius"), "{}", stderr(&o));
    }
    assert!(!dir.path().join("small").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let with_top_level = GUTKIN.replace("seed = 5", "seed = 5\nsede = 6");
    let with_nested = GUTKIN.replace("samples = 16", "samples = 16\nsampels = 3");
    let with_table = GUTKIN.replace("radius = 1.0", "radius = 1.0, centre = [0.0, 0.0]");
    for (text, key) in [(with_top_level, "sede"), (with_nested, "sampels"), (with_table, "centre")] {
        match Scenario::from_toml(&text) {
            Err(e @ CliError::Config { .. }) => {
                assert_eq!(e.exit_code(), 2);
                assert!(e.to_string().contains(key), "{e}");
            }
            other => panic!("{key} accepted: {other:?}"),
        }
    }
}

#[test]
fn wrong_schema_version_is_a_config_error() {
    let e = Scenario::from_toml(&GUTKIN.replace("schema_version = 1", "schema_version = 2")).unwrap_err();
    assert!(matches!(e, CliError::Config { field: Some(ref f), .. } if f == "schema_version"));
}

#[test]
fn numerical_failure_exits_3_and_names_the_operation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested.toml");
    let text = r#"schema_version = 1
name = "not-nested"
seed = 1

[[experiment]]
kind = "string_test"
samples = 50
table = { kind = "circle", radius = 1.0 }
inner = { kind = "circle", radius = 0.5, center = [0.8, 0.0] }
"#;
    fs::write(&path, text).unwrap();
    let o = lab(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("string_defect"), "{}", stderr(&o));
}

#[test]
fn run_writes_a_manifest_matching_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["run", "catacaustic-cusps"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("catacaustic-cusps");
    let manifest: Manifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.scenario, "catacaustic-cusps");
    let paths: Vec<&str> = manifest.artifacts.iter().map(|a| a.path.as_str()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    for name in ["summary.json", "e0-caustic_n1.csv", "e0-caustic_n3.csv", "e0-figure.svg", "e0-figure.json"] {
        assert!(paths.contains(&name), "{name} missing");
    }
    for a in &manifest.artifacts {
        let bytes = fs::read(out.join(&a.path)).unwrap();
        assert_eq!(bytes.len(), a.bytes);
        assert_eq!(sha256_hex(&bytes), a.sha256);
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS catacaustic-cusps"), "{stdout}");
}

#[test]
fn render_produces_the_same_svg_as_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(lab(&["run", "trapezoid-periodic"], dir.path()).status.success());
    let out = dir.path().join("trapezoid-periodic");
    let target = dir.path().join("again.svg");
    let o = lab(&["render", out.join("e0-figure.json").to_str().unwrap(), "--out", target.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(&target).unwrap();
    assert_eq!(svg, fs::read_to_string(out.join("e0-figure.svg")).unwrap());
    assert!(svg.starts_with("<?xml") && svg.contains(r#"version="1.1""#) && svg.trim_end().ends_with("</svg>"));
    let fig: Figure = serde_json::from_str(&fs::read_to_string(out.join("e0-figure.json")).unwrap()).unwrap();
    assert!(fig.layers.len() >= 2);
}

#[test]
fn render_rejects_non_figure_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(lab(&["run", "gutkin-circle"], dir.path()).status.success());
    let o = lab(&["render", dir.path().join("gutkin-circle/summary.json").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unsupported"), "{}", stderr(&o));
}

#[test]
fn list_and_validate_cover_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["list-scenarios"], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.contains(" acceptance ")).count(), 14);
    for line in text.lines() {
        let name = line.split_whitespace().next().unwrap();
        let v = lab(&["validate", name], dir.path());
        assert!(v.status.success(), "{name}: {}", stderr(&v));
    }
    let missing = lab(&["validate", "no-such-scenario"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn exploratory_scenarios_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["stadium-portrait", "outer-random-oval", "circle-map-pencil"] {
        let o = lab(&["run", name], dir.path());
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(dir.path().join(name).join("manifest.json").exists());
    }
}
