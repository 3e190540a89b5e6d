use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(rel)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_tanglecheck"))
        .args(args)
        .env_remove("TANGLE_SEED")
        .output()
        .expect("binary runs");
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert_eq!(report["schema_version"], 1);
    (out.status.code().expect("exit code"), report)
}

fn names(v: &Value) -> Vec<&str> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect()
}

#[test]
fn check_diamond_on_f1() {
    let f1 = asset("frames/f1.json");
    let (code, r) = run(&["check", "--frame", f1.to_str().unwrap(), "--formula", "<d>p"]);
    assert_eq!(code, 0);
    assert_eq!(r["command"], "check");
    assert_eq!(names(&r["truth_set"]), ["a", "b"]);
}

#[test]
fn check_at_failing_world_exits_one() {
    let f2 = asset("frames/f2.json");
    let (code, r) = run(&["check", "--frame", f2.to_str().unwrap(), "--formula", "<d>T", "--world", "o"]);
    assert_eq!(code, 1);
    assert_eq!(r["holds"], false);
}

#[test]
fn empty_tangle_is_a_syntax_error() {
    let (code, r) = run(&["parse", "--formula", "<t>{}"]);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
}

#[test]
fn malformed_frame_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"worlds\": [\"a\"],\n  \"rel\": [[\"a\", \"zz\"]],\n").unwrap();
    let (code, r) = run(&["check", "--frame", path.to_str().unwrap(), "--formula", "p"]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("line"));
}

#[test]
fn search_countermodel_round_trips_through_check() {
    let formula = "<t>{O p} -> O <t>{p}";
    let (code, r) = run(&["search", "--logic", "K4C", "--formula", formula, "--max-worlds", "3"]);
    assert_eq!(code, 1);
    assert_eq!(r["verdict"], "countermodel");
    let world = r["world"].as_str().unwrap().to_string();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cm.json");
    std::fs::write(&path, serde_json::to_string(&r["countermodel"]).unwrap()).unwrap();
    let (code, c) = run(&["check", "--frame", path.to_str().unwrap(), "--formula", formula, "--world", &world]);
    assert_eq!(code, 1);
    assert_eq!(c["holds"], false);
    assert!(!names(&c["truth_set"]).contains(&world.as_str()));
}

#[test]
fn search_finds_nothing_for_valid_formula() {
    let (code, r) = run(&["search", "--logic", "K4C", "--formula", "<d><d>p -> <d>p", "--max-worlds", "3"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "none-within-bounds");
}

#[test]
fn seed_is_echoed_and_runs_are_deterministic() {
    let args = ["--seed", "17", "axioms", "--logic", "K4DI", "--trials", "10"];
    let (code, a) = run(&args);
    let (_, b) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(a["seed"], 17);
    assert_eq!(a, b);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_tanglecheck"))
        .args(["parse", "--formula", "p"])
        .env("TANGLE_SEED", "5")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 5);
}

#[test]
fn extra_ctan_schema_is_refuted() {
    let (code, r) = run(&["axioms", "--logic", "K4C", "--trials", "50", "--extra-schema", "CTan"]);
    assert_eq!(code, 1);
    assert!(!r["violations"].as_array().unwrap().is_empty());
}

#[test]
fn shipped_stories_validate() {
    for name in ["two_level.json", "figure_k4d.json", "immersive.json"] {
        let story = asset("stories").join(name);
        let (code, r) = run(&["story-validate", "--story", story.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(r["valid"], true);
    }
    let story = asset("stories/figure_k4d.json");
    let (_, r) = run(&["story-class", "--story", story.to_str().unwrap()]);
    assert_eq!(r["class"]["k4dc"], true);
}

#[test]
fn broken_story_names_condition() {
    let text = std::fs::read_to_string(asset("stories/two_level.json")).unwrap();
    let mut story: Value = serde_json::from_str(&text).unwrap();
    story["maps"][0]["r"] = Value::from("s");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, story.to_string()).unwrap();
    let (code, r) = run(&["story-validate", "--story", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["valid"], false);
    assert!(r["condition"].is_string());
}

#[test]
fn oplus_duplicates_reflexive_worlds() {
    let f1 = asset("frames/f1.json");
    let (code, r) = run(&["oplus", "--frame", f1.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(names(&r["frame"]["worlds"]), ["a#0", "b#0", "b#1"]);
    assert_eq!(r["projection"]["b#1"], "b");
}

#[test]
fn pathspace_verify_story_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("paths.txt");
    let story = asset("stories/two_level.json");
    let (code, r) = run(&[
        "pathspace-verify",
        "--story",
        story.to_str().unwrap(),
        "--oplus",
        "--resolution",
        "3",
        "--dump-paths",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(r["report"]["violations"].as_array().unwrap().is_empty());
    let lines = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(lines.lines().count() as u64, r["report"]["paths"].as_u64().unwrap());
}

#[test]
fn pathspace_verify_single_moment() {
    let f1 = asset("frames/f1.json");
    let f1 = f1.to_str().unwrap();
    let (code, _) = run(&["pathspace-verify", "--frame", f1, "--root", "a", "--resolution", "4"]);
    assert_eq!(code, 2);
    let (code, r) = run(&["pathspace-verify", "--frame", f1, "--root", "a", "--resolution", "4", "--oplus"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["preconditions"]["reflexive_clusters_at_least_two"], true);
}
