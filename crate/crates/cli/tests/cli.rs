use std::path::PathBuf;
use std::process::{Command, Output};

use loopcase::report::{NodeDto, ReportDto};

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "loop"))
        .collect();
    files.sort();
    files
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.loop"))
}

fn loopcase(args: &[&str], files: &[PathBuf]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopcase")).arg("analyze").args(files).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn statuses(n: &NodeDto, out: &mut Vec<String>) {
    out.push(n.status.clone());
    n.children.iter().for_each(|c| statuses(c, out));
}

#[test]
fn loop_a_text_report() {
    let o = loopcase(&[], &[example("loop_a")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("overall: TERMINATING\n"));
}

#[test]
fn loop_b_json_report() {
    let o = loopcase(&["--format", "json"], &[example("loop_b")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let r: ReportDto = serde_json::from_str(&text).unwrap();
    assert_eq!(r.spec_name, "loop_b");
    assert_eq!(r.overall, "POSSIBLY_TERMINATING");
    let nt = r.root.children.iter().find(|c| c.status == "NON_TERMINATING").unwrap();
    assert!(nt.pre.contains("y <= 0"), "{}", nt.pre);
    // schema order and round trip
    let keys = ["\"spec_name\"", "\"overall\"", "\"stats\"", "\"root\""];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
}

#[test]
fn text_and_json_agree() {
    for f in corpus() {
        let text = stdout(&loopcase(&[], std::slice::from_ref(&f)));
        let json: ReportDto = serde_json::from_str(&stdout(&loopcase(&["--format", "json"], &[f]))).unwrap();
        let mut want = Vec::new();
        statuses(&json.root, &mut want);
        let got: Vec<String> = text
            .lines()
            .filter(|l| l.trim_start().starts_with('['))
            .map(|l| l.split("] ").nth(1).unwrap().split([' ', ',']).next().unwrap().to_string())
            .collect();
        assert_eq!(got, want);
        assert!(text.ends_with(&format!("overall: {}\n", json.overall)));
    }
}

#[test]
fn validate_passes_on_corpus() {
    let o = loopcase(&["--validate"], &corpus());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("validation: 0 contradictions").count(), corpus().len());
}

#[test]
fn output_is_deterministic() {
    let a = loopcase(&["--format", "json"], &corpus());
    let b = loopcase(&["--format", "json"], &corpus());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_file_is_exit_1() {
    let o = loopcase(&[], &[PathBuf::from("missing.loop")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.loop"));
}

#[test]
fn parse_error_carries_position() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bad.loop");
    std::fs::write(&path, "vars x;\nwhile x >= z { x := 1; }\n").unwrap();
    let o = loopcase(&[], &[path.clone(), example("countdown")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!("{}:2:12:", path.display())), "{}", stderr(&o));
    // the other file is still analyzed
    assert!(stdout(&o).contains("spec: countdown"));
}

#[test]
fn usage_errors_are_exit_1() {
    let bin = env!("CARGO_BIN_EXE_loopcase");
    for args in [&["analyze"][..], &["analyze", "x.loop", "--format", "xml"], &["frobnicate"], &["analyze", "x.loop", "--max-support", "0"]] {
        let o = Command::new(bin).args(args).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    let o = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn semantics_override() {
    let o = loopcase(&["--semantics", "rat"], &[example("loop_a")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("overall: TERMINATING\n"));
}

#[test]
fn depth_flag_limits_tree() {
    let o = loopcase(&["--max-depth", "0"], &[example("loop_a")]);
    assert!(stdout(&o).ends_with("overall: UNKNOWN\n"));
}
