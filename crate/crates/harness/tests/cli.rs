use std::process::{Command, Output};

fn agkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agkit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn group_info_reports_order() {
    let o = agkit(&["group", "info", "symmetric(3)", "--elements"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("order"), "{s}");
    assert!(s.contains('6'), "{s}");
}

#[test]
fn verify_prints_csv_and_exits_zero() {
    let o = agkit(&[
        "verify",
        "ruzsa-axioms",
        "--group",
        "dihedral(5)",
        "--instances",
        "6",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("suite,group,instance,label,operation,inequality,lhs,rhs,class,holds,measured\n"));
    assert!(s.lines().count() > 6);
}

#[test]
fn bsg_worked_instance_trace() {
    let o = agkit(&[
        "bsg",
        "run",
        "--group",
        "cyclic(16)",
        "--a",
        "geometric_progression(base=1,len=4)",
        "--infer-k",
        "--trace",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("|A'''B'''|"), "{s}");
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(agkit(&["group", "info", "nonsense(3)"]).status.code(), Some(2));
    assert_eq!(agkit(&["verify", "no-such-suite", "--group", "cyclic(4)"]).status.code(), Some(2));
    assert_eq!(
        agkit(&["suite", "run", "--config", "/nonexistent/agkit.conf"]).status.code(),
        Some(2)
    );
}

#[test]
fn empty_config_writes_header_only_reports() {
    let dir = std::env::temp_dir().join(format!("agkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("empty.conf");
    std::fs::write(&cfg, "# no suites\n").unwrap();
    let stem = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_agkit"))
        .args(["suite", "run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&stem)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(stem.with_extension("csv")).unwrap();
    assert_eq!(
        csv,
        "suite,group,instance,label,operation,inequality,lhs,rhs,class,holds,measured\n"
    );
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 0);
    std::fs::remove_dir_all(&dir).unwrap();
}
