use std::fs;
use std::path::Path;
use std::process::Command;

use kpkit::cli::{run, RunManifest, ScenarioTruthFile};
use kpkit::report::AnalysisReport;
use tempfile::TempDir;

fn kpkit(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kpkit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const PATH5: &str = "source,target,kind,timestamp\na,b,wave,\nb,c,like,\nc,d,tag,\nd,e,comment,\n";

#[test]
fn fragment_path_center() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let r = write(dir.path(), "remove.txt", "c\n");
    let (code, out, _) = kpkit(&["fragment", "--interactions", &i, "--remove", &r]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "initial 0.000 final 0.667 change 0.667");

    let r = write(dir.path(), "none.txt", "\n");
    let (code, out, _) = kpkit(&["fragment", "--interactions", &i, "--remove", &r]);
    assert_eq!(code, 0);
    assert!(out.trim().ends_with("change 0.000"));

    let r = write(dir.path(), "bad.txt", "zzz\n");
    let (code, _, err) = kpkit(&["fragment", "--interactions", &i, "--remove", &r]);
    assert_eq!(code, 4);
    assert!(err.contains("zzz"));
}

#[test]
fn analyze_writes_report_and_manifest() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let r = write(dir.path(), "r.csv", "node_id,role\nb,seeded_developer\n");
    let out = dir.path().join("out");
    let (code, stdout, err) = kpkit(&[
        "analyze",
        "--interactions",
        &i,
        "--roles",
        &r,
        "--k",
        "2",
        "--method",
        "both",
        "--seed",
        "1",
        "--out-dir",
        p(&out),
        "--format",
        "text",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("KPP-NEG"));
    let report: AnalysisReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.kp_results.len(), 2);
    assert_eq!(report.network_stats.nodes, 5);
    assert!(out.join("report.txt").exists());
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.cfg.k, 2);
    assert_eq!(manifest.seed_used, 1);
    assert_eq!(manifest.inputs.len(), 2);
    assert_eq!(manifest.outputs, ["report.json", "report.txt", "manifest.json"]);
}

#[test]
fn analyze_with_photos_jsonl_and_csv_report() {
    let dir = TempDir::new().unwrap();
    let ph = write(
        dir.path(),
        "photos.jsonl",
        "{\"photo_id\":\"p1\",\"participants\":[\"a\",\"b\",\"c\"]}\n{\"photo_id\":\"p2\",\"participants\":[\"c\",\"d\"]}\n",
    );
    let out = dir.path().join("o");
    let (code, _, err) =
        kpkit(&["analyze", "--photos", &ph, "--k", "1", "--method", "neg", "--out-dir", p(&out), "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.contains("# key_players\nmethod,k,fit,fit_measure,chosen\nKPP-NEG,1,"), "{csv}");
}

#[test]
fn analyze_rejects_k_zero() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let (code, _, err) = kpkit(&["analyze", "--interactions", &i, "--k", "0", "--out-dir", p(dir.path())]);
    assert_eq!(code, 3);
    assert!(err.contains("k must be ≥ 1"), "{err}");
}

#[test]
fn analyze_rejects_k_too_large_for_graph() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let (code, _, _) = kpkit(&["analyze", "--interactions", &i, "--k", "5", "--out-dir", p(dir.path())]);
    assert_eq!(code, 3);
}

#[test]
fn analyze_reports_parse_line() {
    let dir = TempDir::new().unwrap();
    let mut body = String::from("source,target,kind,timestamp\n");
    for i in 0..5 {
        body.push_str(&format!("n{i},n{},wave,\n", i + 1));
    }
    body.push_str("x,y,bogus,\n");
    let i = write(dir.path(), "i.csv", &body);
    let (code, _, err) = kpkit(&["analyze", "--interactions", &i, "--out-dir", p(dir.path())]);
    assert_eq!(code, 2);
    assert!(err.contains("line 7"), "{err}");
    assert!(err.contains("i.csv"));
}

#[test]
fn analyze_requires_an_input() {
    let dir = TempDir::new().unwrap();
    let (code, _, _) = kpkit(&["analyze", "--out-dir", p(dir.path())]);
    assert_eq!(code, 3);
}

#[test]
fn export_dot_is_stable() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "tri.csv", "source,target,kind,timestamp\na,b,wave,\nb,c,wave,\na,c,wave,\n");
    let out = dir.path().join("tri.dot");
    let (code, _, err) = kpkit(&["export", "--interactions", &i, "--format", "dot", "--out", p(&out)]);
    assert_eq!(code, 0, "{err}");
    let first = fs::read(&out).unwrap();
    assert!(String::from_utf8_lossy(&first).starts_with("graph kpkit {"));
    kpkit(&["export", "--interactions", &i, "--format", "dot", "--out", p(&out)]);
    assert_eq!(first, fs::read(&out).unwrap());

    let (code, _, _) = kpkit(&["export", "--interactions", &i, "--format", "png", "--out", p(&out)]);
    assert_eq!(code, 3);
}

#[test]
fn export_highlights_from_report() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let r = write(dir.path(), "r.csv", "node_id,role\nc,seeded_developer\n");
    let out = dir.path().join("out");
    assert_eq!(kpkit(&["analyze", "--interactions", &i, "--roles", &r, "--k", "1", "--out-dir", p(&out)]).0, 0);
    let dot = dir.path().join("g.dot");
    let report = out.join("report.json");
    let (code, _, err) = kpkit(&[
        "export",
        "--interactions",
        &i,
        "--roles",
        &r,
        "--format",
        "dot",
        "--highlight",
        p(&report),
        "--highlight-method",
        "neg",
        "--out",
        p(&dot),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.contains("\"c\" [fillcolor=\"orange\""), "{text}");
}

#[test]
fn simulate_writes_three_deterministic_files() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |d: &Path| {
        vec![
            "simulate".to_string(),
            "--clusters".into(),
            "5".into(),
            "--cluster-size".into(),
            "6".into(),
            "--animators".into(),
            "2".into(),
            "--seed".into(),
            "42".into(),
            "--out-dir".into(),
            p(d).to_string(),
        ]
    };
    for d in [&a, &b] {
        let argv: Vec<String> = args(d);
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(kpkit(&refs).0, 0);
    }
    for f in ["interactions.csv", "roles.csv", "truth.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let truth: ScenarioTruthFile = serde_json::from_str(&fs::read_to_string(a.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth.nodes, 32);
    assert_eq!(truth.planted_animators.len(), 2);

    let (code, _, _) = kpkit(&["simulate", "--clusters", "1", "--out-dir", p(&a)]);
    assert_eq!(code, 3);
}

#[test]
fn threads_env_is_validated_and_honored() {
    let dir = TempDir::new().unwrap();
    let i = write(dir.path(), "i.csv", PATH5);
    let bin = env!("CARGO_BIN_EXE_kpkit");
    let status = Command::new(bin)
        .args(["analyze", "--interactions", &i, "--k", "1", "--out-dir", p(&dir.path().join("o"))])
        .env("KPKIT_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(bin)
            .args(["analyze", "--interactions", &i, "--k", "2", "--seed", "9", "--out-dir", p(&out)])
            .env("KPKIT_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        reports.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = kpkit(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("analyze"));
}
