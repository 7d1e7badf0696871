use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eil_core::report::StatsReport;
use eil_core::BitGraph;

fn eil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eil"))
        .args(args)
        .env("EIL_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report_at(dir: &Path) -> StatsReport {
    StatsReport::from_json(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn construct_incidence_writes_all_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("inc");
    let o = eil(&[
        "construct",
        "incidence",
        "--q",
        "7",
        "--t",
        "3",
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in [
        "graph.txt",
        "vertices.txt",
        "x.points",
        "y.points",
        "fx.poly",
        "fy.poly",
        "report.json",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let r = report_at(&out);
    r.validate().unwrap();
    assert!(r.passed());
    let g = BitGraph::parse(&fs::read_to_string(out.join("graph.txt")).unwrap()).unwrap();
    let rec = &r.trials[0];
    assert_eq!(Some(g.n()), rec.n);
    assert_eq!(Some(g.edge_count()), rec.edges);
    let verts = fs::read_to_string(out.join("vertices.txt")).unwrap();
    assert_eq!(verts.lines().count(), g.n());
}

#[test]
fn construct_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|d| {
            let out = tmp.path().join(d);
            eil(&[
                "construct",
                "incidence",
                "--q",
                "7",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ]);
            [
                fs::read(out.join("graph.txt")).unwrap(),
                fs::read(out.join("report.json")).unwrap(),
            ]
            .concat()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn construct_furedi_has_sixteen_vertices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    let o = eil(&[
        "construct",
        "furedi",
        "--q",
        "7",
        "--t",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("graph.txt")).unwrap();
    assert_eq!(text.lines().next(), Some("general 16"));
    assert_eq!(report_at(&out).kind, eil_core::report::ReportKind::Furedi);
}

#[test]
fn validation_errors_name_the_precondition() {
    let cases: [(&[&str], &str); 6] = [
        (
            &["construct", "incidence", "--q", "4", "--t", "3"],
            "q must be prime",
        ),
        (
            &["construct", "incidence", "--q", "7", "--t", "2"],
            "t must be at least 3",
        ),
        (
            &["construct", "incidence", "--q", "3", "--t", "5"],
            "t must not exceed q",
        ),
        (
            &["construct", "furedi", "--q", "7", "--t", "4"],
            "t must divide q-1",
        ),
        (
            &["montecarlo", "--q", "7", "--t", "3", "--trials", "10"],
            "trials must be at least 100",
        ),
        (
            &["sweep", "--q", "7", "--t", "3"],
            "at least two values of q",
        ),
    ];
    for (args, msg) in cases {
        let o = eil(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(msg), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn verify_reports_witness_for_k23() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("k23.txt");
    fs::write(&path, "bipartite 2 3\n0 0\n0 1\n0 2\n1 0\n1 1\n1 2\n").unwrap();
    let o = eil(&["verify", path.to_str().unwrap(), "--s", "2", "--m", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let r = StatsReport::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    r.validate().unwrap();
    let c = r.check_named("ksm_free").unwrap();
    assert!(!c.passed);
    assert!(c.witness.as_deref().unwrap().contains("[0, 1]"));
}

#[test]
fn verify_furedi_is_k33_free() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    eil(&[
        "construct",
        "furedi",
        "--q",
        "7",
        "--t",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let graph = out.join("graph.txt");
    let o = eil(&["verify", graph.to_str().unwrap(), "--s", "3", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn truncated_graph_is_a_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cut.txt");
    fs::write(&path, "general 16\n0 3\n0").unwrap();
    let o = eil(&["verify", path.to_str().unwrap(), "--s", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let missing = eil(&["verify", "/nonexistent/graph.txt", "--s", "2", "--m", "2"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn montecarlo_targets_and_csv_agree_with_json() {
    let base = [
        "montecarlo",
        "--q",
        "7",
        "--t",
        "3",
        "--trials",
        "200",
        "--seed",
        "5",
    ];
    let json = eil(&base);
    assert!(matches!(json.status.code(), Some(0) | Some(2)));
    let r = StatsReport::from_json(&String::from_utf8(json.stdout).unwrap()).unwrap();
    r.validate().unwrap();
    let p = r.aggregate("p_exact_t", Some(7)).unwrap();
    assert!((p.target.unwrap() - 30.0 / 343.0).abs() < 1e-12);
    let e = r.aggregate("e_binom", Some(7)).unwrap();
    assert!((e.target.unwrap() - 35.0 / 343.0).abs() < 1e-12);
    assert_eq!(r.trials.len(), 200);

    let csv_out = eil(&[&base[..], &["--format", "csv"]].concat());
    let mut rdr = csv::Reader::from_reader(csv_out.stdout.as_slice());
    let rows: Vec<(String, String)> = rdr
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].to_string())
        })
        .collect();
    assert_eq!(rows, r.flatten().unwrap());
}

#[test]
fn sweep_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = eil(&[
        "sweep",
        "--q",
        "5,7",
        "--t",
        "3",
        "--trials",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        matches!(o.status.code(), Some(0) | Some(2)),
        "{}",
        stderr(&o)
    );
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("q,trials,n_mean,ktt_mean"));
    assert_eq!(lines.count(), 2);
    let r = report_at(&out);
    r.validate().unwrap();
    assert!(r.check_named("k2t1_free").unwrap().passed);
    assert!(r.aggregate("loglog_slope", None).is_some());
}

#[test]
fn timing_is_opt_in() {
    let args = ["montecarlo", "--q", "5", "--trials", "100"];
    let plain = StatsReport::from_json(&String::from_utf8(eil(&args).stdout).unwrap()).unwrap();
    assert_eq!(plain.wall_clock_ms, None);
    let timed = eil(&[&args[..], &["--timing"]].concat());
    let timed = StatsReport::from_json(&String::from_utf8(timed.stdout).unwrap()).unwrap();
    assert!(timed.wall_clock_ms.is_some());
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(eil(&["--help"]).status.code(), Some(0));
    assert_eq!(eil(&["construct", "incidence"]).status.code(), Some(1));
    assert_eq!(
        eil(&["montecarlo", "--q", "7", "--workers", "0"])
            .status
            .code(),
        Some(1)
    );
}
