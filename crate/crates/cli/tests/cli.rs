use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn sica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sica"))
        .args(args)
        .env_remove("SICA_FIXTURES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sparsity_summary_line() {
    let o = sica(&["sparsity", path_str(&fixture("example1.csv"))]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("apparent 13.33%, CA 25.00%, adjusted 50.00%\n"));
}

#[test]
fn sparsity_json() {
    let o = sica(&["sparsity", "--json", path_str(&fixture("example1.csv"))]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["adjusted"]["numer"], 1);
    assert_eq!(v["adjusted"]["denom"], 2);
}

#[test]
fn report_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = sica(&[
        "report",
        path_str(&fixture("rodent.csv")),
        "--sinkhorn-iters",
        "500",
        "--decompose",
        "mfca",
        "--out-dir",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("oscillating_period2 after 500 iterations"));
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let last: Vec<&str> = trace.lines().rev().take(4).collect();
    assert!(last[0].starts_with("500,2.571369e+02,1.380883e+00"));
    assert!(last[1].starts_with("499,3.029641e+02,1.380883e+00"));
    assert!(last[2].starts_with("498,2.571369e+02"));
    assert!(last[3].starts_with("497,3.029641e+02"));
    for f in [
        "config.json",
        "sparsity.txt",
        "sparsity.json",
        "blocks.json",
        "decomposition.json",
        "sv.csv",
        "map.svg",
        "coordinates.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let blocks: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("blocks.json")).unwrap()).unwrap();
    assert_eq!(blocks["blocks"].as_array().unwrap().len(), 4);
    let svg = std::fs::read_to_string(out.join("map.svg")).unwrap();
    assert!(svg.contains("Dim 4 ("));

    // Same input, same bytes.
    let out2 = dir.path().join("r2");
    let o2 = sica(&[
        "report",
        path_str(&fixture("rodent.csv")),
        "--sinkhorn-iters",
        "500",
        "--decompose",
        "mfca",
        "--out-dir",
        path_str(&out2),
    ]);
    assert!(o2.status.success());
    for f in [
        "trace.csv",
        "blocks.json",
        "decomposition.json",
        "map.svg",
        "sv.csv",
    ] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(out2.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn transform_chain_is_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let sv = dir.path().join("sv.csv");
    let rodent = fixture("rodent.csv");
    let o = sica(&[
        "transform",
        "--sign",
        "--closure",
        path_str(&rodent),
        "--decompose",
        "ca",
        "--sv-out",
        path_str(&sv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# transforms: sign -> closure\n"));
    assert!(text.contains("ca singular values: 0.888"));
    let csv = std::fs::read_to_string(&sv).unwrap();
    assert!(csv.starts_with("# transforms: sign -> closure\ndim,sv,share\n1,0.888"));

    let o = sica(&[
        "transform",
        "--closure",
        "--sign",
        path_str(&rodent),
        "--decompose",
        "ca",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("# transforms: closure -> sign\n"));
    assert!(text.contains("ca singular values: 0.816"));
}

#[test]
fn transformed_table_can_be_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = sica(&[
        "transform",
        "--power",
        "0.5",
        path_str(&fixture("example3.csv")),
        "-o",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let o = sica(&["ingest", "--json", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let x = v["values"][1][1].as_f64().unwrap();
    assert!((x - 30f64.sqrt()).abs() < 1e-12);
}

#[test]
fn scale_example3() {
    let o = sica(&[
        "scale",
        path_str(&fixture("example3.csv")),
        "--sinkhorn-iters",
        "500",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("4.128788e-03"));
    assert!(text.contains("blocks: 1"));
    let o = sica(&[
        "scale",
        path_str(&fixture("example3.csv")),
        "--zero-tol",
        "0.01",
    ]);
    assert!(stdout(&o).contains("blocks: 2"));
}

#[test]
fn maps() {
    let rodent = fixture("rodent.csv");
    let o = sica(&["map", path_str(&rodent)]);
    assert!(o.status.success());
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg"));
    let labels =
        svg.matches("class=\"row-label\"").count() + svg.matches("class=\"col-label\"").count();
    assert_eq!(labels, 37);
    assert_eq!(svg, stdout(&sica(&["map", path_str(&rodent)])));

    let o = sica(&["map", path_str(&rodent), "--method", "mfca"]);
    assert!(stdout(&o).contains("Dim 4 ("));
    assert!(stdout(&o).contains("Dim 5 ("));

    let o = sica(&["map", path_str(&rodent), "--dims", "1,99"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("map"));
}

#[test]
fn map_needs_two_dimensions() {
    let o = sica(&["map", path_str(&fixture("example3.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error in map"));
}

#[test]
fn decompose_methods() {
    let rodent = fixture("rodent.csv");
    let o = sica(&["decompose", "ca", path_str(&rodent)]);
    assert!(stdout(&o).contains("ca singular values: 0.863"));
    let o = sica(&["decompose", "tca", path_str(&rodent), "--k", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("# transforms: none\ntca singular values:"));
    let o = sica(&["decompose", "lra", path_str(&rodent)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("LRA requires strictly positive data"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = sica(&["decompose", "mfca", path_str(&rodent), "-o", path_str(&out)]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["method"], "mfca");
    assert_eq!(v["transforms"], "none");
}

#[test]
fn exit_codes() {
    let o = sica(&["ingest", "/definitely/not/here.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error in ingest"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, ",a,b\nr1,1,-2\nr2,3,4\n").unwrap();
    let o = sica(&["ingest", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error in ingest: negative value -2 at row 1, column 2"));

    let o = sica(&[
        "transform",
        "--power=-1",
        path_str(&fixture("example3.csv")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error in transform"));

    let o = sica(&["decompose", "pca", path_str(&fixture("example3.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(sica(&["--help"]).status.success());
}

#[test]
fn ingest_options() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("semi.csv");
    std::fs::write(&f, "1;0;2\n0;0;0\n3;0;4\n").unwrap();
    let o = sica(&[
        "ingest",
        "--delimiter",
        ";",
        "--no-header",
        "--no-row-labels",
        path_str(&f),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("2 rows x 2 columns"));
    assert!(text.contains("dropped all-zero"));
}

#[test]
fn verify_filters_and_fixture_override() {
    let o = sica(&["verify", "--only", "sinkhorn"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);

    let o = sica(&[
        "verify",
        "--only",
        "taxicab",
        "--seed",
        "7",
        "--property-iters",
        "10",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("10 tables"));

    let o = sica(&["verify", "--only", "bogus"]);
    assert_eq!(o.status.code(), Some(1));

    // A fixture directory with a different Example 3 table makes the check fail.
    let dir = tempfile::tempdir().unwrap();
    for f in ["example1.csv", "example2.csv", "rodent.csv"] {
        std::fs::copy(fixture(f), dir.path().join(f)).unwrap();
    }
    std::fs::write(dir.path().join("example3.csv"), ",c1,c2\nr1,1,2\nr2,1,30\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sica"))
        .args(["verify", "--only", "2"])
        .env("SICA_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL  2"));
}
