use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn channel(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../channels")
        .join(name)
}

fn mwrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = mwrc(args);
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_xor_is_valid_and_not_special() {
    let (code, out, _) = run(&["check", path(&channel("xor.json"))]);
    assert_eq!(code, 0);
    assert!(
        out.contains("valid: true") && out.contains("special_case: false"),
        "{out}"
    );
}

#[test]
fn check_pair_copy_is_special() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("check.json");
    let (code, out, _) = run(&[
        "check",
        path(&channel("pair_copy_bsc05.json")),
        "--out",
        path(&doc),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("special_case: true"), "{out}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&doc).unwrap()).unwrap();
    assert_eq!(json["payload"]["special_case"]["injective_uplink"], true);
    assert_eq!(json["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn check_names_malformed_row() {
    let (code, _, err) = run(&["check", path(&channel("bad_row.json"))]);
    assert_eq!(code, 65);
    assert!(
        err.contains("downlink.marginals[2][1]") && err.contains("row sums to 1.2"),
        "{err}"
    );
}

#[test]
fn unknown_key_is_a_parse_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    let text = std::fs::read_to_string(channel("xor.json"))
        .unwrap()
        .replace("\"labels\"", "\"label\"");
    std::fs::write(&file, text).unwrap();
    let (code, _, err) = run(&["check", path(&file)]);
    assert_eq!(code, 65);
    assert!(
        err.contains("unknown field `label`") && err.contains("line 9"),
        "{err}"
    );
}

#[test]
fn missing_file_is_io_error() {
    let (code, _, _) = run(&["check", "/nonexistent/channel.json"]);
    assert_eq!(code, 74);
}

#[test]
fn member_exit_codes() {
    let xor = channel("xor.json");
    let (code, out, _) = run(&["member", path(&xor), "--rates", "0.9,0.9"]);
    assert_eq!(code, 0);
    assert!(
        out.contains("status: In") && out.contains("witness.p(x_1|q=0): 0.5,0.5"),
        "{out}"
    );

    let (code, out, _) = run(&["member", path(&xor), "--rates", "1.2,0"]);
    assert_eq!(code, 1);
    assert!(out.contains("violated: uplink U={1}"), "{out}");

    let (code, _, _) = run(&["member", path(&xor), "--rates", "0,0"]);
    assert_eq!(code, 0);

    let (code, out, _) = run(&["member", path(&xor), "--rates", "1,0.5"]);
    assert_eq!(code, 2, "{out}");

    let (code, _, err) = run(&["member", path(&xor), "--rates", "0.3"]);
    assert_eq!(code, 64);
    assert!(err.contains("2 users"), "{err}");
}

#[test]
fn clap_errors_are_usage_errors() {
    assert_eq!(run(&["member", path(&channel("xor.json"))]).0, 64);
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn member_document_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let (code, _, _) = run(&[
            "member",
            path(&channel("xor_bsc05.json")),
            "--rates",
            "0.5,0.6",
            "--out",
            path(out),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(json["payload"]["status"], "in");
    assert_eq!(json["command"]["args"]["rates"], "0.5,0.6");
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn region_unit_square() {
    let (code, out, _) = run(&[
        "region",
        path(&channel("xor.json")),
        "--directions",
        "1,0;1,1;0,1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "d_1,d_2,r_1,r_2,binding");
    let rows = csv_rows(&out);
    let expect = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    for (row, e) in rows.iter().zip(expect) {
        let r: Vec<f64> = row[2..4].iter().map(|v| v.parse().unwrap()).collect();
        assert!(
            (r[0] - e[0]).abs() < 1e-3 && (r[1] - e[1]).abs() < 1e-3,
            "{row:?}"
        );
    }
}

#[test]
fn region_constant_uplink_is_origin() {
    let (code, out, _) = run(&[
        "region",
        path(&channel("constant.json")),
        "--directions",
        "5",
    ]);
    assert_eq!(code, 0);
    for row in csv_rows(&out) {
        assert!(
            row[2..4]
                .iter()
                .all(|v| v.parse::<f64>().unwrap().abs() < 1e-5),
            "{row:?}"
        );
    }
}

#[test]
fn region_pair_copy_diagonal() {
    let (_, out, _) = run(&[
        "region",
        path(&channel("pair_copy_bsc05.json")),
        "--directions",
        "1,1",
    ]);
    let r: f64 = csv_rows(&out)[0][2].parse().unwrap();
    assert!((r - 0.713_603_042_884_044_6).abs() < 1e-3, "{r}");
}

#[test]
fn region_writes_csv_and_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let (code, stdout, _) = run(&[
        "region",
        path(&channel("xor.json")),
        "--directions",
        "3",
        "--out",
        path(&out),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 4);
    assert!(dir.path().join("region.csv.json").exists());
}

#[test]
fn unwritable_output_is_io_error() {
    let (code, _, _) = run(&[
        "region",
        path(&channel("xor.json")),
        "--out",
        "/nonexistent/dir/r.csv",
    ]);
    assert_eq!(code, 74);
}

#[test]
fn simulate_zero_rate_rows_are_error_free() {
    let (code, out, _) = run(&[
        "simulate",
        path(&channel("xor_bsc05.json")),
        "--rates",
        "0,0",
        "--trials",
        "40",
    ]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[10] == "0"), "{out}");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = [
        "simulate",
        path(&channel("xor_bsc05.json")),
        "--rates",
        "0.4,0.4",
        "--n",
        "6,10",
        "--trials",
        "60",
        "--seed",
        "7",
    ]
    .map(String::from);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",7")));
}

#[test]
fn simulate_capacity_error_names_product() {
    let (code, _, err) = run(&[
        "simulate",
        path(&channel("xor_bsc05.json")),
        "--rates",
        "0.9,0.9",
        "--n",
        "200",
        "--trials",
        "1",
    ]);
    assert_eq!(code, 64);
    assert!(err.contains("capacity exceeded"), "{err}");
}
