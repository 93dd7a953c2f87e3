use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_montesinos"))
        .args(args)
        .env("MONTESINOS_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn classify_exit_codes() {
    let o = run(&["classify", "K(1/3,1/4,2/5)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("certified"));

    let o = run(&["classify", "K(1/2,1/5,1/5)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let row: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(row["verdict"], "family");
    assert_eq!(row["family"], 4);
    assert_eq!(row["disclaimer"], "assumes K hyperbolic");

    let o = run(&["classify", "K(1/3,1/3,2/7)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("not a knot: 2 components"),
        "{}",
        stderr(&o)
    );

    let o = run(&["classify", "K(1/3,1/4)"]);
    assert_eq!(o.status.code(), Some(1));

    // Usage errors must not be confused with the family exit code.
    let o = run(&["classify"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["enumerate", "--q-bound", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn classify_certificate_json_is_exact() {
    let o = run(&["classify", "K(1/4,1/5,2/5)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let row: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(row["certificate"]["units"], "pi");
    assert_eq!(row["certificate"]["regime"], "thm1.1-A");
    assert_eq!(row["certificate"]["alpha_bar"][0], "2/3");
}

#[test]
fn cross_check_report() {
    let o = run(&["classify", "--cross-check", "K(1/3,1/3,3/7)"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["family"], 2);
    assert_eq!(r["decompositions"][0]["form"], "3/7 = 1/(2 + 1/3)");
    assert_eq!(r["orbit_uniform"], true);
}

#[test]
fn enumerate_csv_and_summary() {
    let o = run(&["enumerate", "--q-bound", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(
        out.lines().next(),
        Some("knot,verdict,family,certificate_source")
    );
    assert!(stderr(&o).contains("anomalies=0"));
    let target = "K(1/2,1/5,1/5)"
        .parse::<montesinos::tangle::MontesinosKnot>()
        .unwrap()
        .orbit_key();
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let hits = reader
        .records()
        .map(|r| {
            r.unwrap()[0]
                .parse::<montesinos::tangle::MontesinosKnot>()
                .unwrap()
        })
        .filter(|k| k.orbit_key() == target)
        .count();
    assert_eq!(hits, 1);
}

#[test]
fn enumerate_small_bound_stays_in_bound() {
    let o = run(&["enumerate", "--q-bound", "3", "--format", "json"]);
    let lines: Vec<&str> = std::str::from_utf8(&o.stdout).unwrap().lines().collect();
    let (summary, rows) = lines.split_last().unwrap();
    assert!(summary.starts_with("{\"summary\""));
    for line in rows {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        let knot: montesinos::tangle::MontesinosKnot =
            row["knot"].as_str().unwrap().parse().unwrap();
        let mut q = knot.q();
        q.sort();
        assert!(q == [2, 3, 3] || q == [3, 3, 3], "{knot}");
    }
}

#[test]
fn enumerate_is_byte_deterministic_across_jobs() {
    let one = run(&[
        "enumerate",
        "--q-bound",
        "7",
        "--format",
        "json",
        "--jobs",
        "1",
    ]);
    let many = run(&[
        "enumerate",
        "--q-bound",
        "7",
        "--format",
        "json",
        "--jobs",
        "4",
    ]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let o = run(&[
        "enumerate",
        "--q-bound",
        "4",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("knot,verdict,family,certificate_source\n"));
}

#[test]
fn gb_verify_fixtures() {
    let o = run(&["gb-verify", &fixture("tetrahedron.json")]);
    assert_eq!(stdout(&o).trim(), "sum_e = 2, chi = 2, equality");
    let o = run(&["gb-verify", &fixture("torus_grid.json")]);
    assert_eq!(stdout(&o).trim(), "sum_e = 0, chi = 0, equality");
    let o = run(&["gb-verify", &fixture("tetrahedron_perturbed.json")]);
    assert_eq!(stdout(&o).trim(), "sum_e = 13/6 > chi = 2, strict");
    assert_eq!(o.status.code(), Some(0));

    let o = run(&["gb-verify", &fixture("bad_angle.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("faces[0].corners[0].angle"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"surface_euler_char\": 2,\n  \"vertices\": [{\"kind\": \"plain\", \"slots\": \"x\"}]\n}").unwrap();
    let o = run(&["gb-verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn presets_table() {
    let o = run(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 9);
    assert!(out.lines().all(|l| l.ends_with("verified=true")));
    let row = |id: &str| out.lines().find(|l| l.starts_with(id)).unwrap().to_string();
    assert!(row("thm1.1-A ").contains("q_i >= 4"));
    assert!(row("thm1.1-A ").contains("ᾱ=(2π/3, 2π/3, 2π/3)"));
    assert!(row("thm8.2-case3b").contains("q = (2, 5, >=9)"));
    assert!(row("thm8.2-case3b").contains("ᾱ=(π, π/3, 2π/3)"));
    assert!(row("thm8.2-case5").contains("|pbar_3| >= 7"));
    assert!(row("thm8.2-case5").contains("ᾱ=(π, 7π/8, π/8)"));
}

#[test]
fn certify_checks_a_certificate_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"alpha_bar": ["1", "2/3", "1/3"], "beta_bar": ["1/3", "1/3", "1/3"], "units": "pi"}"#,
    )
    .unwrap();
    let o = run(&["certify", "K(1/3,1/4,2/5)", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("valid"));

    // Same angles fail once |pbar_3| drops to 1: condition (4) at i = 3.
    let o = run(&["certify", "K(1/3,1/4,1/5)", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("condition (4) i=3"), "{}", stdout(&o));

    let degrees = dir.path().join("degrees.json");
    std::fs::write(
        &degrees,
        r#"{"alpha_bar": ["180", "120", "60"], "beta_bar": ["60", "60", "60"], "units": "degrees"}"#,
    )
    .unwrap();
    let o = run(&["certify", "K(1/3,1/4,2/5)", degrees.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
