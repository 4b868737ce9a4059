use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run_ok(cmd: &str, config: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = qchain(&args);
    assert!(
        o.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// Every CSV cell equals the corresponding JSON cell exactly.
fn assert_csv_matches_json(dir: &Path) {
    let rep = report(dir);
    let tables = rep["tables"].as_object().unwrap();
    assert!(!tables.is_empty());
    for (name, table) in tables {
        let (header, rows) = read_csv(&dir.join(format!("{name}.csv")));
        let columns: Vec<String> = table["columns"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().into())
            .collect();
        assert_eq!(header, columns, "{name}");
        let json_rows = table["rows"].as_array().unwrap();
        assert_eq!(rows.len(), json_rows.len(), "{name}");
        for (csv_row, json_row) in rows.iter().zip(json_rows) {
            for (c, j) in csv_row.iter().zip(json_row.as_array().unwrap()) {
                match j {
                    Value::Null => assert_eq!(c, ""),
                    Value::String(s) => assert_eq!(c, s),
                    Value::Number(num) if num.is_i64() => {
                        assert_eq!(c.parse::<i64>().unwrap(), num.as_i64().unwrap())
                    }
                    Value::Number(num) => {
                        assert_eq!(
                            c.parse::<f64>().unwrap().to_bits(),
                            num.as_f64().unwrap().to_bits(),
                            "{name}: {c}"
                        )
                    }
                    other => panic!("unexpected cell {other}"),
                }
            }
        }
    }
}

/// Re-run from the report's provenance block and compare every output byte.
fn assert_round_trip(cmd: &str, first: &Path, scratch: &Path) {
    let rep = report(first);
    let cfg: toml::Value = serde_json::from_value(rep["provenance"]["config"].clone()).unwrap();
    let config = write_config(
        scratch,
        &format!("{cmd}_resolved.toml"),
        &toml::to_string(&cfg).unwrap(),
    );
    let second = scratch.join(format!("{cmd}_second"));
    run_ok(cmd, &config, &second, &[]);
    for entry in fs::read_dir(first).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap();
        let a = fs::read(&path).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert!(a == b, "{cmd}: {} differs after re-run", name.to_string_lossy());
    }
}

#[test]
fn steady_baseline_writes_site_table() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "baseline.toml",
        "scenario = \"baseline\"\n[overrides]\nn = 25\n",
    );
    let out = tmp.path().join("out");
    run_ok("steady", &config, &out, &[]);
    let (header, rows) = read_csv(&out.join("steady_sites.csv"));
    assert_eq!(header, ["site", "occupation", "current"]);
    assert_eq!(rows.len(), 25);
    let rep = report(&out);
    let energy = rep["summary"]["mean_energy"].as_f64().unwrap();
    assert!((energy - 412.5).abs() < 1e-9, "{energy}");
    assert!(rep["diagnostics"]["relative_residual"].as_f64().unwrap() < 1e-10);
    assert_csv_matches_json(&out);
}

#[test]
fn seeded_steady_run_reproduces_bit_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "disorder.toml",
        "scenario = \"caseV\"\n[overrides]\nn = 12\n",
    );
    let out = tmp.path().join("first");
    run_ok("steady", &config, &out, &["--seed", "42"]);
    assert_eq!(report(&out)["provenance"]["config"]["seed"], 42);
    assert_round_trip("steady", &out, tmp.path());
    assert_csv_matches_json(&out);
}

#[test]
fn seed_changes_disordered_result() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "disorder.toml",
        "scenario = \"caseV\"\nseed = 1\n[overrides]\nn = 8\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_ok("steady", &config, &a, &["--format", "csv"]);
    run_ok("steady", &config, &b, &["--format", "csv", "--seed", "2"]);
    assert!(!a.join("report.json").exists());
    assert_ne!(
        fs::read(a.join("steady_sites.csv")).unwrap(),
        fs::read(b.join("steady_sites.csv")).unwrap()
    );
}

#[test]
fn all_diffusive_evolution_grows_linearly() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "scenario = \"caseII\"\nmode = \"evolve\"\n[evolve]\ntimes = [1.0, 10.0, 20.0, 30.0]\n";
    let config = write_config(tmp.path(), "evolve.toml", text);
    let out = tmp.path().join("first");
    run_ok("evolve", &config, &out, &[]);
    let (header, rows) = read_csv(&out.join("evolve.csv"));
    assert_eq!(header.len(), 1 + 25 + 2);
    assert_eq!(rows.len(), 4);
    let e: Vec<f64> = rows.iter().map(|r| r[26].parse().unwrap()).collect();
    let t = [1.0, 10.0, 20.0, 30.0];
    for i in 1..4 {
        let slope = (e[i] - e[0]) / (t[i] - t[0]);
        assert!((slope - 15.0).abs() < 1e-9, "{slope}");
    }
    assert_eq!(report(&out)["diagnostics"]["integrator"]["kind"], "closed_form");
    assert_csv_matches_json(&out);
    assert_round_trip("evolve", &out, tmp.path());
}

#[test]
fn crossover_sweep_is_long_format() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "scenario = \"caseIV\"\n[sweep]\nkind = \"crossover\"\nsizes = [3, 4, 5]\ngamma = 0.5\n";
    let config = write_config(tmp.path(), "sweep.toml", text);
    let out = tmp.path().join("first");
    run_ok("sweep", &config, &out, &[]);
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header, ["n", "k", "current", "closed_form"]);
    assert_eq!(rows.len(), 4 + 5 + 6);
    assert!(rows.iter().filter(|r| r[3].is_empty()).count() == 2 + 3 + 4);
    assert_csv_matches_json(&out);
    assert_round_trip("sweep", &out, tmp.path());
}

#[test]
fn size_and_seed_sweeps() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "size.toml",
        "scenario = \"baseline\"\n[sweep]\nkind = \"size\"\nsizes = [5, 25, 50]\n",
    );
    let out = tmp.path().join("size");
    run_ok("sweep", &config, &out, &[]);
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    for r in &rows {
        let thermal: f64 = r[2].parse().unwrap();
        assert!((thermal + 15.0).abs() < 1e-9, "{thermal}");
    }
    let config = write_config(
        tmp.path(),
        "seeds.toml",
        "scenario = \"caseV\"\n[overrides]\nn = 6\n[sweep]\nkind = \"seeds\"\nseeds = [1, 2, 3]\n",
    );
    let out = tmp.path().join("seeds");
    run_ok("sweep", &config, &out, &[]);
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 18);
    assert_csv_matches_json(&out);
}

#[test]
fn spectrum_lists_drift_eigenvalues_and_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "spectrum.toml", "scenario = \"baseline\"\n");
    let out = tmp.path().join("out");
    run_ok("spectrum", &config, &out, &[]);
    let (_, eig) = read_csv(&out.join("spectrum.csv"));
    let (_, modes) = read_csv(&out.join("modes.csv"));
    assert_eq!(eig.len(), 50);
    assert_eq!(modes.len(), 25);
    for r in &eig {
        assert!((r[1].parse::<f64>().unwrap() + 0.05).abs() < 1e-12);
    }
    assert_round_trip("spectrum", &out, tmp.path());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out_s = out.to_str().unwrap();

    let c = write_config(tmp.path(), "c2.toml", "scenario = \"caseII\"\n");
    let o = qchain(&["steady", "--config", c.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "no_steady_state");

    let c = write_config(tmp.path(), "bad.toml", "scenario = \"baseline\"\ncolour = 1\n");
    let o = qchain(&["steady", "--config", c.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));

    let c = write_config(
        tmp.path(),
        "neg.toml",
        "scenario = \"baseline\"\n[overrides]\nzeta = -0.1\n",
    );
    let o = qchain(&["steady", "--config", c.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));

    let missing = tmp.path().join("missing.toml");
    let o = qchain(&["steady", "--config", missing.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));

    let blocker = write_config(tmp.path(), "file", "");
    let c = write_config(tmp.path(), "ok.toml", "scenario = \"baseline\"\n[overrides]\nn = 4\n");
    let o = qchain(&[
        "steady",
        "--config",
        c.to_str().unwrap(),
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let tight = write_config(
        tmp.path(),
        "tight.toml",
        "scenario = \"baseline\"\n[overrides]\nn = 4\n[solver]\nresidual_tolerance = 1e-300\n",
    );
    let o = qchain(&["steady", "--config", tight.to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn validate_reports_diagnostics_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let diagnostics = |text: &str| -> Vec<Value> {
        let c = write_config(tmp.path(), "v.toml", text);
        let o = qchain(&["validate", "--config", c.to_str().unwrap()]);
        assert!(o.status.success());
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["diagnostics"].as_array().unwrap().clone()
    };
    let d = diagnostics("scenario = \"baseline\"\n[overrides]\nn = 3\nzetas = [0.1, 0.1, -0.1]\n");
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["kind"], "physics");
    assert_eq!(d[0]["field"], "thermal[3].rate");

    let d = diagnostics("scenario = \"caseII\"\nmode = \"steady\"\n");
    assert_eq!(d[0]["severity"], "warning");
    assert!(d[0]["message"].as_str().unwrap().contains("no steady state exists"));

    assert!(diagnostics("scenario = \"baseline\"\n").is_empty());
    assert_eq!(diagnostics("scenario = 3\n")[0]["kind"], "schema");
}

#[test]
fn shipped_configs_validate_cleanly() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = qchain(&["validate", "--config", path.to_str().unwrap()]);
            let v: Value = serde_json::from_slice(&o.stdout).unwrap();
            assert_eq!(v["diagnostics"], Value::Array(vec![]), "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
