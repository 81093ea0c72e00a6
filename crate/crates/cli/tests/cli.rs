use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;

const PLUS: [f64; 5] = [
    -0.42704367456616954,
    0.67360382502701477,
    1.3607568321317143,
    2.5452309655128058,
    3.5669038354612619,
];
const MINUS: [f64; 5] = [
    -0.70780506409849253,
    0.37094976339065477,
    1.6370103706443553,
    2.4666957020653522,
    3.4611266960665166,
];

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rabi(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_rabi-cf")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// `# key = value` lines and the data rows of a CSV table.
fn table(text: &str) -> (HashMap<String, String>, Vec<HashMap<String, String>>) {
    let mut meta = HashMap::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once(" = ").expect("metadata line");
            meta.insert(k.to_string(), v.to_string());
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let rows = reader
        .records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect();
    (meta, rows)
}

fn column(rows: &[HashMap<String, String>], name: &str) -> Vec<f64> {
    rows.iter().map(|r| r[name].parse().unwrap()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rabi-cf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn decoupled_spectrum_is_the_chain_diagonal() {
    let r = rabi(&["spectrum", "--omega", "1", "--g", "0", "--delta", "0.4", "--parity", "plus", "--method", "diag", "--levels", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert_eq!(meta["method"], "diag");
    let e = column(&rows, "energy");
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip([0.4, 0.6, 2.4]) {
        assert!((got - want).abs() < 1e-11, "{got} vs {want}");
    }
    for r in &rows {
        assert_eq!(r["parity"], "plus");
        assert_eq!(r["method"], "diag");
    }
}

#[test]
fn method_a_refuses_zero_delta() {
    let r = rabi(&["spectrum", "--omega", "1", "--g", "0.7", "--delta", "0", "--method", "a"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("method b or diag"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn method_a_matches_fixture() {
    let r = rabi(&["spectrum", "--omega", "1", "--g", "0.7", "--delta", "0.4", "--method", "a", "--order", "150", "--levels", "10"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert!(meta["note"].contains("does not resolve parity"));
    let mut union: Vec<f64> = PLUS.iter().chain(&MINUS).copied().collect();
    union.sort_by(f64::total_cmp);
    let e = column(&rows, "energy");
    assert_eq!(e.len(), 10);
    for (got, want) in e.iter().zip(&union) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn method_b_and_diag_resolve_parity() {
    for method in ["b", "diag"] {
        let r = rabi(&["spectrum", "--g", "0.7", "--delta", "0.4", "--method", method, "--parity", "minus", "--levels", "5", "--order", "200"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let (_, rows) = table(&r.stdout);
        let e = column(&rows, "energy");
        for (got, want) in e.iter().zip(&MINUS) {
            assert!((got - want).abs() < 1e-9, "{method}: {got} vs {want}");
        }
    }
}

#[test]
fn json_carries_the_same_fields() {
    let args = ["spectrum", "--g", "0.7", "--delta", "0.4", "--levels", "4"];
    let csv = rabi(&args);
    let mut with_json = args.to_vec();
    with_json.extend(["--format", "json"]);
    let json = rabi(&with_json);
    assert_eq!(json.code, 0);
    let v: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    let (meta, rows) = table(&csv.stdout);
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), rows.len());
    for (j, c) in jrows.iter().zip(&rows) {
        let keys: Vec<&String> = j.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), c.len());
        // compare text: parsing back into f64 may round the last digit
        assert!(json.stdout.contains(&format!("\"energy\": {}", c["energy"])));
    }
    assert_eq!(v["metadata"].as_object().unwrap().len(), meta.len());
}

#[test]
fn output_is_reproducible() {
    let args = ["spectrum", "--g", "0.7", "--delta", "0.4", "--method", "b", "--levels", "6", "--seedless"];
    assert_eq!(rabi(&args).stdout, rabi(&args).stdout);
}

#[test]
fn compare_a_against_diag_passes() {
    let r = rabi(&["compare", "--omega", "1", "--g", "0.7", "--delta", "0.4", "--m", "10", "--tol", "1e-7"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert_eq!(rows.len(), 10);
    assert!(meta["max_deviation"].parse::<f64>().unwrap() < 1e-7);
}

#[test]
fn compare_orders_and_tolerance_exit() {
    let base = ["compare", "--g", "0.7", "--delta", "0.4", "--first", "diag", "--second", "diag", "--first-order", "100", "--second-order", "200", "--m", "5"];
    let r = rabi(&base);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(table(&r.stdout).1.len(), 5);
    // a coarse truncation against a fine one exceeds a tight tolerance
    let r = rabi(&["compare", "--g", "0.7", "--delta", "0.4", "--first", "diag", "--second", "diag", "--first-order", "8", "--second-order", "200", "--m", "5", "--tol", "1e-9"]);
    assert_eq!(r.code, 1);
}

#[test]
fn compare_more_levels_than_computed_is_usage_error() {
    let r = rabi(&["compare", "--g", "0.7", "--delta", "0.4", "--first", "b", "--second", "diag", "--m", "50", "--window=-2,3"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn pathological_sweep_approaches_the_limit() {
    let r = rabi(&["pathological", "--omega", "1", "--g", "0.7", "--delta", "0.4", "--e0", "0.5", "--sweep", "10,20,40,80,160,200"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert_eq!(meta["all_planted"], "true");
    let d = column(&rows, "limit_distance");
    assert_eq!(d.len(), 6);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    for row in &rows {
        assert_eq!(row["planted"], "true");
        assert!(row["residual_exact"].parse::<f64>().unwrap() < 1e-9);
        assert!(row["offdiag_diagnostic"].is_empty());
    }
}

#[test]
fn pathological_offdiag_variant_reports_diagnostic() {
    let r = rabi(&["pathological", "--g", "0.7", "--delta", "0.4", "--e0", "0.5", "--variant", "diag-offdiag", "--sweep", "10,40"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = table(&r.stdout);
    for row in &rows {
        let n: f64 = row["order"].parse().unwrap();
        let dist: f64 = row["limit_distance"].parse().unwrap();
        let diag: f64 = row["offdiag_diagnostic"].parse().unwrap();
        assert!((diag.abs() - n * dist).abs() < 1e-9 * n);
        assert!(!row["modified_offdiag"].is_empty());
    }
}

#[test]
fn pathological_at_genuine_pole_is_refused() {
    let e0 = format!("{}", PLUS[1]);
    let r = rabi(&["pathological", "--g", "0.7", "--delta", "0.4", "--e0", &e0, "--order", "60"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("eigenvalue of the unmodified chain"), "{}", r.stderr);
}

#[test]
fn bound_at_fixture() {
    let r = rabi(&["bound", "--energy", "0", "--omega", "1", "--g", "0.7", "--delta", "0.4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert_eq!(meta["bound"], "3");
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row["holds"], "true");
        assert!(row["tail_change"].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn bound_decoupled_and_deep_strong() {
    let r = rabi(&["bound", "--g", "0", "--delta", "0.4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, _) = table(&r.stdout);
    assert_eq!(meta["bound"], "1");
    assert!(meta.contains_key("note"));

    let r = rabi(&["bound", "--g", "1.2", "--delta", "0.4", "--omega", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert!(meta["bound"].parse::<usize>().unwrap() > 3);
    assert!(rows.iter().all(|r| r["holds"] == "true"));
}

#[test]
fn scan_fixture_crossings_sit_on_integers() {
    let track = scratch("track.csv");
    let r = rabi(&[
        "scan", "--param", "g", "--from", "0.05", "--to", "1.2", "--steps", "600", "--omega", "1", "--delta", "0.4",
        "--levels", "8", "--order", "300", "--track-out", track.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = table(&r.stdout);
    assert!(!rows.is_empty());
    assert!(column(&rows, "deviation").iter().all(|d| *d < 1e-4));
    let (_, tracked) = table(&std::fs::read_to_string(&track).unwrap());
    assert_eq!(tracked.len(), 601 * 2 * 8);
    std::fs::remove_file(track).unwrap();
}

#[test]
fn scan_degenerate_and_empty() {
    let r = rabi(&["scan", "--param", "g", "--from", "0.05", "--to", "1.2", "--delta", "0"]);
    assert_eq!(r.code, 2);
    let r = rabi(&["scan", "--param", "g", "--from", "0.5", "--to", "0.5", "--delta", "0.4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (meta, rows) = table(&r.stdout);
    assert!(rows.is_empty());
    assert_eq!(meta["events"], "0");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let conf = scratch("fixture.conf");
    std::fs::write(&conf, "# decoupled\nomega = 1\ng = 0\ndelta = 0.4\nparity = plus\nlevels = 3\n").unwrap();
    let path = conf.to_str().unwrap();

    let r = rabi(&["spectrum", "--config", path]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let e = column(&table(&r.stdout).1, "energy");
    assert!((e[0] - 0.4).abs() < 1e-11);

    let r = rabi(&["spectrum", "--config", path, "--g", "0.7"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let e = column(&table(&r.stdout).1, "energy");
    assert!((e[0] - PLUS[0]).abs() < 1e-9);
    std::fs::remove_file(conf).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rabi(&["spectrum", "--delta", "0.4"]).code, 2);
    assert_eq!(rabi(&["spectrum", "--g", "0.7", "--delta", "0.4", "--bogus"]).code, 2);
    assert_eq!(rabi(&["spectrum", "--g", "0.7", "--delta", "0.4", "--window=3,1"]).code, 2);
    assert_eq!(rabi(&["spectrum", "--g", "0.7", "--omega", "0", "--delta", "0.4"]).code, 2);
    assert_eq!(rabi(&["spectrum", "--config", "/nonexistent/rabi.conf"]).code, 2);
    let help = rabi(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("Exit codes"));
}
