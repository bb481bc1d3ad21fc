use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specmult"));
    c.env_remove("SPECMULT_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("specmult-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &mut Command) -> (i32, Value, Output) {
    let out = cmd.output().unwrap();
    let code = out.status.code().unwrap();
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json, out)
}

const C4: &str = "graph 4\n0 1\n1 2\n2 3\n3 0\n";
const K5: &str = "graph 5\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";

#[test]
fn cycle_adjacency_spectrum() {
    let dir = scratch("c4");
    let g = write(&dir, "c4.txt", C4);
    let (code, v, _) = run(bin().arg("spectrum").arg(&g).args(["--operator", "adjacency"]));
    assert_eq!(code, 0);
    assert_eq!(v["schema_version"], 1);
    let values: Vec<f64> =
        v["result"]["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in values.iter().zip([2.0, 0.0, 0.0, -2.0]) {
        assert!((got - want).abs() < 1e-12, "{values:?}");
    }
    let mults: Vec<u64> = v["result"]["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["multiplicity"].as_u64().unwrap())
        .collect();
    assert_eq!(mults, [1, 2, 1]);
}

#[test]
fn heat_matrix_on_two_path() {
    let dir = scratch("p2");
    let g = write(&dir, "p2.txt", "graph 2\n0 1\n");
    let (code, v, _) = run(bin().arg("spectrum").arg(&g).args(["--heat", "1.0"]));
    assert_eq!(code, 0);
    let m = &v["result"]["matrix"];
    // (1 + e^{-2}) / 2 and (1 - e^{-2}) / 2
    assert!((m[0][0].as_f64().unwrap() - 0.5676676416183064).abs() < 1e-12);
    assert!((m[0][1].as_f64().unwrap() - 0.4323323583816936).abs() < 1e-12);
}

#[test]
fn edgeless_graph_is_structural_failure() {
    let dir = scratch("empty");
    let g = write(&dir, "e.txt", "graph 3\n");
    let (code, _, out) = run(bin().arg("spectrum").arg(&g));
    assert_eq!(code, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not connected"));
}

#[test]
fn parse_error_exit_two_with_line() {
    let dir = scratch("bad");
    let g = write(&dir, "bad.txt", "graph 3\n0 1\n1 x\n");
    let (code, _, out) = run(bin().arg("spectrum").arg(&g));
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn complete_graph_bound_sweep() {
    let dir = scratch("k5");
    let g = write(&dir, "k5.txt", K5);
    let (code, v, _) = run(bin().arg("bound").arg(&g).args(["--j", "2,3,4"]));
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let reports = v["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        for key in ["m", "m_prime", "rank_deficit", "trace_value", "n_steps", "r1", "r2"] {
            assert!(!r[key].is_null(), "missing {key}");
        }
        assert!(r["m"].as_u64() <= Some(r["m_prime"].as_u64().unwrap() + r["rank_deficit"].as_u64().unwrap()));
    }
}

#[test]
fn net_radius_at_diameter_gives_one_cell() {
    let dir = scratch("c6");
    let g = write(&dir, "c6.txt", "graph 6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n");
    let (code, v, _) = run(bin().arg("bound").arg(&g).args(["--net-radius", "3"]));
    assert_eq!(code, 0);
    assert_eq!(v["result"]["reports"][0]["rank_deficit"], 1);
}

#[test]
fn kernel_cert_rejects_small_heat_cut() {
    let (code, _, _) = run(bin().args(["kernel-cert", "--heat-cut", "1"]));
    assert_eq!(code, 4);
}

#[test]
fn kernel_cert_tail_csv() {
    let dir = scratch("csv");
    let csv = dir.join("tail.csv");
    let (code, v, _) =
        run(bin().args(["kernel-cert", "--check", "tail", "--t-grid", "1,2"]).arg("--csv").arg(&csv));
    assert_eq!(code, 0);
    assert_eq!(v["result"]["reports"][0]["holds"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,eta,lhs,rhs");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,12,"));
}

#[test]
fn construct_range_and_invalid_order() {
    let (code, v, _) = run(bin().args(["construct", "--n-range", "3..20"]));
    assert_eq!(code, 0);
    let reports = v["result"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 18);
    for r in reports {
        assert_eq!(r["near_degenerate_count"].as_u64().unwrap() + 1, r["n"].as_u64().unwrap());
    }
    let (code, _, _) = run(bin().args(["construct", "--n", "2"]));
    assert_eq!(code, 4);
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn identities_manifest_is_deterministic() {
    let args = ["identities", "--trials", "40", "--dim-max", "12", "--seed", "7"];
    let (c1, a, o1) = run(bin().args(args).args(["--workers", "1"]));
    let (c2, b, o2) = run(bin().args(args).args(["--workers", "3"]));
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a["result"]["aggregate_pass"], true);
    assert_eq!(a["result"]["runs"].as_array().unwrap().len(), 4);
    assert_eq!(without_timestamp(a), without_timestamp(b));
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout).lines().filter(|l| !l.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&o1), strip(&o2));
}

#[test]
fn identities_reject_zero_trials() {
    let (code, _, _) = run(bin().args(["identities", "--trials", "0"]));
    assert_eq!(code, 4);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = scratch("cfg");
    let cfg = write(&dir, "run.cfg", "# identities defaults\ntrials = 5\ndim_max = 6\nseed = 3\n");
    let (code, v, _) = run(bin().arg("--config").arg(&cfg).args(["identities", "--seed", "11"]));
    assert_eq!(code, 0);
    assert_eq!(v["config"]["trials"], 5);
    assert_eq!(v["config"]["dim_max"], 6);
    assert_eq!(v["config"]["seed"], 11);

    let bad = write(&dir, "bad.cfg", "trials = 5\noops\n");
    let (code, _, out) = run(bin().arg("--config").arg(&bad).args(["identities"]));
    assert_eq!(code, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn env_out_dir_receives_report() {
    let dir = scratch("out");
    let target = dir.join("reports");
    let (code, v, _) = run(bin().env("SPECMULT_OUT_DIR", &target).args(["construct", "--n", "4"]));
    assert_eq!(code, 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(target.join("construct.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn formula_plain_values() {
    let out = bin().args(["formula", "chromatic", "--g", "3", "--plain"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "9");
    let (code, v, _) = run(bin().args(["formula", "cdv-target", "--g", "3"]));
    assert_eq!(code, 0);
    assert_eq!(v["result"]["value"]["target"], 8);
    let (code, v, _) = run(bin().args(["formula", "constants", "--b", "-2"]));
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    let (code, _, _) = run(bin().args(["formula", "colbois"]));
    assert_eq!(code, 4);
}
