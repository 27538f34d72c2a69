use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SOLVE_P3: &str = "# p = 3 reference problem
mode = solve
p = 3
lambda = 1
g_family = exponential
g_l2_target = 0.5*C_p
n = 512
";

fn smx(dir: &Path, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.cfg"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_smx"))
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_writes_deterministic_artifacts() {
    let dir = TempDir::new().unwrap();
    let a = smx(dir.path(), SOLVE_P3, "a");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = smx(dir.path(), SOLVE_P3, "b");
    assert_eq!(b.status.code(), Some(0));
    for file in ["result.json", "profiles.csv"] {
        let x = fs::read(dir.path().join("a").join(file)).unwrap();
        let y = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(x == y, "{file} differs between identical runs");
    }

    let result = json(&dir.path().join("a/result.json"));
    let (e0, e1) = (result["energy_u0"].as_f64().unwrap(), result["energy_u1"].as_f64().unwrap());
    assert!(e0 < 0.0 && 0.0 < e1, "{e0} {e1}");
    assert_eq!(result["certified"], Value::Bool(true));
    assert!(result["identities_u0"]["nehari_residual"].is_number());
    assert!(result["outcome"]["u1"]["iterations"].is_u64());
}

#[test]
fn json_numbers_round_trip() {
    let dir = TempDir::new().unwrap();
    let o = smx(dir.path(), SOLVE_P3, "run");
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("run/result.json")).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    // any number that re-parsed to a different value would print differently
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&value).unwrap()), text);

    fn walk(v: &Value, count: &mut usize) {
        match v {
            Value::Number(n) => {
                let x = n.as_f64().unwrap();
                assert_eq!(n.to_string().parse::<f64>().unwrap(), x);
                *count += 1;
            }
            Value::Array(a) => a.iter().for_each(|x| walk(x, count)),
            Value::Object(m) => m.values().for_each(|x| walk(x, count)),
            _ => {}
        }
    }
    let mut count = 0;
    walk(&value, &mut count);
    assert!(count > 20);
}

#[test]
fn profiles_have_one_row_per_node() {
    let dir = TempDir::new().unwrap();
    let o = smx(dir.path(), SOLVE_P3, "run");
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("run/profiles.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 512 + 1);
    assert_eq!(lines[0], "r,u0,u1,phi_u0,phi_u1");
    let last: Vec<f64> = lines[512].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last.len(), 5);
    assert_eq!(last[0], 20.0);
    assert_eq!((last[1], last[2]), (0.0, 0.0));
    for row in &lines[1..] {
        assert!(row.split(',').all(|s| s.parse::<f64>().is_ok()), "{row}");
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (SOLVE_P3.replace("p = 3", "p = 6"), "(1, 5)"),
        (SOLVE_P3.replace("0.5*C_p", "1.2*C_p"), "(G3)"),
        (format!("{SOLVE_P3}colour = red\n"), "unknown key"),
        (SOLVE_P3.replace("mode = solve\n", ""), "missing mode"),
        (SOLVE_P3.replace("n = 512", "n = lots"), "line 7"),
    ];
    for (i, (cfg, needle)) in cases.iter().enumerate() {
        let o = smx(dir.path(), cfg, &format!("bad{i}"));
        assert_eq!(o.status.code(), Some(1), "{cfg}");
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_smx"))
        .arg(dir.path().join("nope.cfg"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn absolute_source_above_threshold_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = smx(dir.path(), &SOLVE_P3.replace("0.5*C_p", "3.0"), "big");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(G3)"), "{}", stderr(&o));
}

#[test]
fn uncertified_pair_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = SOLVE_P3.replace("p = 3", "p = 2").replace("lambda = 1", "lambda = 1e-3");
    let o = smx(dir.path(), &cfg, "p2");
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("not below M₀⁻³"), "{}", stdout(&o));
    let result = json(&dir.path().join("p2/result.json"));
    assert_eq!(result["certified"], Value::Bool(false));
    assert!(result["energy_u1"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("p2/profiles.csv").exists());
}

#[test]
fn sobolev_mode_prints_constants() {
    let dir = TempDir::new().unwrap();
    let o = smx(dir.path(), "mode = sobolev\np = 3\nn = 512\n", "sob");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for key in ["S ", "C_p", "alpha", "rho"] {
        assert!(out.contains(key), "{out}");
    }
    let result = json(&dir.path().join("sob/result.json"));
    let s = result["sobolev"]["value"].as_f64().unwrap();
    assert!((s - 2.9485).abs() < 5e-3, "{s}");
}

#[test]
fn verify_reports_zero_failures() {
    let dir = TempDir::new().unwrap();
    let cfg = SOLVE_P3.replace("mode = solve", "mode = verify").replace("n = 512", "n = 1024");
    let o = smx(dir.path(), &cfg, "v");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("0 failures"), "{}", stdout(&o));
    let result = json(&dir.path().join("v/result.json"));
    assert_eq!(result["failures"], 0);
}

#[test]
fn verify_failure_exits_with_three() {
    // at this resolution the Pohozaev residual of u₁ is just above 1e-3
    let dir = TempDir::new().unwrap();
    let cfg = SOLVE_P3.replace("mode = solve", "mode = verify");
    let o = smx(dir.path(), &cfg, "v");
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("identities_u1: FAIL"));
}

#[test]
fn sweep_flag_flips_as_lambda_grows() {
    let dir = TempDir::new().unwrap();
    let cfg = "mode = sweep
p = 2
g_family = exponential
g_l2_target = 0.5·C_p
n = 512
lambda_list = [1e-6, 1e-2, 1e2]
";
    let o = smx(dir.path(), cfg, "sw");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("sw/sweep.csv")).unwrap();
    let flags: Vec<String> = rdr.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(flags, ["true", "false", "false"]);
    let result = json(&dir.path().join("sw/result.json"));
    assert_eq!(result["first_failure"].as_f64(), Some(1e-2));
    assert_eq!(result["reappears"], Value::Bool(false));
}
