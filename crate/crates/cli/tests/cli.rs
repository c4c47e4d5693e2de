use std::fs;
use std::path::{Path, PathBuf};

use evoquant::table::{parse_table, TableKind};
use evoquant::{run_cli_with, EXIT_INPUT, EXIT_OK};
use serde_json::Value;
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("evoquant").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write_game(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn fixtures() -> (TempDir, String, String, String) {
    let dir = TempDir::new().unwrap();
    let pd = write_game(dir.path(), "pd.json", r#"{"n":2,"payoff":[[3,0],[5,1]]}"#);
    let hd = write_game(dir.path(), "hawkdove.json", r#"{"n":2,"payoff":[[-1,2],[0,1]],"labels":["Hawk","Dove"]}"#);
    let rps =
        write_game(dir.path(), "rps.json", r#"{"n":3,"payoff":[[0,-1,1],[1,0,-1],[-1,1,0]],"labels":["R","P","S"]}"#);
    (dir, pd, hd, rps)
}

fn out_path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn hawk_dove_has_one_evolutionarily_stable_equilibrium() {
    let (_dir, _, hd, _) = fixtures();
    let o = run(&["equilibria", "--game", &hd]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    let s: Vec<f64> = reports[0]["strategy"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((s[0] - 0.5).abs() < 1e-9 && (s[1] - 0.5).abs() < 1e-9);
    assert_eq!(reports[0]["is_ess"], Value::Bool(true));
    assert_eq!(reports[0]["ess_seed"], 0);
    assert_eq!(reports[0]["support_labels"], serde_json::json!(["Hawk", "Dove"]));
}

#[test]
fn equilibria_output_depends_only_on_inputs() {
    let (_dir, _, _, rps) = fixtures();
    let a = run(&["--seed", "7", "equilibria", "--game", &rps, "--mutants", "200"]);
    let b = run(&["equilibria", "--game", &rps, "--mutants", "200", "--seed", "7"]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v[0]["is_ess"], Value::Bool(false));
    assert_eq!(v[0]["ess_seed"], 7);
    assert_eq!(v[0]["ess_mutant_samples"], 200);
}

#[test]
fn compare_prisoners_dilemma_forms_agree() {
    let (_dir, pd, _, _) = fixtures();
    let o = run(&["compare", "--game", &pd, "--x0", "0.5,0.5", "--t-end", "50", "--dt", "0.001"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert!(v["max_divergence"].as_f64().unwrap() < 1e-6);
    assert!(v["lax"]["max_projector_defect"].as_f64().unwrap() < 1e-6);
    assert!(v["quantum"]["max_purity_drift"].as_f64().unwrap() < 1e-6);
}

#[test]
fn simplex_violation_in_start_is_rejected() {
    let (dir, pd, _, _) = fixtures();
    let out = out_path(&dir, "t.csv");
    let o = run(&["simulate", "--game", &pd, "--x0", "0.5,0.6", "--t-end", "1", "--dt", "0.01", "--out", &out]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("--x0") && o.stderr.contains("sum"), "{}", o.stderr);
    assert!(!Path::new(&out).exists());

    let o = run(&["simulate", "--game", &pd, "--x0", "0.2,0.3,0.5", "--t-end", "1"]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("--x0"), "{}", o.stderr);
}

#[test]
fn input_errors_exit_with_code_two() {
    let (dir, pd, _, _) = fixtures();
    let ragged = write_game(dir.path(), "ragged.json", r#"{"n":2,"payoff":[[3,0],[5]]}"#);
    let broken = write_game(dir.path(), "broken.json", r#"{"n":2,"payoff":"#);
    let missing = out_path(&dir, "missing.json");
    for (args, needle) in [
        (vec!["equilibria", "--game", ragged.as_str()], "payoff"),
        (vec!["equilibria", "--game", broken.as_str()], "malformed JSON"),
        (vec!["equilibria", "--game", missing.as_str()], "cannot read"),
        (vec!["simulate", "--game", pd.as_str(), "--x0", "0.5,0.5", "--t-end", "-1"], "--t-end"),
        (vec!["simulate", "--game", pd.as_str(), "--x0", "0.5,0.5", "--t-end", "1", "--stride", "0"], "--stride"),
        (vec!["thermalize", "--temps", "1,2", "--weights", "1,0", "--kappa", "0.3", "--eps", "1e-3"], "weight"),
        (vec!["thermalize", "--temps", "1,2", "--kappa", "0.9", "--eps", "1e-3"], "kappa"),
        (vec!["frobnicate"], "frobnicate"),
    ] {
        let o = run(&args);
        assert_eq!(o.code, EXIT_INPUT, "{args:?}");
        assert!(o.stderr.contains(needle), "{args:?}: {}", o.stderr);
    }
}

#[test]
fn simulate_writes_each_layout() {
    let (dir, pd, _, _) = fixtures();
    for (form, kind, columns) in
        [("vector", TableKind::Vector, 3), ("lax", TableKind::Matrix, 5), ("quantum", TableKind::Operator, 9)]
    {
        let out = out_path(&dir, &format!("{form}.csv"));
        let o = run(&[
            "simulate", "--game", &pd, "--x0", "0.5,0.5", "--t-end", "1", "--dt", "0.01", "--form", form, "--stride",
            "10", "--out", &out,
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        let bytes = fs::read(&out).unwrap();
        let table = parse_table(&bytes).unwrap();
        assert_eq!(table.kind, kind);
        assert_eq!(table.header().len(), columns);
        assert_eq!(table.times.len(), 11);
        assert!((table.times[10] - 1.0).abs() < 1e-12);
        assert_eq!(table.populations(0), vec![0.5, 0.5]);
    }
}

#[test]
fn csv_round_trips_in_memory_values() {
    use evoquant::config::{Form, RunConfig};
    let (dir, pd, _, _) = fixtures();
    let game = evoquant::load_game(Path::new(&pd)).unwrap();
    for form in [Form::Vector, Form::Lax, Form::Quantum] {
        let config = RunConfig::new(PathBuf::from(&pd), &[0.3, 0.7], 2.0, 0.01, form, 1.0, None, 7, 0).unwrap();
        let table = evoquant::commands::simulate(&game, &config).unwrap();
        let path = dir.path().join("rt.csv");
        table.write(fs::File::create(&path).unwrap()).unwrap();
        let back = parse_table(&fs::read(&path).unwrap()).unwrap();
        assert_eq!(back, table, "{form:?}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (dir, _, _, rps) = fixtures();
    let mut outputs = Vec::new();
    for round in 0..2 {
        let out = out_path(&dir, &format!("q{round}.csv"));
        let o = run(&[
            "simulate",
            "--game",
            &rps,
            "--x0",
            "0.2,0.3,0.5",
            "--t-end",
            "2",
            "--form",
            "quantum",
            "--out",
            &out,
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn entropy_appends_columns() {
    let (dir, pd, _, rps) = fixtures();
    let traj = out_path(&dir, "v.csv");
    let ent = out_path(&dir, "e.csv");
    assert_eq!(
        run(&["simulate", "--game", &pd, "--x0", "0.5,0.5", "--t-end", "200", "--stride", "1000", "--out", &traj]).code,
        0
    );
    let o = run(&["entropy", "--traj", &traj, "--out", &ent]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let text = fs::read_to_string(&ent).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x_1,x_2,shannon");
    let values: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!((values[0][3] - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(values.last().unwrap()[3] < 1e-3);
    // Original columns are carried through unchanged.
    let original = fs::read_to_string(&traj).unwrap();
    for (a, b) in original.lines().skip(1).zip(text.lines().skip(1)) {
        assert!(b.starts_with(a));
    }

    let traj = out_path(&dir, "q.csv");
    assert_eq!(
        run(&[
            "simulate",
            "--game",
            &rps,
            "--x0",
            "0.2,0.3,0.5",
            "--t-end",
            "5",
            "--form",
            "quantum",
            "--stride",
            "100",
            "--out",
            &traj
        ])
        .code,
        0
    );
    let o = run(&["entropy", "--traj", &traj]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.lines().next().unwrap().ends_with(",shannon,von_neumann"));
    for line in o.stdout.lines().skip(1) {
        let vn: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(vn.abs() < 1e-6);
    }

    let junk = write_game(dir.path(), "junk.csv", "a,b\n1,2\n");
    let o = run(&["entropy", "--traj", &junk]);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("malformed CSV"));
}

#[test]
fn thermalize_reports_coarsening() {
    let o = run(&["thermalize", "--temps", "300,200", "--kappa", "0.5", "--eps", "1e-3"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stderr.contains("qualitative illustration"));
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "step,cluster_count,t_min,t_max,t_mean");
    assert!(lines[1].starts_with("0,2,"));
    let second: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(&second[2..4], &[225.0, 275.0]);
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(last[1], 1.0);
    assert!((last[4] - 250.0).abs() < 1e-9);

    let o = run(&["thermalize", "--temps", "-10,10,30", "--kappa", "0.1", "--eps", "1e-3", "--max-steps", "3"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stderr.contains("more than one cluster"));
    assert_eq!(o.stdout.lines().count(), 5);
}

#[test]
fn help_goes_to_stdout() {
    let o = run(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    for sub in ["simulate", "equilibria", "compare", "entropy", "thermalize"] {
        assert!(o.stdout.contains(sub));
    }
}

#[test]
fn numerical_abort_exits_with_code_three() {
    let dir = TempDir::new().unwrap();
    let stiff = write_game(dir.path(), "stiff.json", r#"{"n":2,"payoff":[[1000,0],[0,0]]}"#);
    let o = run(&["simulate", "--game", &stiff, "--x0", "0.5,0.5", "--t-end", "10", "--dt", "1"]);
    assert_eq!(o.code, evoquant::EXIT_NUMERICAL, "{}", o.stderr);
    assert!(o.stderr.contains("t = "), "{}", o.stderr);
}
