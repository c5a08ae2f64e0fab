use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splineproj"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn order_one_lebesgue_constant_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["lebesgue", "-k", "1", "--uniform", "32", "--periodic"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&tmp.path().join("lebesgue.json"));
    assert_eq!(v["format"], "splineproj-v1");
    assert_eq!(v["result"]["lebesgue"], 1.0);
    assert_eq!(v["config"]["command"]["command"], "lebesgue");
}

#[test]
fn csv_files_start_with_format_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["decay", "-k", "2", "--uniform", "64"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("decay.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# splineproj-v1"));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next(), Some("distance,envelope,bound"));
    let v = json(&tmp.path().join("decay.json"));
    let g = v["result"]["fit"]["gamma_hat"].as_f64().unwrap();
    assert!(g > 0.25 && g < 0.3, "{g}");
}

#[test]
fn invalid_knot_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let knots = tmp.path().join("bad.knots");
    std::fs::write(&knots, "k 3 clamped\n0\n0\n0\n0.5\n0.5\n0.5\n0.5\n1\n1\n1\n").unwrap();
    let o = run(&["gram", "--knots", knots.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("MultiplicityViolation"));
}

#[test]
fn knot_file_header_sets_order_and_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let knots = tmp.path().join("p.knots");
    std::fs::write(&knots, "# four knots\nk 2 periodic\n0.0\n0.2\n0.5\n0.7\n").unwrap();
    let k = knots.to_str().unwrap();
    let o = run(&["gram", "--knots", k], &tmp.path().join("a"));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&tmp.path().join("a/gram.json"));
    assert_eq!(v["result"]["dim"], 4);
    assert_eq!(v["result"]["metric"], "cyclic");
    let clash = run(&["gram", "--knots", k, "--clamped"], &tmp.path().join("b"));
    assert_eq!(clash.status.code(), Some(2));
    let clash = run(&["gram", "--knots", k, "-k", "3"], &tmp.path().join("c"));
    assert_eq!(clash.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["gram", "--uniform", "8"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["gram", "-k", "2"], tmp.path()).status.code(), Some(2));
    assert_eq!(
        run(&["gram", "-k", "2", "--uniform", "8", "--random", "8"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["lebesgue", "-k", "2", "--uniform", "8", "--grid", "2"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["lemma2", "-k", "2", "--uniform", "8"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["project", "-k", "2", "--uniform", "8", "--fn", "cosh"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["gram", "-k", "2", "--random", "8", "--min-ratio", "2"], tmp.path()).status.code(),
        Some(2)
    );
    assert_eq!(run(&["nonsense"], tmp.path()).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["decay", "-k", "2", "--uniform", "5", "--periodic"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DegenerateFit"));
    let o = run(&["lebesgue", "-k", "2", "--uniform", "5000"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn project_writes_plot_script() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["project", "-k", "3", "--uniform", "16", "--periodic", "--fn", "hat"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let listed = String::from_utf8_lossy(&o.stdout);
    for name in ["project.csv", "project.gp", "project.json"] {
        assert!(tmp.path().join(name).exists());
        assert!(listed.contains(name));
    }
    let v = json(&tmp.path().join("project.json"));
    assert_eq!(v["result"]["coefficients"].as_array().unwrap().len(), 16);
    assert!(v["result"]["sampled_sup_error"].as_f64().unwrap() < 0.05);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--orders", "2,3", "--ns", "16,32", "--trials", "4", "--seed", "9"];
    assert!(run(&args, tmp.path()).status.success());
    let first = std::fs::read(tmp.path().join("ensemble.csv")).unwrap();
    assert!(run(&args, tmp.path()).status.success());
    assert_eq!(first, std::fs::read(tmp.path().join("ensemble.csv")).unwrap());
}

fn matrix(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn periodic_hat_gram_is_circulant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["gram", "-k", "2", "--uniform", "8", "--periodic"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let g = matrix(&tmp.path().join("gram.txt"));
    assert_eq!(g.len(), 8);
    for i in 0..8 {
        for j in 0..8 {
            assert!((g[i][j] - g[(i + 1) % 8][(j + 1) % 8]).abs() < 1e-15);
        }
    }
    // hats of width 2h with h = 1/8: 2h/3 on the diagonal, h/6 next to it
    assert!((g[0][0] - 1.0 / 12.0).abs() < 1e-15);
    assert!((g[0][1] - 1.0 / 48.0).abs() < 1e-15);
    assert!((g[0][7] - 1.0 / 48.0).abs() < 1e-15);
    assert_eq!(g[0][2], 0.0);
}

#[test]
fn order_one_knot_file_gives_diagonal_gram() {
    let tmp = tempfile::tempdir().unwrap();
    let knots = tmp.path().join("k1.knots");
    std::fs::write(&knots, "k 1 clamped\n0\n0.1\n0.35\n1\n").unwrap();
    let o = run(&["gram", "--knots", knots.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(0));
    let g = matrix(&tmp.path().join("out/gram.txt"));
    let lens = [0.1, 0.25, 0.65];
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { lens[i] } else { 0.0 };
            assert!((g[i][j] - want).abs() < 1e-15);
        }
    }
}

#[test]
fn converge_sin_errors_decrease() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["converge", "-k", "3", "--fn", "sin", "--ns", "16,32,64,128"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&tmp.path().join("converge.json"));
    let rows = v["result"]["table"]["rows"].as_array().unwrap();
    let sup: Vec<f64> = rows.iter().map(|r| r["sup_error"].as_f64().unwrap()).collect();
    assert!(sup.windows(2).all(|w| w[1] < w[0]), "{sup:?}");
}

#[test]
fn ensemble_with_fifty_trials_repeats_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["ensemble", "-k", "2", "--trials", "50", "--seed", "7"];
    assert!(run(&args, tmp.path()).status.success());
    let csv = std::fs::read(tmp.path().join("ensemble.csv")).unwrap();
    let js = std::fs::read(tmp.path().join("ensemble.json")).unwrap();
    assert!(run(&args, tmp.path()).status.success());
    assert_eq!(csv, std::fs::read(tmp.path().join("ensemble.csv")).unwrap());
    assert_eq!(js, std::fs::read(tmp.path().join("ensemble.json")).unwrap());
}
