//! End-to-end tests of the `freeprob` binary: every file or stream the CLI
//! emits must re-parse through the library's own readers, exit codes must
//! track the validation/numeric split, and seeded runs must be reproducible
//! byte for byte.

use std::path::Path;
use std::process::{Command, Output};

use freeprob::measures::read_density_csv;
use freeprob::{Histogram, Measure};

fn freeprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeprob"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be utf-8")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}; stderr: {}",
        stderr_of(out)
    );
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_of(out)).expect("stdout should be JSON")
}

/// Writes a named law to `dir/name.json` through the zoo subcommand and
/// returns the path.
fn zoo_file(dir: &Path, law: &str, name: &str) -> String {
    let path = dir.join(name).display().to_string();
    let out = freeprob(&["zoo", "--law", law, "--out", &path]);
    assert_exit(&out, 0);
    path
}

#[test]
fn nc_enumerate_counts_catalan_and_rejects_n_zero() {
    let out = freeprob(&["nc", "enumerate", "--n", "4"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out).lines().count(), 14, "|NC(4)| = C_4 = 14");

    let json = json_of(&freeprob(&["nc", "enumerate", "--n", "4", "--format", "json"]));
    assert_eq!(json["count"], 14);
    assert_eq!(json["partitions"].as_array().unwrap().len(), 14);

    let bad = freeprob(&["nc", "enumerate", "--n", "0"]);
    assert_exit(&bad, 2);
    assert!(stderr_of(&bad).contains("--n"), "message should name the flag");
}

#[test]
fn nc_mobius_reports_the_alternating_catalan_value_at_the_bottom() {
    let out = freeprob(&["nc", "mobius", "--n", "4", "--format", "json"]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 14);
    let singletons = rows
        .iter()
        .find(|r| r["partition"].as_array().unwrap().len() == 4)
        .expect("the all-singletons partition is in NC(4)");
    assert_eq!(singletons["mobius"], -5, "mu(0_4, 1_4) = -C_3 = -5");

    let text = stdout_of(&freeprob(&["nc", "mobius", "--n", "4"]));
    assert!(text.lines().any(|l| l.contains("[[1],[2],[3],[4]]") && l.contains("-5")));
}

#[test]
fn nc_kreweras_block_counts_satisfy_the_complement_identity() {
    let out = freeprob(&["nc", "kreweras", "--n", "5", "--format", "json"]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 42, "|NC(5)| = C_5 = 42");
    for row in rows {
        let blocks = row["blocks"].as_u64().unwrap();
        let kblocks = row["kreweras_blocks"].as_u64().unwrap();
        assert_eq!(blocks + kblocks, 6, "#pi + #K(pi) = n + 1");
    }

    let single = freeprob(&["nc", "kreweras", "--partition", "[[1,3],[2],[4]]"]);
    assert_exit(&single, 0);
    assert!(stdout_of(&single).contains("[[1,2],[3,4]]"));

    let neither = freeprob(&["nc", "kreweras"]);
    assert_exit(&neither, 2);
}

#[test]
fn cumulant_conversions_round_trip_and_accept_both_sequence_syntaxes() {
    let to = freeprob(&[
        "cumulants",
        "to-moments",
        "--cumulants",
        "[1,1,0.5,-0.25]",
        "--format",
        "json",
    ]);
    assert_exit(&to, 0);
    let moments: Vec<f64> = serde_json::from_value(json_of(&to)["moments"].clone()).unwrap();
    let spec = moments.iter().map(f64::to_string).collect::<Vec<_>>().join(",");

    let back = freeprob(&["cumulants", "from-moments", "--moments", &spec, "--format", "json"]);
    assert_exit(&back, 0);
    let kappa: Vec<f64> = serde_json::from_value(json_of(&back)["cumulants"].clone()).unwrap();
    let expect = [1.0, 1.0, 0.5, -0.25];
    for (k, e) in kappa.iter().zip(expect) {
        assert!((k - e).abs() < 1e-12, "round trip drifted: {kappa:?}");
    }

    // Free convolution adds cumulants; dilation scales them.
    let conv = freeprob(&["cumulants", "convolve", "--a", "0,1", "--b", "0,1", "--format", "json"]);
    let summed: Vec<f64> = serde_json::from_value(json_of(&conv)["cumulants"].clone()).unwrap();
    assert_eq!(summed, vec![0.0, 2.0]);

    let dil = freeprob(&[
        "cumulants", "dilate", "--cumulants", "0,1,0,0", "--t", "2.5", "--format", "json",
    ]);
    let scaled: Vec<f64> = serde_json::from_value(json_of(&dil)["cumulants"].clone()).unwrap();
    assert_eq!(scaled, vec![0.0, 2.5, 0.0, 0.0]);
}

#[test]
fn zoo_measures_feed_convolve_and_its_csv_reparses_as_an_arcsine_density() {
    let dir = tempfile::tempdir().unwrap();
    let a = zoo_file(dir.path(), "bernoulli", "a.json");
    let b = zoo_file(dir.path(), "bernoulli", "b.json");
    let csv = dir.path().join("density.csv").display().to_string();

    let out = freeprob(&[
        "convolve", "--mu", &a, "--nu", &b, "--grid", "-2.5:2.5:801", "--eps", "auto",
        "--out", &csv,
    ]);
    assert_exit(&out, 0);

    let (grid, values) = read_density_csv(std::fs::File::open(&csv).unwrap())
        .expect("the CLI's CSV must reparse through the library reader");
    assert_eq!(grid.len(), 801);
    // Bernoulli ⊞ Bernoulli is the arcsine law: compare well inside (-2, 2).
    for (x, v) in grid.iter().zip(&values) {
        if x.abs() < 1.5 {
            let arcsine = 1.0 / (std::f64::consts::PI * (4.0 - x * x).sqrt());
            assert!((v - arcsine).abs() < 5e-3, "density at {x}: {v} vs {arcsine}");
        }
        assert!(*v >= 0.0, "density must be nonnegative at {x}");
    }
}

#[test]
fn power_json_reports_embed_diagnostics_and_reparse_as_measures() {
    let dir = tempfile::tempdir().unwrap();
    let a = zoo_file(dir.path(), "bernoulli", "a.json");

    let out = freeprob(&["power", "--mu", &a, "--t", "2.5", "--format", "json"]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    assert!(json["diagnostics"]["max_iterations"].as_u64().unwrap() > 0);
    assert!(json["diagnostics"]["max_residual"].as_f64().unwrap() < 1e-6);

    let measure: Measure = serde_json::from_value(json["measure"].clone())
        .expect("embedded measure must reparse through the library schema");
    assert!((measure.mass() - 1.0).abs() < 5e-3, "mass = {}", measure.mass());
    assert!(measure.atoms().is_empty(), "t = 2.5 has no atoms");

    // At t = 1.5 the endpoints keep atoms of weight (2 - t)/2 = 0.25.
    let atom = freeprob(&["power", "--mu", &a, "--t", "1.5", "--format", "json"]);
    assert_exit(&atom, 0);
    let measure: Measure = serde_json::from_value(json_of(&atom)["measure"].clone()).unwrap();
    assert_eq!(measure.atoms().len(), 2);
    for at in measure.atoms() {
        assert!((at.x.abs() - 1.5).abs() < 1e-9);
        assert!((at.w - 0.25).abs() < 5e-3, "atom weight {}", at.w);
    }
    assert!(measure.density_values().iter().all(|v| *v >= 0.0));
}

#[test]
fn invert_recovers_the_semicircle_density_from_its_closed_form() {
    let out = freeprob(&[
        "invert", "--law", "semicircle", "--grid", "-2.2:2.2:441", "--format", "json",
    ]);
    assert_exit(&out, 0);
    let measure: Measure =
        serde_json::from_value(json_of(&out)["measure"].clone()).unwrap();
    let grid = measure.density_grid();
    let values = measure.density_values();
    let mid = grid.iter().position(|x| x.abs() < 1e-9).expect("grid contains 0");
    let target = 1.0 / std::f64::consts::PI;
    assert!((values[mid] - target).abs() < 1e-3, "rho(0) = {}", values[mid]);

    let bad = freeprob(&["invert", "--law", "wigner", "--grid", "-2:2:5"]);
    assert_exit(&bad, 2);
    assert!(stderr_of(&bad).contains("--law"));
}

#[test]
fn zoo_output_parses_through_the_library_measure_schema() {
    let out = freeprob(&["zoo", "--law", "two-point:-0.5,1.5,0.25"]);
    assert_exit(&out, 0);
    let measure: Measure = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(measure.atoms().len(), 2);
    assert!((measure.mass() - 1.0).abs() < 1e-12);

    let listing = freeprob(&["zoo"]);
    assert_exit(&listing, 0);
    assert!(stdout_of(&listing).contains("semicircle"));
}

#[test]
fn gue_estimates_sit_near_the_exact_genus_expansion() {
    let out = freeprob(&[
        "rmt", "gue", "--n", "150", "--trials", "20", "--moments", "4", "--seed", "42",
        "--format", "json",
    ]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    assert_eq!(json["seed"], 42);
    for row in json["rows"].as_array().unwrap() {
        let sigma = row["sigma"].as_f64().unwrap();
        assert!(sigma.abs() < 6.0, "m = {}: {sigma} standard errors off", row["m"]);
    }
}

#[test]
fn wigner_and_haar_report_their_seeds_and_plausible_estimates() {
    let out = freeprob(&[
        "rmt", "wigner", "--n", "120", "--trials", "10", "--moments", "4",
        "--entries", "rademacher", "--seed", "7", "--format", "json",
    ]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    assert_eq!(json["seed"], 7);
    let m2 = json["rows"][1]["mean"].as_f64().unwrap();
    assert!((m2 - 1.0).abs() < 0.05, "second moment {m2} far from 1");

    let haar = freeprob(&[
        "rmt", "haar", "--n", "80", "--trials", "10", "--powers", "2", "--seed", "5",
        "--format", "json",
    ]);
    assert_exit(&haar, 0);
    let json = json_of(&haar);
    for row in json["rows"].as_array().unwrap() {
        assert!(row["re_mean"].as_f64().unwrap().abs() < 0.1);
        assert!(row["im_mean"].as_f64().unwrap().abs() < 0.1);
    }
}

#[test]
fn rotated_sum_is_byte_identical_under_a_fixed_seed_and_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let s = zoo_file(dir.path(), "semicircle", "s.json");
    let b = zoo_file(dir.path(), "bernoulli", "b.json");
    let h1 = dir.path().join("h1.csv").display().to_string();
    let h2 = dir.path().join("h2.csv").display().to_string();
    let h3 = dir.path().join("h3.csv").display().to_string();

    let base = [
        "rmt", "rotated-sum", "--mu-a", &s, "--mu-b", &b, "--n", "200", "--trials", "5",
        "--bins", "60", "--seed", "9",
    ];
    let mut run1: Vec<&str> = base.to_vec();
    run1.extend(["--out", &h1]);
    assert_exit(&freeprob(&run1), 0);
    let mut run2: Vec<&str> = base.to_vec();
    run2.extend(["--out", &h2]);
    assert_exit(&freeprob(&run2), 0);
    let mut run3: Vec<&str> = base.to_vec();
    run3.extend(["--out", &h3, "--serial"]);
    assert_exit(&freeprob(&run3), 0);

    let bytes1 = std::fs::read(&h1).unwrap();
    assert_eq!(bytes1, std::fs::read(&h2).unwrap(), "same seed, same bytes");
    assert_eq!(bytes1, std::fs::read(&h3).unwrap(), "parallel and serial agree");

    let hist = Histogram::read_csv(std::fs::File::open(&h1).unwrap())
        .expect("the CLI's histogram CSV must reparse through the library reader");
    assert_eq!(hist.counts.len(), 60);
    assert_eq!(hist.total, 200 * 5);
}

#[test]
fn verify_genus_passes_at_desk_scale() {
    let out = freeprob(&[
        "rmt", "verify-genus", "--m", "6", "--n", "80", "--trials", "30", "--seed", "11",
        "--format", "json",
    ]);
    assert_exit(&out, 0);
    let json = json_of(&out);
    assert_eq!(json["consistent"], true);
    assert_eq!(json["rows"].as_array().unwrap().len(), 3, "m = 2, 4, 6");

    let odd = freeprob(&["rmt", "verify-genus", "--m", "5", "--n", "50"]);
    assert_exit(&odd, 2);
    assert!(stderr_of(&odd).contains("--m"));
}

#[test]
fn randomized_commands_without_a_seed_still_print_one() {
    let out = freeprob(&["rmt", "gue", "--n", "40", "--trials", "2", "--moments", "2"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("seed = "), "text mode must echo the seed");

    let dir = tempfile::tempdir().unwrap();
    let s = zoo_file(dir.path(), "semicircle", "s.json");
    let d = zoo_file(dir.path(), "dirac:0", "d.json");
    let out = freeprob(&[
        "rmt", "rotated-sum", "--mu-a", &s, "--mu-b", &d, "--n", "50", "--trials", "2",
        "--bins", "20",
    ]);
    assert_exit(&out, 0);
    // The CSV owns stdout here, so the seed must arrive on stderr.
    assert!(stderr_of(&out).contains("seed = "));
    assert!(stdout_of(&out).starts_with("bin_lo,bin_hi,count,density"));
}

#[test]
fn desk_scale_gates_and_validation_errors_name_the_offending_flag() {
    let big_n = freeprob(&["rmt", "gue", "--n", "2500", "--trials", "2"]);
    assert_exit(&big_n, 2);
    let msg = stderr_of(&big_n);
    assert!(msg.contains("--n") && msg.contains("--large"), "{msg}");

    let big_trials = freeprob(&["rmt", "gue", "--n", "40", "--trials", "500"]);
    assert_exit(&big_trials, 2);
    assert!(stderr_of(&big_trials).contains("--trials"));

    let dir = tempfile::tempdir().unwrap();
    let a = zoo_file(dir.path(), "bernoulli", "a.json");
    let missing = dir.path().join("missing.json").display().to_string();
    let gone = freeprob(&["convolve", "--mu", &a, "--nu", &missing]);
    assert_exit(&gone, 2);
    assert!(stderr_of(&gone).contains("--nu"));

    let bad_eps = freeprob(&["convolve", "--mu", &a, "--nu", &a, "--eps", "0.01,0.02"]);
    assert_exit(&bad_eps, 2);
    assert!(stderr_of(&bad_eps).contains("--eps"));

    let bad_grid = freeprob(&["invert", "--law", "semicircle", "--grid", "2:-2:11"]);
    assert_exit(&bad_grid, 2);
    assert!(stderr_of(&bad_grid).contains("--grid"));
}

#[test]
fn purely_atomic_results_refuse_the_csv_and_ship_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = zoo_file(dir.path(), "bernoulli", "a.json");
    let d = zoo_file(dir.path(), "dirac:1", "d.json");

    let text = freeprob(&["convolve", "--mu", &a, "--nu", &d]);
    assert_exit(&text, 2);
    assert!(stderr_of(&text).contains("--format json"));

    let json = freeprob(&["convolve", "--mu", &a, "--nu", &d, "--format", "json"]);
    assert_exit(&json, 0);
    let measure: Measure =
        serde_json::from_value(json_of(&json)["measure"].clone()).unwrap();
    let mut xs: Vec<f64> = measure.atoms().iter().map(|at| at.x).collect();
    xs.sort_by(f64::total_cmp);
    assert_eq!(xs, vec![0.0, 2.0], "Bernoulli shifted by a point mass at 1");
}
