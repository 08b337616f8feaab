use std::path::PathBuf;

use sl3green::cli::{run, EXIT_CHECKS_FAILED, EXIT_CONFIG, EXIT_NUMERICAL};
use sl3green::green::{closed_form_parts, DENOMINATOR_THRESHOLD};
use sl3green::potential::{PotentialSpec, Segment, Tail, Wavenumber};

fn potential(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "potentials", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn sl3green(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("sl3green").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn coefficient_rows() {
    let slab = potential("slab.toml");
    let (code, out, _) = sl3green(&["coefficients", "--potential", &slab, "--k", "1", "--interval", "0:1", "--interval", "-1:2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x1,x2,k_re,k_im,tau_re,tau_im,r_right_re,r_right_im,r_left_re,r_left_im");
    assert_eq!(lines.len(), 3);
    // Extending the interval into vacuum changes only phases.
    let row = |i: usize| -> Vec<f64> { lines[i].split(',').map(|v| v.parse().unwrap()).collect() };
    let modulus = |r: &[f64], j: usize| r[j].hypot(r[j + 1]);
    for j in [4, 6, 8] {
        assert!((modulus(&row(1), j) - modulus(&row(2), j)).abs() < 1e-12);
    }
}

#[test]
fn green_output_is_byte_stable() {
    let kink = potential("kink.toml");
    let args = ["green", "--potential", &kink, "--k", "1.3,0.1", "--k", "0.7", "--grid", "-1.5:1.5:7", "--route", "C", "--cross-check"];
    let (code, first, _) = sl3green(&args);
    assert_eq!(code, 0);
    assert_eq!(first, sl3green(&args).1);
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,y,k_re,k_im,value_re,value_im,route,truncation_loss,abs_diff_vs_B,status"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 49);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[6], "C");
        assert_eq!(cols[9], "ok");
        let (loss, diff): (f64, f64) = (cols[7].parse().unwrap(), cols[8].parse().unwrap());
        assert!(diff <= 1e-8 + loss, "{row}");
    }
}

#[test]
fn out_file_and_jsonl_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.jsonl");
    let slab = potential("slab.toml");
    let (code, stdout, _) = sl3green(&[
        "green", "--potential", &slab, "--k", "1", "--x-grid", "0:1:3", "--y-grid", "0.5:0.5:1", "--format", "jsonl",
        "--header", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["meta"]["command"], "green");
    assert_eq!(lines[1]["route"], "B");
    assert_eq!(lines[2]["y"], 0.5);
}

#[test]
fn config_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[segments]]\nx_start = 1.0\nx_end = \"two\"\nprofile = { type = \"constant\", params = { c = 1.0 } }\n").unwrap();
    let (code, _, err) = sl3green(&["green", "--potential", bad.to_str().unwrap(), "--k", "1", "--grid", "0:1:2"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("segments[0].x_end"), "{err}");

    let slab = potential("slab.toml");
    for args in [
        vec!["green", "--potential", &slab, "--k", "1", "--grid", "1:0:3"],
        vec!["green", "--potential", &slab, "--k", "1,x", "--grid", "0:1:3"],
        vec!["green", "--potential", "/nonexistent.toml", "--k", "1", "--grid", "0:1:3"],
        vec!["frobnicate"],
    ] {
        assert_eq!(sl3green(&args).0, EXIT_CONFIG, "{args:?}");
    }
    assert_eq!(sl3green(&["--help"]).0, 0);
}

#[test]
fn born_route_on_constant_tails_is_a_numerical_error() {
    let kink = potential("kink.toml");
    let (code, _, err) = sl3green(&["green", "--potential", &kink, "--k", "1", "--grid", "0:1:2", "--route", "born"]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("DomainViolation"), "{err}");
}

#[test]
fn bound_state_row_is_flagged() {
    let spec =
        PotentialSpec::new(vec![Segment::constant(0.0, 3.0, 0.0)], Tail::Constant { c: 2.0 }, Tail::Constant { c: -2.0 })
            .unwrap();
    let d = |kr: f64| closed_form_parts(&spec, 1.0, 1.0, Wavenumber::from_parts(kr, 0.0).unwrap()).unwrap().denominator;
    let (mut a, mut b) = (0.85, 0.95);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if d(m).im > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    assert!(d(a).norm() < DENOMINATOR_THRESHOLD);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("well.toml");
    std::fs::write(
        &file,
        "left_tail = { type = \"constant\", c = 2.0 }\nright_tail = { type = \"constant\", c = -2.0 }\n\n\
         [[segments]]\nx_start = 0.0\nx_end = 3.0\nprofile = { type = \"constant\", params = { c = 0.0 } }\n",
    )
    .unwrap();
    let k = format!("{a:?}");
    let (code, out, _) = sl3green(&["green", "--potential", file.to_str().unwrap(), "--k", &k, "--k", "0.5", "--grid", "1:1:1"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].ends_with(",NaN,NaN,B,NaN,DenominatorZero"), "{}", rows[0]);
    assert!(rows[1].ends_with(",ok"), "{}", rows[1]);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sl3green");
    let status = |args: &[&str]| std::process::Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["verify"]), Some(0));
    assert_eq!(status(&["verify", "--inject-corruption", "generator"]), Some(EXIT_CHECKS_FAILED));
    assert_eq!(status(&["green"]), Some(EXIT_CONFIG));
}
