//! Acceptance criteria, one PASS/FAIL line each. Runs without the test harness so the
//! lines are never captured; exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use sl3green::born::{born_series, QuadratureConfig};
use sl3green::error::Error;
use sl3green::green::{
    green_closed_form, green_negative_power, green_polyrep, green_polyrep_asymmetric, green_power, green_product,
    jump_condition_check, SeriesValue,
};
use sl3green::polyrep::{exact_commutation_check, float_commutation_check, inner_product_integral_check,
    inverse_identities_check};
use sl3green::potential::{PotentialSpec, Wavenumber};
use sl3green::sl3::{commutation_table_check, embed_transfer, gauss_factorization_check, green_wronskian,
    GeneratorSet3};
use sl3green::transfer::{self, evolution, scattering_coefficients};
use sl3green::verify::{random_pair, random_slab_potential, random_wavenumber, seeded_rng};

const SEED: u64 = 20_240_607;
const POTENTIALS: usize = 50;
const K_SAMPLES: usize = 10;
const PAIRS: usize = 5;
const CUTOFF: usize = 64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Sample {
    spec: PotentialSpec,
    k: Wavenumber,
    pairs: Vec<(f64, f64)>,
}

/// 50 seeded slab potentials × 10 wavenumbers, each with 5 point pairs.
fn samples() -> Vec<Sample> {
    let mut rng = seeded_rng(SEED);
    let mut out = Vec::new();
    for _ in 0..POTENTIALS {
        let spec = random_slab_potential(&mut rng);
        for _ in 0..K_SAMPLES {
            let k = random_wavenumber(&mut rng);
            let pairs = (0..PAIRS).map(|_| random_pair(&spec, &mut rng)).collect();
            out.push(Sample { spec: spec.clone(), k, pairs });
        }
    }
    out
}

fn window(spec: &PotentialSpec) -> (f64, f64) {
    let (a, b) = spec.support().unwrap_or((-1.0, 1.0));
    (a - 0.25, b + 0.25)
}

fn b(s: &Sample, x: f64, y: f64) -> Complex64 {
    green_closed_form(&s.spec, x, y, s.k).expect("closed form").value
}

fn algebra() -> Outcome {
    let fundamental = commutation_table_check(&GeneratorSet3::fundamental()).max_residual();
    let exact = exact_commutation_check(CUTOFF, 8).max_residual();
    let float = float_commutation_check(CUTOFF, 8).max_residual();
    outcome(
        fundamental <= 1e-13 && exact == 0.0 && float <= 1e-13,
        format!("3x3 {fundamental:.1e}, polynomial exact {exact:.1e}, float {float:.1e} (p <= 62, q <= 8, P = 64)"),
    )
}

fn gauss(all: &[Sample]) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in all {
        let (a, bb) = window(&s.spec);
        let m = evolution(&s.spec, a, bb, s.k).expect("evolution");
        let t = scattering_coefficients(&m).expect("coefficients");
        worst = worst.max(gauss_factorization_check(&t, &embed_transfer(&m)).expect("factorization"));
    }
    outcome(worst <= 1e-9, format!("max residual {worst:.2e} over {} (potential, k) samples", all.len()))
}

fn free_space() -> Outcome {
    let vacuum = PotentialSpec::vacuum();
    let mut worst: f64 = 0.0;
    for k in [(1.0, 0.0), (2.5, 0.4), (0.3, 1.2)] {
        let k = Wavenumber::from_parts(k.0, k.1).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                let (x, y) = (-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64);
                let g = green_closed_form(&vacuum, x, y, k).unwrap().value;
                worst = worst.max((g - (Complex64::i() * k.value() * (x - y).abs()).exp()).norm());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} on a 21x21 grid, 3 k values"))
}

fn routes(all: &[Sample]) -> Outcome {
    let (mut ab, mut cb, mut asym, mut worst_loss) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut evaluated, mut overflow) = (0, 0);
    for s in all {
        for &(x, y) in &s.pairs {
            let bv = b(s, x, y);
            let a = green_wronskian(&s.spec, x, y, s.k).expect("route A").value;
            ab = ab.max((a - bv).norm() / bv.norm().max(1.0));
            match green_polyrep(&s.spec, x, y, s.k, CUTOFF) {
                Ok(c) => {
                    evaluated += 1;
                    cb = cb.max((c.value - bv).norm() - c.truncation_loss);
                    worst_loss = worst_loss.max(c.truncation_loss);
                    let ca = green_polyrep_asymmetric(&s.spec, x, y, s.k, CUTOFF).expect("asymmetric route");
                    asym = asym.max((ca.value - c.value).norm());
                }
                Err(Error::TruncationOverflow { .. }) => overflow += 1,
                Err(e) => panic!("route C: {e}"),
            }
        }
    }
    outcome(
        ab <= 1e-8 && cb <= 1e-8 && asym <= 1e-10 && overflow == 0,
        format!(
            "|A-B| {ab:.2e}, |C-B| - loss {cb:.2e} (largest loss {worst_loss:.1e}), |C-asym - C| {asym:.2e}; \
             {evaluated} route-C points, {overflow} truncation overflows"
        ),
    )
}

fn coincident(all: &[Sample]) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in all {
        for &(x, _) in &s.pairs {
            let rl = transfer::r_left_to_plus_infinity(&s.spec, x, s.k).unwrap();
            let rr = transfer::r_right_from_minus_infinity(&s.spec, x, s.k).unwrap();
            worst = worst.max((b(s, x, x) - (1.0 + rl) * (1.0 + rr) / (1.0 - rl * rr)).norm());
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

/// Single constant slabs of several strengths, seeded k and point pairs.
fn slab_samples() -> Vec<Sample> {
    let mut rng = seeded_rng(SEED + 1);
    let mut out = Vec::new();
    for (width, c) in [(1.0, 0.7), (0.5, -1.2), (2.0, 0.3), (1.0, -0.4)] {
        let spec = PotentialSpec::slabs(-width / 2.0, &[(width, c)]).unwrap();
        for _ in 0..K_SAMPLES {
            let k = random_wavenumber(&mut rng);
            let pairs = (0..3).map(|_| random_pair(&spec, &mut rng)).collect();
            out.push(Sample { spec: spec.clone(), k, pairs });
        }
    }
    out
}

/// Doubles the cutoff from the standard one until the truncation estimate drops below
/// `target`. Returns the value and the cutoff used, or None if P = 1024 is not enough.
fn series(target: f64, f: impl Fn(usize) -> sl3green::Result<SeriesValue>) -> Option<(Complex64, usize)> {
    let mut cutoff = CUTOFF;
    while cutoff <= 1024 {
        match f(cutoff) {
            Ok(v) if v.truncation_loss <= target => return Some((v.value, cutoff)),
            Ok(_) | Err(Error::TruncationOverflow { .. }) => cutoff *= 2,
            Err(e) => panic!("series evaluation: {e}"),
        }
    }
    None
}

/// Smallest backward distance along y1 → … → yn → x1 → … → xn over factor orderings,
/// with each factor taken as (larger, smaller).
fn min_backtrack(pts: &[(f64, f64)]) -> f64 {
    let perms: &[&[usize]] = if pts.len() == 2 {
        &[&[0, 1], &[1, 0]]
    } else {
        &[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2], &[1, 2, 0], &[2, 0, 1], &[2, 1, 0]]
    };
    perms
        .iter()
        .map(|perm| {
            let ys = perm.iter().map(|&i| pts[i].0.min(pts[i].1));
            let xs = perm.iter().map(|&i| pts[i].0.max(pts[i].1));
            let path: Vec<f64> = ys.chain(xs).collect();
            path.windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

fn powers_and_products() -> Outcome {
    let (mut pow, mut p2, mut p3, mut neg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut evaluated, mut excused, mut unexplained, mut max_cutoff) = (0, 0, 0, 0);
    // A product may refuse only when its path must run backwards far enough that the
    // Möbius coefficients grow like exp(2 Im k · backtrack) > e².
    let mut record = |worst: &mut f64, got: Option<(Complex64, usize)>, expected: Complex64, growth: f64| match got {
        Some((v, p)) => {
            evaluated += 1;
            max_cutoff = max_cutoff.max(p);
            *worst = worst.max((v - expected).norm());
        }
        None if growth > 1.0 => excused += 1,
        None => unexplained += 1,
    };
    for s in slab_samples() {
        let (x, y) = s.pairs[0];
        let bv = b(&s, x, y);
        let im = s.k.value().im;
        for n in 2..=3 {
            record(&mut pow, series(1e-8, |p| green_power(&s.spec, x, y, s.k, n, p)), bv.powu(n), 0.0);
        }
        let pts = &s.pairs[..3];
        let e2 = b(&s, pts[0].0, pts[0].1) * b(&s, pts[1].0, pts[1].1);
        let e3 = e2 * b(&s, pts[2].0, pts[2].1);
        let g2 = im * min_backtrack(&pts[..2]);
        let g3 = im * min_backtrack(pts);
        record(&mut p2, series(1e-8, |p| green_product(&s.spec, &pts[..2], s.k, p)), e2, g2);
        record(&mut p3, series(1e-7, |p| green_product(&s.spec, pts, s.k, p)), e3, g3);
        record(&mut neg, series(1e-7, |p| green_negative_power(&s.spec, x, y, s.k, 1, p)), bv.inv(), 0.0);
    }
    outcome(
        pow <= 1e-7 && p2 <= 1e-7 && p3 <= 1e-6 && neg <= 1e-6 && unexplained == 0,
        format!(
            "powers {pow:.2e}, product-2 {p2:.2e}, product-3 {p3:.2e}, negative power {neg:.2e}; \
             {evaluated} evaluated (largest cutoff P = {max_cutoff}), {excused} products refused as divergent \
             (Im k x backtrack > 1), {unexplained} other refusals"
        ),
    )
}

fn inverse_operators() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for r in [0.0, 0.3, 0.8] {
        for j in 0..8 {
            let c = Complex64::from_polar(r, j as f64 * std::f64::consts::FRAC_PI_4);
            worst = worst.max(inverse_identities_check(c, 400).unwrap().max_residual());
            count += 1;
        }
    }
    outcome(worst <= 1e-12, format!("max residual {worst:.2e} over {count} values of c, 1 <= n < m <= 6, P = 400"))
}

fn bounds(all: &[Sample]) -> Outcome {
    let mut worst: f64 = 0.0;
    for s in all {
        let (a, bb) = window(&s.spec);
        let t = scattering_coefficients(&evolution(&s.spec, a, bb, s.k).unwrap()).unwrap();
        worst = worst.max(t.r_right.norm()).max(t.r_left.norm());
        for &(x, y) in &s.pairs {
            let (lo, hi) = (x.min(y), x.max(y));
            let t = transfer::coefficients_between(&s.spec, lo, hi, s.k).unwrap();
            worst = worst.max(t.r_right.norm()).max(t.r_left.norm());
            worst = worst.max(transfer::r_left_to_plus_infinity(&s.spec, hi, s.k).unwrap().norm());
            worst = worst.max(transfer::r_right_from_minus_infinity(&s.spec, lo, s.k).unwrap().norm());
        }
    }
    outcome(worst <= 1.0 + 1e-12, format!("max |R| = {worst:.15}"))
}

fn jump() -> Outcome {
    let k = Wavenumber::from_parts(1.0, 0.2).unwrap();
    let cases = [
        ("slab interior", PotentialSpec::slabs(0.0, &[(1.0, 0.8)]).unwrap(), 0.5),
        ("two slabs", PotentialSpec::slabs(-0.5, &[(0.6, 1.5), (0.7, -1.0)]).unwrap(), 0.4),
        ("vacuum", PotentialSpec::vacuum(), 0.0),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, spec, y) in cases {
        let r1 = jump_condition_check(&spec, y, k, 1e-3).unwrap();
        let r2 = jump_condition_check(&spec, y, k, 5e-4).unwrap();
        let ratio = r1 / r2;
        pass &= r1 <= 1e-4 && (3.2..=4.8).contains(&ratio);
        detail.push(format!("{name}: {r1:.2e}, ratio {ratio:.2}"));
    }
    outcome(pass, detail.join("; "))
}

fn born() -> Outcome {
    let start = Instant::now();
    let k = Wavenumber::from_parts(1.0, 0.0).unwrap();
    let err = |c: f64| {
        let spec = PotentialSpec::slabs(0.0, &[(1.0, c)]).unwrap();
        let bv = green_closed_form(&spec, 0.8, 0.3, k).unwrap().value;
        let (g, _) = born_series(&spec, 0.8, 0.3, k, 2, &QuadratureConfig::default()).unwrap();
        (g.value - bv).norm()
    };
    let ratio = err(0.1) / err(0.05);
    let secs = start.elapsed().as_secs_f64();
    outcome((5.6..=11.2).contains(&ratio) && secs <= 30.0, format!("error ratio {ratio:.3} (c L = 0.1, k = 1), {secs:.2} s"))
}

fn inner_product_integral() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in 0..=4 {
        for q in 0..=4 {
            if p + q >= 1 {
                let (quad, formula) = inner_product_integral_check(p, q).unwrap();
                worst = worst.max((quad - formula).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max deviation {worst:.2e} for p, q <= 4"))
}

fn negative_control() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_sl3green");
    let run = |extra: &[&str]| {
        Command::new(bin).arg("verify").args(["--random", "1"]).args(extra).output().expect("run binary").status.code()
    };
    let clean = run(&[]);
    let generator = run(&["--inject-corruption", "generator"]);
    let coefficient = run(&["--inject-corruption", "coefficient"]);
    outcome(
        clean == Some(0) && generator == Some(1) && coefficient == Some(1),
        format!("exit codes: clean {clean:?}, corrupted generator {generator:?}, corrupted coefficient {coefficient:?}"),
    )
}

fn main() {
    let start = Instant::now();
    let all = samples();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("algebra suite", Box::new(algebra)),
        ("Gauss factorization", Box::new(|| gauss(&all))),
        ("free-space Green function", Box::new(free_space)),
        ("route equivalence", Box::new(|| routes(&all))),
        ("coincident-point closed form", Box::new(|| coincident(&all))),
        ("powers and products", Box::new(powers_and_products)),
        ("inverse-operator identities", Box::new(inverse_operators)),
        ("reflection bounds", Box::new(|| bounds(&all))),
        ("jump condition", Box::new(jump)),
        ("Born scaling", Box::new(born)),
        ("inner-product integral", Box::new(inner_product_integral)),
        ("negative control", Box::new(negative_control)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
