//! The identity suite: each machine-checkable relation, run on a given potential and
//! on seeded random slab potentials, reduced to one residual per check.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::born::{born_series, QuadratureConfig};
use crate::error::{Error, Result};
use crate::green::{
    green_closed_form, green_negative_power, green_polyrep, green_polyrep_asymmetric, green_power, green_product,
    jump_condition_check,
};
use crate::polyrep::{
    adjoint_check, exact_commutation_check, float_commutation_check, inner_product_integral_check,
    inverse_identities_check, ladder_identities_check,
};
use crate::potential::{PotentialSpec, Wavenumber};
use crate::sl3::{commutation_table_check, embed_transfer, gauss_factorization_check_with, green_wronskian,
    intertwiner_check_with, GeneratorSet3};
use crate::transfer::{self, compose, evolution, invert, riccati_coefficients, ScatteringTriple};

/// Cutoff for the ladder and inverse-operator identities; |c| = 0.8 needs a long series.
pub const IDENTITY_CUTOFF: usize = 400;
/// Largest q in the basis-vector commutation sweeps.
pub const COMMUTATION_Q_MAX: i64 = 8;
pub const JUMP_STEP: f64 = 1e-3;
pub const RICCATI_STEP: f64 = 1e-3;

pub struct Check {
    pub id: &'static str,
    pub anchor: &'static str,
    pub tolerance: f64,
}

/// Every check with its tolerance. Residuals are relative to max(1, scale) where a scale exists.
pub const CHECKS: &[Check] = &[
    Check { id: "commutation-fundamental", anchor: "sl(3) table on the 3x3 generators", tolerance: 1e-13 },
    Check { id: "commutation-polyrep-exact", anchor: "sl(3) table on polynomials, rational", tolerance: 0.0 },
    Check { id: "commutation-polyrep-float", anchor: "sl(3) table on polynomials, float", tolerance: 1e-13 },
    Check { id: "adjoint", anchor: "adjoint pairs under the polynomial inner product", tolerance: 1e-12 },
    Check { id: "inner-product-integral", anchor: "disk integral of basis norms", tolerance: 1e-6 },
    Check { id: "ladder-identities", anchor: "raising ladder on Mobius powers and Lambda", tolerance: 1e-12 },
    Check { id: "inverse-identities", anchor: "inverse ladder operators", tolerance: 1e-12 },
    Check { id: "free-space", anchor: "2ikG = exp(ik|x-y|) for f = 0", tolerance: 1e-12 },
    Check { id: "unimodularity", anchor: "det U = 1", tolerance: 1e-10 },
    Check { id: "inverse-relation", anchor: "U(y,x)U(x,y) = 1", tolerance: 1e-10 },
    Check { id: "composition", anchor: "U and (tau, R_r, R_l) compose over a split point", tolerance: 1e-9 },
    Check { id: "reflection-bound", anchor: "|R_r|, |R_l| <= 1", tolerance: 1e-12 },
    Check { id: "riccati-vs-matrix", anchor: "Riccati integration against transfer matrix", tolerance: 1e-7 },
    Check { id: "gauss-factorization", anchor: "U = exp(-R_r J+) tau^(2J3) exp(R_l J-)", tolerance: 1e-9 },
    Check { id: "intertwiner", anchor: "Q-pair intertwining and commutant", tolerance: 1e-9 },
    Check { id: "route-A-vs-B", anchor: "Wronskian form against closed form", tolerance: 1e-8 },
    Check { id: "route-C-vs-B", anchor: "polynomial form against closed form, minus truncation loss", tolerance: 1e-8 },
    Check { id: "route-C-asym-vs-C", anchor: "one-sided polynomial form against symmetric", tolerance: 1e-10 },
    Check { id: "coincident-point", anchor: "(1+R_l)(1+R_r)/(1-R_l R_r) at x = y", tolerance: 1e-12 },
    Check { id: "jump-condition", anchor: "derivative jump of G equals 1", tolerance: 1e-4 },
    Check { id: "powers", anchor: "(2ikG)^n for n = 2, 3, minus truncation loss", tolerance: 1e-7 },
    Check { id: "product-2", anchor: "two-factor product, minus truncation loss", tolerance: 1e-7 },
    Check { id: "product-3", anchor: "three-factor product, minus truncation loss", tolerance: 1e-6 },
    Check { id: "negative-power", anchor: "(2ikG)^-n (2ikG)^n = 1 for n = 1, 2, minus truncation loss", tolerance: 1e-6 },
    Check { id: "born-scaling", anchor: "|ln(ratio/8)| of order-2 error when c halves", tolerance: 0.336_472_236_621_212_9 },
];

pub fn check(id: &str) -> &'static Check {
    CHECKS.iter().find(|c| c.id == id).unwrap_or_else(|| panic!("unknown check {id}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub anchor: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    /// sample count, skips and the first error, if any
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// One tab-separated line per check: id, anchor, residual, tolerance, status, note.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let status = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6e}\t{:.1e}\t{}\t{}",
                e.id, e.anchor, e.residual, e.tolerance, status, e.note
            );
        }
        out
    }
}

/// Deliberate damage for the negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    /// scales one entry of K+
    Generator,
    /// scales τ before the factorization check
    Coefficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub random_potentials: usize,
    pub k_per_potential: usize,
    pub pairs: usize,
    pub corruption: Option<Corruption>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { random_potentials: 6, k_per_potential: 2, pairs: 5, corruption: None }
    }
}

/// 1–5 adjacent slabs, widths in [0.1, 1], amplitudes in [−2, 2], centred on 0.
pub fn random_slab_potential(rng: &mut impl Rng) -> PotentialSpec {
    let n = rng.random_range(1..=5);
    let layers: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.random_range(0.1..=1.0), rng.random_range(-2.0..=2.0))).collect();
    let width: f64 = layers.iter().map(|l| l.0).sum();
    PotentialSpec::slabs(-0.5 * width, &layers).expect("random layers are valid")
}

/// |k| in [0.3, 3] and arg k in [0, π/2].
pub fn random_wavenumber(rng: &mut impl Rng) -> Wavenumber {
    let r: f64 = rng.random_range(0.3..=3.0);
    let phi: f64 = rng.random_range(0.0..=FRAC_PI_2);
    Wavenumber::new(Complex64::from_polar(r, phi)).expect("upper half plane")
}

/// A point pair inside the support widened by 0.5 on each side.
pub fn random_pair(spec: &PotentialSpec, rng: &mut impl Rng) -> (f64, f64) {
    let (a, b) = window(spec, 0.5);
    (rng.random_range(a..=b), rng.random_range(a..=b))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn window(spec: &PotentialSpec, pad: f64) -> (f64, f64) {
    spec.support().map_or((-1.0, 1.0), |(a, b)| (a - pad, b + pad))
}

struct Sample {
    spec: PotentialSpec,
    k: Wavenumber,
    pairs: Vec<(f64, f64)>,
    split: f64,
}

type Outcome = (&'static str, Result<f64>);

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn triple_diff(a: &ScatteringTriple, b: &ScatteringTriple) -> f64 {
    rel(a.tau, b.tau).max(rel(a.r_right, b.r_right)).max(rel(a.r_left, b.r_left))
}

fn matrix_diff(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2], scale: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst / scale.max(1.0)
}

fn transfer_checks(s: &Sample, gens: &GeneratorSet3, corruption: Option<Corruption>, out: &mut Vec<Outcome>) {
    let (a, b) = window(&s.spec, 0.25);
    let k = s.k;
    let m = match evolution(&s.spec, a, b, k) {
        Ok(m) => m,
        Err(e) => {
            out.push(("unimodularity", Err(e)));
            return;
        }
    };
    let scale = m.scale();
    out.push(("unimodularity", Ok((m.determinant() - 1.0).norm() / scale.powi(2).max(1.0))));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    out.push((
        "inverse-relation",
        compose(&invert(&m), &m).map(|p| matrix_diff(p.matrix(), [[one, zero], [zero, one]], scale * scale)),
    ));
    let c = s.split;
    out.push((
        "composition",
        (|| {
            let whole = transfer::scattering_coefficients(&m)?;
            let (first, second) = (evolution(&s.spec, a, c, k)?, evolution(&s.spec, c, b, k)?);
            let matrix = matrix_diff(compose(&second, &first)?.matrix(), m.matrix(), scale);
            let chained = transfer::scattering_coefficients(&first)?.then(&transfer::scattering_coefficients(&second)?)?;
            Ok(matrix.max(triple_diff(&chained, &whole)))
        })(),
    ));
    out.push((
        "reflection-bound",
        (|| {
            let t = transfer::scattering_coefficients(&m)?;
            let mut worst = t.r_right.norm().max(t.r_left.norm());
            for &(x, y) in &s.pairs {
                worst = worst.max(transfer::r_left_to_plus_infinity(&s.spec, x, k)?.norm());
                worst = worst.max(transfer::r_right_from_minus_infinity(&s.spec, y, k)?.norm());
                worst = worst.max(transfer::coefficients_between(&s.spec, y.min(x), x.max(y), k)?.r_right.norm());
            }
            Ok((worst - 1.0).max(0.0))
        })(),
    ));
    out.push((
        "riccati-vs-matrix",
        (|| {
            let t = transfer::scattering_coefficients(&m)?;
            Ok(triple_diff(&riccati_coefficients(&s.spec, a, b, k, RICCATI_STEP)?, &t))
        })(),
    ));
    let u3 = embed_transfer(&m);
    let triple = transfer::scattering_coefficients(&m);
    out.push((
        "gauss-factorization",
        triple.clone().and_then(|t| {
            let mut t = t;
            if corruption == Some(Corruption::Coefficient) {
                t.tau *= 1.0 + 1e-6;
            }
            gauss_factorization_check_with(gens, &t, &u3)
        }),
    ));
    out.push(("intertwiner", triple.and_then(|t| Ok(intertwiner_check_with(gens, &u3, &t)?.max_residual()))));
}

fn green_checks(s: &Sample, cutoff: usize, out: &mut Vec<Outcome>) {
    let (spec, k) = (&s.spec, s.k);
    let b = |x: f64, y: f64| green_closed_form(spec, x, y, k).map(|g| g.value);
    for &(x, y) in &s.pairs {
        out.push(("route-A-vs-B", (|| Ok(rel(green_wronskian(spec, x, y, k)?.value, b(x, y)?)))()));
        let c = green_polyrep(spec, x, y, k, cutoff);
        out.push((
            "route-C-vs-B",
            c.as_ref().map_err(Clone::clone).and_then(|c| Ok(((c.value - b(x, y)?).norm() - c.truncation_loss).max(0.0))),
        ));
        out.push((
            "route-C-asym-vs-C",
            c.and_then(|c| Ok((green_polyrep_asymmetric(spec, x, y, k, cutoff)?.value - c.value).norm())),
        ));
        out.push((
            "coincident-point",
            (|| {
                let rl = transfer::r_left_to_plus_infinity(spec, x, k)?;
                let rr = transfer::r_right_from_minus_infinity(spec, x, k)?;
                Ok(rel(b(x, x)?, (1.0 + rl) * (1.0 + rr) / (1.0 - rl * rr)))
            })(),
        ));
        out.push(("jump-condition", jump_condition_check(spec, away_from_breaks(spec, y), k, JUMP_STEP)));
    }
    // Series-built values are judged beyond their own reported truncation loss.
    let (x, y) = s.pairs[0];
    for n in 2..=3u32 {
        out.push((
            "powers",
            (|| {
                let p = green_power(spec, x, y, k, n, cutoff)?;
                let e = b(x, y)?.powu(n);
                Ok(((p.value - e).norm() - p.truncation_loss).max(0.0) / e.norm().max(1.0))
            })(),
        ));
    }
    for n in 1..=2u32 {
        out.push((
            "negative-power",
            (|| {
                let e = b(x, y)?.powu(n);
                let p = green_negative_power(spec, x, y, k, n, cutoff)?;
                Ok(((p.value * e - 1.0).norm() - p.truncation_loss * e.norm()).max(0.0))
            })(),
        ));
    }
    if s.pairs.len() >= 3 {
        for (id, pts) in [("product-2", &s.pairs[..2]), ("product-3", &s.pairs[..3])] {
            out.push((
                id,
                (|| {
                    let e = pts.iter().map(|&(x, y)| b(x, y)).product::<Result<Complex64>>()?;
                    let p = green_product(spec, pts, k, cutoff)?;
                    Ok(((p.value - e).norm() - p.truncation_loss).max(0.0) / e.norm().max(1.0))
                })(),
            ));
        }
    }
}

/// Moves y off potential jumps so that the one-sided stencils see smooth data.
fn away_from_breaks(spec: &PotentialSpec, y: f64) -> f64 {
    let margin = 3.0 * JUMP_STEP;
    let mut y = y;
    for _ in 0..4 {
        match spec.jumps().iter().find(|(z, _)| (y - z).abs() < margin) {
            Some((z, _)) => y = z + margin * if y >= *z { 1.0 } else { -1.0 } * 1.5,
            None => break,
        }
    }
    y
}

fn global_checks(gens: &GeneratorSet3, ks: &[Wavenumber], cutoff: usize, rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut out: Vec<Outcome> = vec![
        ("commutation-fundamental", Ok(commutation_table_check(gens).max_residual())),
        ("commutation-polyrep-exact", Ok(exact_commutation_check(cutoff, COMMUTATION_Q_MAX).max_residual())),
        ("commutation-polyrep-float", Ok(float_commutation_check(cutoff, COMMUTATION_Q_MAX).max_residual())),
        ("adjoint", adjoint_check(cutoff).map(|r| r.max_residual())),
    ];
    for p in 0..=4 {
        for q in 0..=4 {
            if p + q >= 1 {
                out.push(("inner-product-integral", inner_product_integral_check(p, q).map(|(a, b)| (a - b).abs() / b)));
            }
        }
    }
    for _ in 0..3 {
        let c = Complex64::from_polar(rng.random_range(0.0..=0.8), rng.random_range(0.0..std::f64::consts::TAU));
        out.push(("ladder-identities", ladder_identities_check(c, IDENTITY_CUTOFF).map(|r| r.max_residual())));
        out.push(("inverse-identities", inverse_identities_check(c, IDENTITY_CUTOFF).map(|r| r.max_residual())));
    }
    let vacuum = PotentialSpec::vacuum();
    for &k in ks {
        out.push((
            "free-space",
            (|| {
                let mut worst: f64 = 0.0;
                for i in 0..21 {
                    for j in 0..21 {
                        let (x, y) = (-2.0 + 0.2 * i as f64, -2.0 + 0.2 * j as f64);
                        let g = green_closed_form(&vacuum, x, y, k)?.value;
                        worst = worst.max((g - (Complex64::i() * k.value() * (x - y).abs()).exp()).norm());
                    }
                }
                Ok(worst)
            })(),
        ));
    }
    out.push(("born-scaling", born_scaling_ratio().map(|r| (r / 8.0).ln().abs())));
    out
}

/// Ratio of order-2 errors against the closed form for a slab with cL = 0.1 and c/2, at k = 1.
pub fn born_scaling_ratio() -> Result<f64> {
    let k = Wavenumber::from_parts(1.0, 0.0)?;
    let err = |c: f64| -> Result<f64> {
        let spec = PotentialSpec::slabs(0.0, &[(1.0, c)])?;
        let b = green_closed_form(&spec, 0.8, 0.3, k)?.value;
        let (g, _) = born_series(&spec, 0.8, 0.3, k, 2, &QuadratureConfig::default())?;
        Ok((g.value - b).norm())
    };
    Ok(err(0.1)? / err(0.05)?)
}

/// Runs the suite with the default configuration.
pub fn run_suite(spec: &PotentialSpec, k_samples: &[Wavenumber], cutoff: usize, seed: u64) -> CheckReport {
    run_suite_with(spec, k_samples, cutoff, seed, &SuiteConfig::default())
}

pub fn run_suite_with(
    spec: &PotentialSpec,
    k_samples: &[Wavenumber],
    cutoff: usize,
    seed: u64,
    config: &SuiteConfig,
) -> CheckReport {
    let mut rng = seeded_rng(seed);
    let mut gens = GeneratorSet3::fundamental();
    if config.corruption == Some(Corruption::Generator) {
        gens.k_plus[(2, 1)] *= 1.0 + 1e-3;
    }
    let pairs = config.pairs.max(1);
    let mut samples = Vec::new();
    let mut push_sample = |spec: &PotentialSpec, k: Wavenumber, rng: &mut ChaCha8Rng| {
        let (a, b) = window(spec, 0.25);
        let pts = (0..pairs).map(|_| random_pair(spec, rng)).collect();
        samples.push(Sample { spec: spec.clone(), k, pairs: pts, split: rng.random_range(a..=b) });
    };
    for &k in k_samples {
        push_sample(spec, k, &mut rng);
    }
    for _ in 0..config.random_potentials {
        let p = random_slab_potential(&mut rng);
        for _ in 0..config.k_per_potential {
            let k = random_wavenumber(&mut rng);
            push_sample(&p, k, &mut rng);
        }
    }
    let mut ks: Vec<Wavenumber> = k_samples.to_vec();
    ks.extend(samples.iter().map(|s| s.k));
    let mut outcomes = global_checks(&gens, &ks, cutoff, &mut rng);
    let per_sample: Vec<Vec<Outcome>> = samples
        .par_iter()
        .map(|s| {
            let mut out = Vec::new();
            transfer_checks(s, &gens, config.corruption, &mut out);
            green_checks(s, cutoff, &mut out);
            out
        })
        .collect();
    outcomes.extend(per_sample.into_iter().flatten());
    assemble(outcomes)
}

#[derive(Default)]
struct Tally {
    worst: f64,
    samples: usize,
    skipped: usize,
    first_error: Option<String>,
}

/// Truncation overflow means the polynomial route declined to answer; it is counted, not failed.
fn assemble(outcomes: Vec<Outcome>) -> CheckReport {
    let mut tallies: Vec<(&'static str, Tally)> = Vec::new();
    for (id, result) in outcomes {
        let pos = match tallies.iter().position(|t| t.0 == id) {
            Some(p) => p,
            None => {
                tallies.push((id, Tally::default()));
                tallies.len() - 1
            }
        };
        let t = &mut tallies[pos].1;
        match result {
            Ok(r) => {
                t.samples += 1;
                t.worst = if r.is_nan() { f64::INFINITY } else { t.worst.max(r) };
            }
            Err(Error::TruncationOverflow { .. }) => t.skipped += 1,
            Err(e) => {
                t.samples += 1;
                t.worst = f64::INFINITY;
                t.first_error.get_or_insert_with(|| format!("{}: {e}", e.kind()));
            }
        }
    }
    let entries = tallies
        .into_iter()
        .map(|(id, t)| {
            let c = check(id);
            let mut note = format!("samples={}", t.samples);
            if t.skipped > 0 {
                let _ = write!(note, " truncation-skipped={}", t.skipped);
            }
            if let Some(e) = &t.first_error {
                let _ = write!(note, " error={e}");
            }
            let passed = t.samples > 0 && t.worst <= c.tolerance;
            CheckEntry {
                id: id.to_string(),
                anchor: c.anchor.to_string(),
                residual: t.worst,
                tolerance: c.tolerance,
                status: if passed { Status::Pass } else { Status::Fail },
                note,
            }
        })
        .collect();
    CheckReport { entries }
}
