//! Green-function values through the closed form and the polynomial representation.
//!
//! Every function returns 2ik·G. Arguments may come in either order; the pair is
//! normalized to x ≥ y by the symmetry G(x, y) = G(y, x).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polyrep::{
    apply_u_with_tolerance, inner_product, inverse_operator, lambda_l, lambda_power, lambda_power_left,
    lambda_r, lower_mu, mobius_power, raise_mu, InverseOp, MobiusAction, PolyVec, DEFAULT_TAIL_TOLERANCE,
};
use crate::potential::{PotentialSpec, Wavenumber};
use crate::transfer::{self, ScatteringTriple};

/// Below this |denominator| the closed form reports a pole.
pub const DENOMINATOR_THRESHOLD: f64 = 1e-13;
/// Smallest cutoff for which the truncation estimate is defined.
pub const MIN_CUTOFF: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Wronskian,
    ClosedForm,
    PolyrepSymmetric,
    PolyrepAsymmetric,
    Born(usize),
}

impl Route {
    /// Short label used in tabular output.
    pub fn label(self) -> &'static str {
        match self {
            Route::Wronskian => "A",
            Route::ClosedForm => "B",
            Route::PolyrepSymmetric => "C",
            Route::PolyrepAsymmetric => "C-asym",
            Route::Born(_) => "born",
        }
    }
}

/// 2ik·G(x, y; k) with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: Complex64,
    pub x: f64,
    pub y: f64,
    pub k: Wavenumber,
    pub route: Route,
    pub truncation_loss: f64,
}

/// A series-built value and its truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub truncation_loss: f64,
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x >= y {
        (x, y)
    } else {
        (y, x)
    }
}

fn check_k(k: Wavenumber) -> Result<()> {
    if k.value() == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("k = 0 has no Green function normalization".into()));
    }
    Ok(())
}

/// Scattering data entering the closed form for a pair x ≥ y.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormParts {
    /// R_l(∞, x)
    pub r_left_inf: Complex64,
    /// R_r(y, −∞)
    pub r_right_inf: Complex64,
    /// data of U(x, y)
    pub inner: ScatteringTriple,
    pub numerator: Complex64,
    pub denominator: Complex64,
}

pub fn closed_form_parts(spec: &PotentialSpec, x: f64, y: f64, k: Wavenumber) -> Result<ClosedFormParts> {
    let (x, y) = ordered(x, y);
    let rl = transfer::r_left_to_plus_infinity(spec, x, k)?;
    let rr = transfer::r_right_from_minus_infinity(spec, y, k)?;
    let t = transfer::coefficients_between(spec, y, x, k)?;
    let numerator = (1.0 + rl) * t.tau * (1.0 + rr);
    let denominator = (1.0 - rl * t.r_right) * (1.0 - t.r_left * rr) - rl * t.tau * t.tau * rr;
    Ok(ClosedFormParts { r_left_inf: rl, r_right_inf: rr, inner: t, numerator, denominator })
}

/// Closed form in the semi-infinite reflection coefficients at both ends.
pub fn green_closed_form(spec: &PotentialSpec, x: f64, y: f64, k: Wavenumber) -> Result<GreenValue> {
    check_k(k)?;
    let parts = closed_form_parts(spec, x, y, k)?;
    if !(parts.denominator.norm() >= DENOMINATOR_THRESHOLD) {
        return Err(Error::DenominatorZero { magnitude: parts.denominator.norm() });
    }
    Ok(GreenValue {
        value: parts.numerator / parts.denominator,
        x,
        y,
        k,
        route: Route::ClosedForm,
        truncation_loss: 0.0,
    })
}

/// Runs `f` at cutoffs P/2, 3P/4 and P and extrapolates the geometric tail beyond P.
fn with_truncation_estimate(cutoff: usize, f: impl Fn(usize) -> Result<Complex64>) -> Result<SeriesValue> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::InvalidArgument(format!("cutoff must be at least {MIN_CUTOFF}, got {cutoff}")));
    }
    let v1 = f(cutoff / 2)?;
    let v2 = f(3 * cutoff / 4)?;
    let v3 = f(cutoff)?;
    if !(v1.is_finite() && v2.is_finite() && v3.is_finite()) {
        // Coefficients of a divergent series overflowed before the estimate could see it.
        return Err(Error::TruncationOverflow { estimate: f64::INFINITY, tolerance: DEFAULT_TAIL_TOLERANCE });
    }
    let (d1, d2) = ((v2 - v1).norm(), (v3 - v2).norm());
    let floor = 64.0 * f64::EPSILON * v3.norm().max(1.0);
    let loss = if d2 <= floor {
        d2
    } else {
        let rate = d2 / d1.max(f64::MIN_POSITIVE);
        if rate >= 0.99 {
            return Err(Error::TruncationOverflow { estimate: f64::INFINITY, tolerance: DEFAULT_TAIL_TOLERANCE });
        }
        // Doubled for safety: the decay is only approximately geometric.
        2.0 * d2 / (1.0 - rate)
    };
    if loss > DEFAULT_TAIL_TOLERANCE * v3.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::TruncationOverflow {
            estimate: loss / v3.norm().max(f64::MIN_POSITIVE),
            tolerance: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(SeriesValue { value: v3, truncation_loss: loss })
}

fn action(spec: &PotentialSpec, from: f64, to: f64, k: Wavenumber) -> Result<MobiusAction> {
    Ok(MobiusAction::from(&transfer::coefficients_between(spec, from, to, k)?))
}

// Intermediate series carry truncation noise in their top orders; the tail is judged
// once, on the final value, by `with_truncation_estimate`.
fn u(a: &MobiusAction, v: &PolyVec) -> Result<PolyVec> {
    apply_u_with_tolerance(a, v, f64::INFINITY)
}

/// ⟨Λ_l(x), U(x,y) Λ_r(y)⟩.
pub fn green_polyrep(spec: &PotentialSpec, x: f64, y: f64, k: Wavenumber, cutoff: usize) -> Result<GreenValue> {
    check_k(k)?;
    let (hi, lo) = ordered(x, y);
    let rl = transfer::r_left_to_plus_infinity(spec, hi, k)?;
    let rr = transfer::r_right_from_minus_infinity(spec, lo, k)?;
    let a = action(spec, lo, hi, k)?;
    let s = with_truncation_estimate(cutoff, |p| inner_product(&lambda_l(rl, p), &u(&a, &lambda_r(rr, p))?))?;
    Ok(GreenValue { value: s.value, x, y, k, route: Route::PolyrepSymmetric, truncation_loss: s.truncation_loss })
}

/// −(L₊ − K₋) U(x,y) Λ_r(y), evaluated as a ξ series at R_l(∞, x).
pub fn green_polyrep_asymmetric(
    spec: &PotentialSpec,
    x: f64,
    y: f64,
    k: Wavenumber,
    cutoff: usize,
) -> Result<GreenValue> {
    check_k(k)?;
    let (hi, lo) = ordered(x, y);
    let rl = transfer::r_left_to_plus_infinity(spec, hi, k)?;
    let rr = transfer::r_right_from_minus_infinity(spec, lo, k)?;
    let a = action(spec, lo, hi, k)?;
    let s = with_truncation_estimate(cutoff, |p| {
        // One extra order so that the ξ·h term of K₋ is not cut.
        let v = u(&a, &lambda_r(rr, p))?.with_cutoff(p + 1);
        Ok(-lower_mu(&v).eval_xi(0, rl))
    })?;
    Ok(GreenValue { value: s.value, x, y, k, route: Route::PolyrepAsymmetric, truncation_loss: s.truncation_loss })
}

/// [2ikG]ⁿ = (1/n)⟨Λ_lⁿ(x), U(x,y) Λ_rⁿ(y)⟩.
pub fn green_power(spec: &PotentialSpec, x: f64, y: f64, k: Wavenumber, n: u32, cutoff: usize) -> Result<SeriesValue> {
    check_k(k)?;
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("power must be in 1..=4, got {n}")));
    }
    let (hi, lo) = ordered(x, y);
    let rl = transfer::r_left_to_plus_infinity(spec, hi, k)?;
    let rr = transfer::r_right_from_minus_infinity(spec, lo, k)?;
    let a = action(spec, lo, hi, k)?;
    with_truncation_estimate(cutoff, |p| {
        let v = u(&a, &lambda_power(rr, n, p))?;
        Ok(inner_product(&lambda_power_left(rl, n, p), &v)? / n as f64)
    })
}

/// (2ik)ⁿ ΠGᵢ for two or three pairs (xᵢ, yᵢ), each pair in either order.
pub fn green_product(spec: &PotentialSpec, points: &[(f64, f64)], k: Wavenumber, cutoff: usize) -> Result<SeriesValue> {
    check_k(k)?;
    let mut pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| ordered(x, y)).collect();
    let prefactor = match pts.len() {
        2 => -0.5,
        3 => 1.0 / 12.0,
        n => return Err(Error::InvalidArgument(format!("products take 2 or 3 factors, got {n}"))),
    };
    let n = pts.len();
    pts = least_backtracking_order(&pts);
    let rr = transfer::r_right_from_minus_infinity(spec, pts[0].1, k)?;
    let rl = transfer::r_left_to_plus_infinity(spec, pts[n - 1].0, k)?;
    // Path y1 → y2 → … → yn → x1 → x2 → … → xn, raising μ at each y and lowering at each x.
    let stops = chain(&pts);
    let actions: Vec<MobiusAction> =
        stops.windows(2).map(|w| action(spec, w[0], w[1], k)).collect::<Result<_>>()?;
    with_truncation_estimate(cutoff, |p| {
        let mut v = lambda_r(rr, p);
        for (i, a) in actions.iter().enumerate() {
            v = u(a, &v)?;
            if i + 1 < n {
                v = raise_mu(&v);
            } else if i + 2 < 2 * n {
                v = lower_mu(&v);
            }
        }
        Ok(prefactor * inner_product(&lambda_l(rl, p), &v)?)
    })
}

fn chain(pts: &[(f64, f64)]) -> Vec<f64> {
    pts.iter().map(|p| p.1).chain(pts.iter().map(|p| p.0)).collect()
}

/// The factors commute, so pick the order whose path backtracks least. Backward legs
/// grow the Möbius coefficients when Im k > 0 and can make the series diverge.
fn least_backtracking_order(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let backtrack = |p: &[(f64, f64)]| chain(p).windows(2).map(|w| (w[0] - w[1]).max(0.0)).sum::<f64>();
    let mut best = pts.to_vec();
    let mut perm = pts.to_vec();
    let mut visit = |p: &[(f64, f64)]| {
        if backtrack(p) < backtrack(&best) {
            best = p.to_vec();
        }
    };
    match perm.len() {
        2 => {
            perm.swap(0, 1);
            visit(&perm);
        }
        _ => {
            // Alternating transpositions (0 2), (1 2) visit all 6 orderings.
            for i in 0..6 {
                perm.swap(if i % 2 == 0 { 0 } else { 1 }, 2);
                visit(&perm);
            }
        }
    }
    best
}

/// [2ikG]^{−n} via inverse-operator chains on Ψ_{0,n+2}.
pub fn green_negative_power(
    spec: &PotentialSpec,
    x: f64,
    y: f64,
    k: Wavenumber,
    n: u32,
    cutoff: usize,
) -> Result<SeriesValue> {
    check_k(k)?;
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidArgument(format!("negative power must be 1 or 2, got {n}")));
    }
    let q = n as i64 + 2;
    let parts = closed_form_parts(spec, x, y, k)?;
    let a = MobiusAction::from(&parts.inner);
    let fact = |m: i64| (1..=m).map(|j| j as f64).product::<f64>();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let c_n = fact(q - n as i64 - 1) / fact(q - 1) * sign * fact(q - n as i64) / fact(q);
    let norm = parts.denominator.powi(q as i32) / (c_n * parts.inner.tau.powi(q as i32));
    let s = with_truncation_estimate(cutoff, |p| {
        let mut v = mobius_power(q, parts.r_right_inf, p);
        for _ in 0..n {
            v = inverse_operator(InverseOp::LMinusPlusKPlus, &v)?;
        }
        v = u(&a, &v)?;
        for _ in 0..n {
            v = inverse_operator(InverseOp::LPlusMinusKMinus, &v)?;
        }
        Ok(v.eval_xi(q, parts.r_left_inf))
    })?;
    Ok(SeriesValue { value: s.value * norm, truncation_loss: s.truncation_loss * norm.norm() })
}

/// |[∂ₓG]₊ − [∂ₓG]₋ − 1| from second-order one-sided differences of the closed form.
pub fn jump_condition_check(spec: &PotentialSpec, y: f64, k: Wavenumber, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let two_ik = Complex64::new(0.0, 2.0) * k.value();
    let g = |x: f64| -> Result<Complex64> { Ok(green_closed_form(spec, x, y, k)?.value / two_ik) };
    let g0 = g(y)?;
    let right = (-3.0 * g0 + 4.0 * g(y + h)? - g(y + 2.0 * h)?) / (2.0 * h);
    let left = (3.0 * g0 - 4.0 * g(y - h)? + g(y - 2.0 * h)?) / (2.0 * h);
    Ok((right - left - 1.0).norm())
}
