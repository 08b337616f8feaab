//! The 2×2 evolution matrix U(x₂,x₁) of dU/dx = [[-ik, f],[f, ik]]U and the
//! transmission/reflection data derived from it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{Piece, PotentialSpec, Tail, Wavenumber};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this |α(k)| the division in τ = 1/α is refused.
pub const RESONANCE_THRESHOLD: f64 = 1e-13;
/// |κΔ| below which cosh and sinh/κ are replaced by their series.
pub const SERIES_SWITCHOVER: f64 = 1e-4;
/// Largest accepted rk4 local error estimate (‖A‖h)⁵/120.
pub const RK4_LOCAL_ERROR_LIMIT: f64 = 1e-8;
/// Step used when a non-constant profile forces rk4.
pub const DEFAULT_RK4_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ExactPiecewise,
    Rk4 { step: f64 },
}

impl Method {
    /// Exact propagation when f is piecewise constant on [x1, x2], rk4 otherwise.
    pub fn auto(spec: &PotentialSpec, x1: f64, x2: f64) -> Method {
        let (a, b) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        if spec.is_piecewise_constant(a, b) {
            Method::ExactPiecewise
        } else {
            Method::Rk4 { step: DEFAULT_RK4_STEP }
        }
    }
}

/// U(x2, x1) = [[α(k), β(−k)], [β(k), α(−k)]]. `x1 > x2` marks an inverted matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
    pub x1: f64,
    pub x2: f64,
    pub k: Wavenumber,
}

impl TransferMatrix {
    pub fn identity(x: f64, k: Wavenumber) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix { alpha_plus: one, alpha_minus: one, beta_plus: zero, beta_minus: zero, x1: x, x2: x, k }
    }

    /// Free propagation over [x1, x2].
    pub fn free(x1: f64, x2: f64, k: Wavenumber) -> Self {
        let phase = (-I * k.value() * (x2 - x1)).exp();
        TransferMatrix {
            alpha_plus: phase,
            alpha_minus: phase.inv(),
            beta_plus: Complex64::new(0.0, 0.0),
            beta_minus: Complex64::new(0.0, 0.0),
            x1,
            x2,
            k,
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.alpha_plus, self.beta_minus], [self.beta_plus, self.alpha_minus]]
    }

    pub fn from_matrix(m: [[Complex64; 2]; 2], x1: f64, x2: f64, k: Wavenumber) -> Self {
        TransferMatrix { alpha_plus: m[0][0], beta_minus: m[0][1], beta_plus: m[1][0], alpha_minus: m[1][1], x1, x2, k }
    }

    pub fn determinant(&self) -> Complex64 {
        self.alpha_plus * self.alpha_minus - self.beta_plus * self.beta_minus
    }

    /// Largest entry modulus, used to scale residuals.
    pub fn scale(&self) -> f64 {
        self.matrix().iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Constant-f slab over a length `delta`.
pub fn slab_matrix(c: f64, delta: f64, x1: f64, k: Wavenumber) -> TransferMatrix {
    let kk = k.value();
    let kappa = (Complex64::new(c * c, 0.0) - kk * kk).sqrt();
    let z = kappa * delta;
    let (ch, sh_over_kappa) = if z.norm() < SERIES_SWITCHOVER {
        let z2 = z * z;
        (1.0 + z2 / 2.0 + z2 * z2 / 24.0, delta * (1.0 + z2 / 6.0 + z2 * z2 / 120.0))
    } else {
        (z.cosh(), z.sinh() / kappa)
    };
    let b = c * sh_over_kappa;
    TransferMatrix {
        alpha_plus: ch - I * kk * sh_over_kappa,
        alpha_minus: ch + I * kk * sh_over_kappa,
        beta_plus: b,
        beta_minus: b,
        x1,
        x2: x1 + delta,
        k,
    }
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// U(x,z) = U(x,y)·U(y,z), with `left` = U(x,y) and `right` = U(y,z).
pub fn compose(left: &TransferMatrix, right: &TransferMatrix) -> Result<TransferMatrix> {
    if !same_point(left.x1, right.x2) {
        return Err(Error::IntervalMismatch(format!(
            "left starts at {} but right ends at {}",
            left.x1, right.x2
        )));
    }
    if left.k != right.k {
        return Err(Error::IntervalMismatch("wavenumbers differ".into()));
    }
    Ok(compose_unchecked(left, right))
}

fn compose_unchecked(left: &TransferMatrix, right: &TransferMatrix) -> TransferMatrix {
    let (l, r) = (left.matrix(), right.matrix());
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = l[i][0] * r[0][j] + l[i][1] * r[1][j];
        }
    }
    TransferMatrix::from_matrix(m, right.x1, left.x2, left.k)
}

/// U(y,x) from U(x,y).
pub fn invert(m: &TransferMatrix) -> TransferMatrix {
    TransferMatrix {
        alpha_plus: m.alpha_minus,
        alpha_minus: m.alpha_plus,
        beta_plus: -m.beta_plus,
        beta_minus: -m.beta_minus,
        x1: m.x2,
        x2: m.x1,
        k: m.k,
    }
}

/// U(x2, x1) for x1 ≤ x2.
pub fn propagate(spec: &PotentialSpec, x1: f64, x2: f64, k: Wavenumber, method: Method) -> Result<TransferMatrix> {
    if !(x1 <= x2) {
        return Err(Error::InvalidArgument(format!("propagate needs x1 <= x2, got [{x1}, {x2}]")));
    }
    let mut u = TransferMatrix::identity(x1, k);
    for piece in spec.pieces(x1, x2) {
        let step = match method {
            Method::ExactPiecewise => {
                if !piece.is_constant() {
                    return Err(Error::UnsupportedProfile { segment: piece.segment.unwrap_or(0) });
                }
                slab_matrix(piece.c0, piece.b - piece.a, piece.a, k)
            }
            Method::Rk4 { step } => rk4_piece(&piece, k, step)?,
        };
        u = compose_unchecked(&step, &u);
    }
    u.x2 = x2;
    Ok(u)
}

/// U(to, from) for either ordering of the endpoints.
pub fn evolution(spec: &PotentialSpec, from: f64, to: f64, k: Wavenumber) -> Result<TransferMatrix> {
    let method = Method::auto(spec, from, to);
    if from <= to {
        propagate(spec, from, to, k, method)
    } else {
        Ok(invert(&propagate(spec, to, from, k, method)?))
    }
}

fn steps_for(piece: &Piece, k: Wavenumber, step: f64) -> Result<(usize, f64)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("rk4 step must be positive, got {step}")));
    }
    let len = piece.b - piece.a;
    let n = (len / step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let fmax = piece.value(piece.a).abs().max(piece.value(piece.b).abs());
    let estimate = ((k.value().norm() + fmax) * h).powi(5) / 120.0;
    if estimate > RK4_LOCAL_ERROR_LIMIT {
        return Err(Error::StepTooLarge { step, estimate });
    }
    Ok((n, h))
}

type M2 = [[Complex64; 2]; 2];

fn generator_times(f: f64, ik: Complex64, u: &M2) -> M2 {
    [
        [-ik * u[0][0] + f * u[1][0], -ik * u[0][1] + f * u[1][1]],
        [f * u[0][0] + ik * u[1][0], f * u[0][1] + ik * u[1][1]],
    ]
}

fn axpy(u: &M2, h: f64, d: &M2) -> M2 {
    let mut out = *u;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += h * d[i][j];
        }
    }
    out
}

fn rk4_piece(piece: &Piece, k: Wavenumber, step: f64) -> Result<TransferMatrix> {
    let (n, h) = steps_for(piece, k, step)?;
    let ik = I * k.value();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut u: M2 = [[one, zero], [zero, one]];
    for s in 0..n {
        let x = piece.a + s as f64 * h;
        let (f0, fm, f1) = (piece.value(x), piece.value(x + 0.5 * h), piece.value(x + h));
        let k1 = generator_times(f0, ik, &u);
        let k2 = generator_times(fm, ik, &axpy(&u, 0.5 * h, &k1));
        let k3 = generator_times(fm, ik, &axpy(&u, 0.5 * h, &k2));
        let k4 = generator_times(f1, ik, &axpy(&u, h, &k3));
        for i in 0..2 {
            for j in 0..2 {
                u[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]);
            }
        }
    }
    Ok(TransferMatrix::from_matrix(u, piece.a, piece.b, k))
}

/// (τ, R_r, R_l) of an interval, U(x2, x1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringTriple {
    pub tau: Complex64,
    pub r_right: Complex64,
    pub r_left: Complex64,
    pub x1: f64,
    pub x2: f64,
    pub k: Wavenumber,
}

impl ScatteringTriple {
    pub fn identity(x: f64, k: Wavenumber) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        ScatteringTriple { tau: Complex64::new(1.0, 0.0), r_right: zero, r_left: zero, x1: x, x2: x, k }
    }

    /// Triple of U(later)·U(self).
    pub fn then(&self, later: &ScatteringTriple) -> Result<ScatteringTriple> {
        if !same_point(self.x2, later.x1) || self.k != later.k {
            return Err(Error::IntervalMismatch(format!(
                "first ends at {} but second starts at {}",
                self.x2, later.x1
            )));
        }
        let d = 1.0 - later.r_left * self.r_right;
        Ok(ScatteringTriple {
            tau: later.tau * self.tau / d,
            r_right: later.r_right + later.tau * later.tau * self.r_right / d,
            r_left: self.r_left + self.tau * self.tau * later.r_left / d,
            x1: self.x1,
            x2: later.x2,
            k: self.k,
        })
    }
}

pub fn scattering_coefficients(m: &TransferMatrix) -> Result<ScatteringTriple> {
    let magnitude = m.alpha_plus.norm();
    if !(magnitude >= RESONANCE_THRESHOLD) {
        return Err(Error::ResonanceDivision { magnitude });
    }
    let tau = m.alpha_plus.inv();
    Ok(ScatteringTriple {
        tau,
        r_right: m.beta_plus * tau,
        r_left: -m.beta_minus * tau,
        x1: m.x1,
        x2: m.x2,
        k: m.k,
    })
}

/// Triple of U(to, from) for either ordering.
pub fn coefficients_between(spec: &PotentialSpec, from: f64, to: f64, k: Wavenumber) -> Result<ScatteringTriple> {
    scattering_coefficients(&evolution(spec, from, to, k)?)
}

/// Integrates the Riccati system for (R_r, τ, R_l) from (0, 1, 0) at x1.
pub fn riccati_coefficients(
    spec: &PotentialSpec,
    x1: f64,
    x2: f64,
    k: Wavenumber,
    step: f64,
) -> Result<ScatteringTriple> {
    if !(x1 <= x2) {
        return Err(Error::InvalidArgument(format!("riccati needs x1 <= x2, got [{x1}, {x2}]")));
    }
    let ik = I * k.value();
    let rhs = |f: f64, y: [Complex64; 3]| {
        let [rr, tau, _] = y;
        [2.0 * ik * rr + f * (1.0 - rr * rr), ik * tau - f * tau * rr, -f * tau * tau]
    };
    let shift = |y: [Complex64; 3], h: f64, d: [Complex64; 3]| [y[0] + h * d[0], y[1] + h * d[1], y[2] + h * d[2]];
    let zero = Complex64::new(0.0, 0.0);
    let mut y = [zero, Complex64::new(1.0, 0.0), zero];
    for piece in spec.pieces(x1, x2) {
        let (n, h) = steps_for(&piece, k, step)?;
        for s in 0..n {
            let x = piece.a + s as f64 * h;
            let (f0, fm, f1) = (piece.value(x), piece.value(x + 0.5 * h), piece.value(x + h));
            let k1 = rhs(f0, y);
            let k2 = rhs(fm, shift(y, 0.5 * h, k1));
            let k3 = rhs(fm, shift(y, 0.5 * h, k2));
            let k4 = rhs(f1, shift(y, h, k3));
            for i in 0..3 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    Ok(ScatteringTriple { tau: y[1], r_right: y[0], r_left: y[2], x1, x2, k })
}

/// κ = √(c² − k²) on the branch continuous from Im k > 0 (Re κ > 0 there).
pub fn tail_kappa(c: f64, k: Wavenumber) -> Result<Complex64> {
    let kk = k.value();
    let arg = Complex64::new(c * c, 0.0) - kk * kk;
    if arg == Complex64::new(0.0, 0.0) {
        return Err(Error::BranchUndefined { c });
    }
    if kk.im == 0.0 && kk.re * kk.re > c * c {
        let root = (kk.re * kk.re - c * c).sqrt();
        return Ok(Complex64::new(0.0, -kk.re.signum() * root));
    }
    Ok(arg.sqrt())
}

/// Reflection seen from inside a homogeneous region f ≡ c looking outward:
/// (ik + κ)/c towards −∞, and its mirror −(ik + κ)/c towards +∞.
fn tail_seed(tail: Tail, k: Wavenumber) -> Result<Complex64> {
    match tail {
        Tail::Vacuum | Tail::Constant { c: 0.0 } => Ok(Complex64::new(0.0, 0.0)),
        Tail::Constant { c } => Ok((I * k.value() + tail_kappa(c, k)?) / c),
    }
}

/// R_r(x, −∞) and R_l(∞, x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiInfinite {
    pub r_right: Complex64,
    pub r_left: Complex64,
}

pub fn r_right_from_minus_infinity(spec: &PotentialSpec, x: f64, k: Wavenumber) -> Result<Complex64> {
    let seed = tail_seed(spec.left_tail(), k)?;
    let Some((xl, _)) = spec.support() else { return Ok(seed) };
    if x <= xl {
        return Ok(seed);
    }
    let t = coefficients_between(spec, xl, x, k)?;
    Ok(t.r_right + t.tau * t.tau * seed / (1.0 - t.r_left * seed))
}

pub fn r_left_to_plus_infinity(spec: &PotentialSpec, x: f64, k: Wavenumber) -> Result<Complex64> {
    let seed = -tail_seed(spec.right_tail(), k)?;
    let Some((_, xr)) = spec.support() else { return Ok(seed) };
    if x >= xr {
        return Ok(seed);
    }
    let t = coefficients_between(spec, x, xr, k)?;
    Ok(t.r_left + t.tau * t.tau * seed / (1.0 - t.r_right * seed))
}

pub fn semi_infinite_coefficients(spec: &PotentialSpec, x: f64, k: Wavenumber) -> Result<SemiInfinite> {
    Ok(SemiInfinite {
        r_right: r_right_from_minus_infinity(spec, x, k)?,
        r_left: r_left_to_plus_infinity(spec, x, k)?,
    })
}
