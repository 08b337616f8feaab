//! The infinite-dimensional representation on Ψ_{p,q} = ξ^p μ^q, truncated at ξ-degree P.
//!
//! A [`PolyVec`] stores, for every μ-exponent q = q₀ + n, a dense ξ series up to its cutoff.
//! Generators that raise p drop the order P+1 term and tally it as loss; generators that
//! lower p shrink the cutoff by one, since their top coefficient would need the missing term.

use std::collections::BTreeMap;

use gauss_quad::GaussLegendre;
use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::Zero;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::sl3::{all_relations, Coef, Element, Generator, Relation, Report};
use crate::transfer::ScatteringTriple;

/// Default ξ-cutoff.
pub const DEFAULT_CUTOFF: usize = 64;
/// Default bound on the relative tail estimate of `apply_u`.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct PolyVec {
    q0: f64,
    cutoff: usize,
    comps: BTreeMap<i64, Vec<Complex64>>,
    loss: f64,
}

impl PolyVec {
    pub fn zero(q0: f64, cutoff: usize) -> Self {
        PolyVec { q0, cutoff, comps: BTreeMap::new(), loss: 0.0 }
    }

    /// Ψ_{p, q₀+n}.
    pub fn basis(p: usize, n: i64, q0: f64, cutoff: usize) -> Self {
        let mut v = Self::zero(q0, cutoff);
        v.set(p, n, Complex64::new(1.0, 0.0));
        v
    }

    /// μ^{q₀+n} Σ coeffs[p] ξ^p, cut at `cutoff`.
    pub fn from_series(n: i64, coeffs: Vec<Complex64>, q0: f64, cutoff: usize) -> Self {
        let mut v = Self::zero(q0, cutoff);
        v.insert(n, coeffs);
        v
    }

    fn insert(&mut self, n: i64, mut coeffs: Vec<Complex64>) {
        if coeffs.len() > self.cutoff + 1 {
            self.loss += coeffs[self.cutoff + 1..].iter().map(|c| c.norm()).sum::<f64>();
            coeffs.truncate(self.cutoff + 1);
        }
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            self.comps.remove(&n);
        } else {
            self.comps.insert(n, coeffs);
        }
    }

    pub fn set(&mut self, p: usize, n: i64, value: Complex64) {
        if p > self.cutoff {
            return;
        }
        let mut c = self.comps.remove(&n).unwrap_or_default();
        if c.len() <= p {
            c.resize(p + 1, ZERO);
        }
        c[p] = value;
        self.insert(n, c);
    }

    pub fn q_offset(&self) -> f64 {
        self.q0
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn q(&self, n: i64) -> f64 {
        self.q0 + n as f64
    }

    pub fn coeff(&self, p: usize, n: i64) -> Complex64 {
        self.comps.get(&n).and_then(|c| c.get(p)).copied().unwrap_or(ZERO)
    }

    /// ξ series of the μ^{q₀+n} component, padded to length cutoff+1.
    pub fn series(&self, n: i64) -> Vec<Complex64> {
        let mut s = self.comps.get(&n).cloned().unwrap_or_default();
        s.resize(self.cutoff + 1, ZERO);
        s
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, &[Complex64])> {
        self.comps.iter().map(|(n, c)| (*n, c.as_slice()))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same data with a different cutoff; lowering it tallies the discarded terms.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut v = PolyVec { q0: self.q0, cutoff, comps: BTreeMap::new(), loss: self.loss };
        for (n, c) in &self.comps {
            v.insert(*n, c.clone());
        }
        v
    }

    /// Evaluates the ξ series of the μ^{q₀+n} component at ξ.
    pub fn eval_xi(&self, n: i64, xi: Complex64) -> Complex64 {
        self.comps.get(&n).map_or(ZERO, |c| c.iter().rev().fold(ZERO, |acc, v| acc * xi + v))
    }

    fn check_offset(&self, other: &PolyVec) -> Result<()> {
        if self.q0 != other.q0 {
            return Err(Error::DomainViolation(format!("q offsets differ: {} vs {}", self.q0, other.q0)));
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyVec) -> Result<PolyVec> {
        self.check_offset(other)?;
        let cutoff = self.cutoff.min(other.cutoff);
        let mut out = self.with_cutoff(cutoff);
        out.loss += other.loss;
        for (n, c) in &other.comps {
            let mut s = out.comps.remove(n).unwrap_or_default();
            if s.len() < c.len() {
                s.resize(c.len(), ZERO);
            }
            for (a, b) in s.iter_mut().zip(c) {
                *a += b;
            }
            out.insert(*n, s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyVec) -> Result<PolyVec> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> PolyVec {
        let mut out = PolyVec::zero(self.q0, self.cutoff);
        out.loss = self.loss * s.norm();
        for (n, c) in &self.comps {
            out.insert(*n, c.iter().map(|v| v * s).collect());
        }
        out
    }

    /// Pointwise product of the two functions; μ offsets add.
    pub fn mul(&self, other: &PolyVec) -> PolyVec {
        let cutoff = self.cutoff.min(other.cutoff);
        let mut out = PolyVec::zero(self.q0 + other.q0, cutoff);
        out.loss = self.loss * other.max_abs() + other.loss * self.max_abs();
        let mut acc: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
        for (na, a) in &self.comps {
            for (nb, b) in &other.comps {
                let s = acc.entry(na + nb).or_insert_with(|| vec![ZERO; cutoff + 1]);
                let prod = series_mul(a, b, cutoff);
                for (x, y) in s.iter_mut().zip(prod) {
                    *x += y;
                }
            }
        }
        for (n, c) in acc {
            out.insert(n, c);
        }
        out
    }

    /// Largest |difference| over the common cutoff.
    pub fn max_diff(&self, other: &PolyVec) -> f64 {
        let cutoff = self.cutoff.min(other.cutoff);
        self.with_cutoff(cutoff).sub(&other.with_cutoff(cutoff)).map_or(f64::INFINITY, |d| d.max_abs())
    }
}

fn series_mul(a: &[Complex64], b: &[Complex64], cutoff: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; cutoff + 1];
    for (i, x) in a.iter().enumerate().take(cutoff + 1) {
        for (j, y) in b.iter().enumerate().take(cutoff + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Applies one generator per the basis action on Ψ_{p,q}.
pub fn apply_generator(g: Generator, v: &PolyVec) -> PolyVec {
    use Generator::*;
    let lowers = matches!(g, JMinus | KPlus);
    let cutoff = if lowers { v.cutoff.saturating_sub(1) } else { v.cutoff };
    let mut out = PolyVec::zero(v.q0, cutoff);
    out.loss = v.loss;
    let mut acc: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
    let mut add = |n: i64, p: usize, val: Complex64| {
        if val == ZERO {
            return;
        }
        let s = acc.entry(n).or_default();
        if s.len() <= p {
            s.resize(p + 1, ZERO);
        }
        s[p] += val;
    };
    for (&n, c) in &v.comps {
        let q = v.q(n);
        for (p, &a) in c.iter().enumerate() {
            let pf = p as f64;
            match g {
                JPlus => add(n, p + 1, a * -(pf + q)),
                JMinus if p > 0 => add(n, p - 1, a * pf),
                J3 => add(n, p, a * (pf + q / 2.0)),
                KPlus if p > 0 => add(n + 1, p - 1, a * pf),
                KMinus => add(n - 1, p + 1, a * q),
                K3 => add(n, p, a * ((q - pf) / 2.0)),
                LPlus => add(n - 1, p, a * -q),
                LMinus => add(n + 1, p, a * (pf + q)),
                L3 => add(n, p, a * (-q - pf / 2.0)),
                _ => {}
            }
        }
    }
    for (n, c) in acc {
        out.insert(n, c);
    }
    out
}

/// Applies a linear combination of generators.
pub fn apply_element(e: &[(Coef, Generator)], v: &PolyVec) -> PolyVec {
    let mut out: Option<PolyVec> = None;
    for (c, g) in e {
        let term = apply_generator(*g, v).scale(crate::sl3::coef_to_f64(c));
        out = Some(match out {
            None => term,
            Some(o) => o.add(&term).expect("same offset"),
        });
    }
    out.unwrap_or_else(|| PolyVec::zero(v.q0, v.cutoff))
}

/// (L₋ + K₊) = μ²∂_μ + μ(1+ξ)∂_ξ.
pub fn raise_mu(v: &PolyVec) -> PolyVec {
    apply_generator(Generator::LMinus, v).add(&apply_generator(Generator::KPlus, v)).expect("same offset")
}

/// (L₊ − K₋) = −(1+ξ)∂_μ.
pub fn lower_mu(v: &PolyVec) -> PolyVec {
    apply_generator(Generator::LPlus, v).sub(&apply_generator(Generator::KMinus, v)).expect("same offset")
}

/// Γ(p+1)Γ(q+1)/Γ(p+q), with the (0,0) entry set to 0.
pub fn basis_norm(p: usize, q: f64) -> Result<f64> {
    let pf = p as f64;
    if p == 0 && q == 0.0 {
        return Ok(0.0);
    }
    let pole = |x: f64| x <= 0.0 && is_integer(x);
    if pole(pf + q) || pole(q + 1.0) {
        return Err(Error::GammaPole { p, q });
    }
    if is_integer(q) && q >= 0.0 {
        // q!·p!/(p+q−1)!, as a short product.
        let qi = q as usize;
        if qi == 0 {
            return Ok(pf);
        }
        let mut w: f64 = (1..=qi).map(|j| j as f64).product();
        for j in p + 1..p + qi {
            w /= j as f64;
        }
        return Ok(w);
    }
    let ratio = if pf + q > 0.0 { (ln_gamma(pf + 1.0) - ln_gamma(pf + q)).exp() } else { gamma(pf + 1.0) / gamma(pf + q) };
    Ok(gamma(q + 1.0) * ratio)
}

/// ⟨left, right⟩, conjugate-linear in `left`.
pub fn inner_product(left: &PolyVec, right: &PolyVec) -> Result<Complex64> {
    left.check_offset(right)?;
    let cutoff = left.cutoff.min(right.cutoff);
    let mut sum = ZERO;
    for (n, a) in &left.comps {
        let Some(b) = right.comps.get(n) else { continue };
        let q = left.q(*n);
        for p in 0..=cutoff.min(a.len().min(b.len()).saturating_sub(1)) {
            if a[p] == ZERO || b[p] == ZERO {
                continue;
            }
            sum += a[p].conj() * b[p] * basis_norm(p, q)?;
        }
    }
    Ok(sum)
}

/// The substitution ξ → L̂(ξ), μ → T̂(ξ, μ) induced by an interval's scattering data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusAction {
    pub tau: Complex64,
    pub r_right: Complex64,
    pub r_left: Complex64,
}

impl MobiusAction {
    pub fn identity() -> Self {
        MobiusAction { tau: Complex64::new(1.0, 0.0), r_right: ZERO, r_left: ZERO }
    }
}

impl From<&ScatteringTriple> for MobiusAction {
    fn from(t: &ScatteringTriple) -> Self {
        MobiusAction { tau: t.tau, r_right: t.r_right, r_left: t.r_left }
    }
}

fn pow_real(z: Complex64, q: f64) -> Complex64 {
    if is_integer(q) && q.abs() < i32::MAX as f64 {
        z.powi(q as i32)
    } else {
        z.powf(q)
    }
}

// Series of (1 − rξ)^{−q}.
fn binomial_series(r: Complex64, q: f64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut c = Complex64::new(1.0, 0.0);
    for p in 0..len {
        out.push(c);
        c *= r * ((q + p as f64) / (p as f64 + 1.0));
    }
    out
}

// s·(a + bξ)/(1 − rξ), truncated to `len` terms.
fn times_mobius(s: &[Complex64], a: Complex64, b: Complex64, r: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; len];
    for p in 0..len {
        let mut v = a * s.get(p).copied().unwrap_or(ZERO);
        if p > 0 {
            v += b * s.get(p - 1).copied().unwrap_or(ZERO) + r * out[p - 1];
        }
        out[p] = v;
    }
    out
}

/// U acting on v per μ^q g(ξ) → T̂^q g(L̂), with the default tail tolerance.
pub fn apply_u(action: &MobiusAction, v: &PolyVec) -> Result<PolyVec> {
    apply_u_with_tolerance(action, v, DEFAULT_TAIL_TOLERANCE)
}

pub fn apply_u_with_tolerance(action: &MobiusAction, v: &PolyVec, tail_tolerance: f64) -> Result<PolyVec> {
    let MobiusAction { tau, r_right, r_left } = *action;
    let b = tau * tau - r_left * r_right;
    // One extra order is carried to estimate the dropped tail.
    let len = v.cutoff + 2;
    let rho = r_right.norm().max(r_left.norm()).min(0.999);
    let mut out = PolyVec::zero(v.q0, v.cutoff);
    out.loss = v.loss;
    let mut tail: f64 = 0.0;
    for (&n, g) in &v.comps {
        let q = v.q(n);
        let mut acc = vec![ZERO; len];
        for &gp in g.iter().rev() {
            acc = times_mobius(&acc, r_left, b, r_right, len);
            acc[0] += gp;
        }
        let mut res = series_mul(&acc, &binomial_series(r_right, q, len), len - 1);
        let tq = pow_real(tau, q);
        for c in &mut res {
            *c *= tq;
        }
        let extra = res.pop().unwrap_or(ZERO).norm() / (1.0 - rho);
        let scale = res.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale > 0.0 && extra / scale > tail_tolerance {
            return Err(Error::TruncationOverflow { estimate: extra / scale, tolerance: tail_tolerance });
        }
        tail += extra;
        out.insert(n, res);
    }
    out.loss += tail;
    Ok(out)
}

/// (1+r)Σ r^p Ψ_{p,1}.
pub fn lambda_r(r: Complex64, cutoff: usize) -> PolyVec {
    lambda_power(r, 1, cutoff)
}

/// Stores conj coefficients so that the conjugate-linear slot yields (1+R_l)Σ R_l^p.
pub fn lambda_l(r: Complex64, cutoff: usize) -> PolyVec {
    lambda_power_left(r, 1, cutoff)
}

/// μⁿ(1+r)ⁿ/(1−rξ)ⁿ.
pub fn lambda_power(r: Complex64, n: u32, cutoff: usize) -> PolyVec {
    mobius_power(n as i64, r, cutoff).scale((1.0 + r).powu(n))
}

pub fn lambda_power_left(r: Complex64, n: u32, cutoff: usize) -> PolyVec {
    let v = lambda_power(r, n, cutoff);
    let mut out = PolyVec::zero(0.0, cutoff);
    for (m, c) in v.components() {
        out.insert(m, c.iter().map(|z| z.conj()).collect());
    }
    out
}

/// (μ/(1−cξ))^m.
pub fn mobius_power(m: i64, c: Complex64, cutoff: usize) -> PolyVec {
    PolyVec::from_series(m, binomial_series(c, m as f64, cutoff + 1), 0.0, cutoff)
}

fn falling_ratio(top: i64, bottom: i64) -> f64 {
    // top!/bottom! for small non-negative arguments
    let f = |n: i64| (1..=n).map(|j| j as f64).product::<f64>();
    f(top) / f(bottom)
}

/// Closed form of (L₋+K₊)ⁿ(μ/(1−cξ))^m.
pub fn ladder_power(n: u32, m: i64, c: Complex64, cutoff: usize) -> Result<PolyVec> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidArgument(format!("ladder needs m, n >= 1, got m={m}, n={n}")));
    }
    let factor = falling_ratio(m + n as i64 - 1, m - 1);
    Ok(mobius_power(m + n as i64, c, cutoff).scale((1.0 + c).powu(n) * factor))
}

/// The same power by repeated generator application; exact for p ≤ P − n.
pub fn ladder_power_by_operators(n: u32, m: i64, c: Complex64, cutoff: usize) -> PolyVec {
    (0..n).fold(mobius_power(m, c, cutoff), |v, _| raise_mu(&v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseOp {
    /// L₊⁻¹
    LPlus,
    /// (L₊ − K₋)⁻¹
    LPlusMinusKMinus,
    /// L₋⁻¹
    LMinus,
    /// (L₋ + K₊)⁻¹
    LMinusPlusKPlus,
}

pub fn inverse_operator(op: InverseOp, v: &PolyVec) -> Result<PolyVec> {
    let mut out = PolyVec::zero(v.q0, v.cutoff);
    out.loss = v.loss;
    for (&n, g) in &v.comps {
        let q = v.q(n);
        match op {
            InverseOp::LPlus | InverseOp::LPlusMinusKMinus => {
                if q <= 0.0 {
                    return Err(Error::DomainViolation(format!("L+ inverse needs mu degree > 0, got {q}")));
                }
                let mut h: Vec<Complex64> = g.iter().map(|c| -c / (q + 1.0)).collect();
                if op == InverseOp::LPlusMinusKMinus {
                    // divide by (1 + ξ)
                    h.resize(v.cutoff + 1, ZERO);
                    for p in 1..h.len() {
                        let prev = h[p - 1];
                        h[p] -= prev;
                    }
                }
                out.insert(n + 1, h);
            }
            InverseOp::LMinus | InverseOp::LMinusPlusKPlus => {
                if q <= 1.0 {
                    return Err(Error::DomainViolation(format!("L- inverse needs mu degree > 1, got {q}")));
                }
                let m1 = q - 1.0;
                let h = if op == InverseOp::LMinus {
                    g.iter().enumerate().map(|(p, c)| c / (m1 + p as f64)).collect()
                } else {
                    // (m−1)h + (1+ξ)h' = g, solved downward from h_{P+1} = 0;
                    // this picks the solution regular at ξ = −1.
                    let mut h = vec![ZERO; v.cutoff + 2];
                    for p in (0..=v.cutoff).rev() {
                        let gp = g.get(p).copied().unwrap_or(ZERO);
                        h[p] = (gp - (p as f64 + 1.0) * h[p + 1]) / (m1 + p as f64);
                    }
                    h.pop();
                    h
                };
                out.insert(n - 1, h);
            }
        }
    }
    Ok(out)
}

/// Closed form of (L₋+K₊)^{−n}(μ/(1−cξ))^m for n < m.
pub fn inverse_ladder_closed_form(n: u32, m: i64, c: Complex64, cutoff: usize) -> PolyVec {
    let factor = falling_ratio(m - n as i64 - 1, m - 1);
    mobius_power(m - n as i64, c, cutoff).scale((1.0 + c).powi(-(n as i32)) * factor)
}

/// Adjoint relations on all basis pairs with p+1 ≤ P and 0 ≤ q ≤ q_max.
pub fn adjoint_check(cutoff: usize) -> Result<Report> {
    adjoint_check_with(cutoff, 6, apply_generator)
}

pub fn adjoint_check_with(
    cutoff: usize,
    q_max: i64,
    act: impl Fn(Generator, &PolyVec) -> PolyVec,
) -> Result<Report> {
    let mut entries = Vec::new();
    for g in Generator::ALL {
        let (sign, adj) = g.adjoint();
        let mut worst: f64 = 0.0;
        for q in 0..=q_max {
            for p in 0..cutoff {
                let psi = PolyVec::basis(p, q, 0.0, cutoff);
                let image = act(g, &psi);
                for (n, c) in image.components() {
                    for (pp, _) in c.iter().enumerate() {
                        let other = PolyVec::basis(pp, n, 0.0, cutoff);
                        let lhs = inner_product(&other, &image)?;
                        let rhs = inner_product(&act(adj, &other).scale(Complex64::from(sign as f64)), &psi)?;
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        entries.push((format!("{}-adjoint", g.name()), worst));
    }
    Ok(Report { entries })
}

/// Reduced radial integral 2(1+p+q)(p+q)∫₀¹ r^{2p+1}(1−r²)^q dr against p!q!/(p+q−1)!.
pub fn inner_product_integral_check(p: usize, q: usize) -> Result<(f64, f64)> {
    if p + q < 1 {
        return Err(Error::InvalidArgument("need p + q >= 1".into()));
    }
    let rule = GaussLegendre::new(std::num::NonZeroUsize::new(32).expect("nonzero"));
    let integral = rule.integrate(0.0, 1.0, |r: f64| r.powi(2 * p as i32 + 1) * (1.0 - r * r).powi(q as i32));
    let s = (p + q) as f64;
    let quadrature = 2.0 * (1.0 + s) * s * integral;
    Ok((quadrature, basis_norm(p, q as f64)?))
}

type ExactVec = BTreeMap<(usize, i64), Coef>;

fn exact_apply(g: Generator, v: &ExactVec, cutoff: usize) -> ExactVec {
    use Generator::*;
    let mut out = ExactVec::new();
    let int = |x: i64| Complex::new(Rational64::from_integer(x), Rational64::zero());
    let half = |x: i64| Complex::new(Rational64::new(x, 2), Rational64::zero());
    for (&(p, q), c) in v {
        let pi = p as i64;
        let (target, factor) = match g {
            JPlus => ((p + 1, q), int(-(pi + q))),
            JMinus if p > 0 => ((p - 1, q), int(pi)),
            J3 => ((p, q), half(2 * pi + q)),
            KPlus if p > 0 => ((p - 1, q + 1), int(pi)),
            KMinus => ((p + 1, q - 1), int(q)),
            K3 => ((p, q), half(q - pi)),
            LPlus => ((p, q - 1), int(-q)),
            LMinus => ((p, q + 1), int(pi + q)),
            L3 => ((p, q), half(-2 * q - pi)),
            _ => continue,
        };
        if target.0 > cutoff || factor.is_zero() {
            continue;
        }
        let e = out.entry(target).or_insert_with(Coef::zero);
        *e = *e + factor * c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn exact_element(e: &Element, v: &ExactVec, cutoff: usize) -> ExactVec {
    let mut out = ExactVec::new();
    for (c, g) in e {
        for (key, val) in exact_apply(*g, v, cutoff) {
            let x = out.entry(key).or_insert_with(Coef::zero);
            *x = *x + *c * val;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn exact_residual(r: &Relation, psi: &ExactVec, cutoff: usize) -> f64 {
    let ab = exact_element(&r.a, &exact_element(&r.b, psi, cutoff), cutoff);
    let ba = exact_element(&r.b, &exact_element(&r.a, psi, cutoff), cutoff);
    let rhs = exact_element(&r.rhs, psi, cutoff);
    let mut diff = ab;
    for (key, val) in ba.into_iter().chain(rhs) {
        let x = diff.entry(key).or_insert_with(Coef::zero);
        *x = *x - val;
    }
    diff.values().map(|c| crate::sl3::coef_to_f64(c).norm()).fold(0.0, f64::max)
}

/// Every bracket relation on every Ψ_{p,q}, p ≤ P−2, 0 ≤ q ≤ q_max, in rational arithmetic.
pub fn exact_commutation_check(cutoff: usize, q_max: i64) -> Report {
    let relations = all_relations();
    let mut entries = Vec::new();
    for r in &relations {
        let mut worst: f64 = 0.0;
        for q in 0..=q_max {
            for p in 0..=cutoff.saturating_sub(2) {
                let psi = ExactVec::from([((p, q), Coef::new(Rational64::from_integer(1), Rational64::zero()))]);
                worst = worst.max(exact_residual(r, &psi, cutoff));
            }
        }
        entries.push((r.id.clone(), worst));
    }
    entries.push(("J3+K3+L3=0".into(), {
        let mut worst: f64 = 0.0;
        for q in 0..=q_max {
            for p in 0..=cutoff {
                let psi = ExactVec::from([((p, q), Coef::new(Rational64::from_integer(1), Rational64::zero()))]);
                let sum = exact_element(
                    &vec![(Coef::new(1.into(), 0.into()), Generator::J3), (Coef::new(1.into(), 0.into()), Generator::K3), (Coef::new(1.into(), 0.into()), Generator::L3)],
                    &psi,
                    cutoff,
                );
                worst = worst.max(sum.values().map(|c| crate::sl3::coef_to_f64(c).norm()).fold(0.0, f64::max));
            }
        }
        worst
    }));
    Report { entries }
}

/// The same relations through floating-point `PolyVec`s and an arbitrary generator action.
pub fn float_commutation_check_with(
    cutoff: usize,
    q_max: i64,
    act: impl Fn(Generator, &PolyVec) -> PolyVec,
) -> Report {
    let element = |e: &Element, v: &PolyVec| {
        let mut out = PolyVec::zero(v.q_offset(), v.cutoff());
        for (c, g) in e {
            out = out.add(&act(*g, v).scale(crate::sl3::coef_to_f64(c))).expect("same offset");
        }
        out
    };
    let mut entries = Vec::new();
    for r in all_relations() {
        let mut worst: f64 = 0.0;
        for q in 0..=q_max {
            for p in 0..=cutoff.saturating_sub(2) {
                let psi = PolyVec::basis(p, q, 0.0, cutoff);
                let ab = element(&r.a, &element(&r.b, &psi));
                let ba = element(&r.b, &element(&r.a, &psi));
                let rhs = element(&r.rhs, &psi);
                let diff = ab.sub(&ba).and_then(|d| d.sub(&rhs)).map_or(f64::INFINITY, |d| d.max_abs());
                worst = worst.max(diff);
            }
        }
        entries.push((r.id.clone(), worst));
    }
    Report { entries }
}

pub fn float_commutation_check(cutoff: usize, q_max: i64) -> Report {
    float_commutation_check_with(cutoff, q_max, apply_generator)
}

fn rel_diff(a: &PolyVec, b: &PolyVec, upto: usize) -> f64 {
    let (a, b) = (a.with_cutoff(upto), b.with_cutoff(upto));
    a.max_diff(&b) / b.max_abs().max(1.0)
}

/// Ladder identities for (L₋+K₊) on Möbius powers and on Λ_r, compared on orders ≤ P/2.
pub fn ladder_identities_check(c: Complex64, cutoff: usize) -> Result<Report> {
    let upto = cutoff / 2;
    let (mut single, mut iterated, mut lambda) = (0.0f64, 0.0f64, 0.0f64);
    for m in 1..=4i64 {
        let one = raise_mu(&mobius_power(m, c, cutoff));
        single = single.max(rel_diff(&one, &ladder_power(1, m, c, cutoff)?, upto));
        for n in 2..=3u32 {
            let ops = ladder_power_by_operators(n, m, c, cutoff);
            iterated = iterated.max(rel_diff(&ops, &ladder_power(n, m, c, cutoff)?, upto));
        }
    }
    let mut v = lambda_r(c, cutoff);
    let mut fact = 1.0;
    for n in 1..=3u32 {
        v = raise_mu(&v);
        fact *= n as f64;
        lambda = lambda.max(rel_diff(&v, &lambda_power(c, n + 1, cutoff).scale(Complex64::new(fact, 0.0)), upto));
    }
    Ok(Report {
        entries: vec![
            ("ladder-single-step".into(), single),
            ("ladder-iterated".into(), iterated),
            ("lambda-ladder".into(), lambda),
        ],
    })
}

/// Inverse-operator identities for 1 ≤ n < m ≤ 6, compared on orders ≤ P/2.
pub fn inverse_identities_check(c: Complex64, cutoff: usize) -> Result<Report> {
    let upto = cutoff / 2;
    let fact = |m: i64| (1..=m).map(|j| j as f64).product::<f64>();
    let (mut single, mut iterated, mut powers, mut roundtrip) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for m in 2..=6i64 {
        let v = mobius_power(m, c, cutoff);
        let once = inverse_operator(InverseOp::LMinusPlusKPlus, &v)?;
        single = single.max(rel_diff(&once, &inverse_ladder_closed_form(1, m, c, cutoff), upto));
        roundtrip = roundtrip.max(rel_diff(&raise_mu(&once), &v, upto));
        let l = inverse_operator(InverseOp::LMinus, &v)?;
        roundtrip = roundtrip.max(rel_diff(&apply_generator(Generator::LMinus, &l), &v, upto));
        for op in [InverseOp::LPlus, InverseOp::LPlusMinusKMinus] {
            let w = inverse_operator(op, &v)?;
            let back = match op {
                InverseOp::LPlus => apply_generator(Generator::LPlus, &w),
                _ => lower_mu(&w),
            };
            roundtrip = roundtrip.max(rel_diff(&back, &v, upto));
        }
        let mut it = v.clone();
        let mut lm = PolyVec::basis(0, m, 0.0, cutoff);
        let mut lp = PolyVec::basis(0, m, 0.0, cutoff);
        for n in 1..m {
            it = inverse_operator(InverseOp::LMinusPlusKPlus, &it)?;
            iterated = iterated.max(rel_diff(&it, &inverse_ladder_closed_form(n as u32, m, c, cutoff), upto));
            lm = inverse_operator(InverseOp::LMinus, &lm)?;
            lp = inverse_operator(InverseOp::LPlus, &lp)?;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let em = PolyVec::basis(0, m - n, 0.0, cutoff).scale(Complex64::new(fact(m - n - 1) / fact(m - 1), 0.0));
            let ep = PolyVec::basis(0, m + n, 0.0, cutoff).scale(Complex64::new(sign * fact(m) / fact(m + n), 0.0));
            powers = powers.max(rel_diff(&lm, &em, upto)).max(rel_diff(&lp, &ep, upto));
        }
    }
    Ok(Report {
        entries: vec![
            ("inverse-single-step".into(), single),
            ("inverse-iterated".into(), iterated),
            ("inverse-pure-powers".into(), powers),
            ("inverse-roundtrip".into(), roundtrip),
        ],
    })
}
