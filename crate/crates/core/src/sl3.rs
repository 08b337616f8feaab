//! sl(2,C) and sl(3,C) in their fundamental matrix forms, the commutation table,
//! the Gauss factorization of U, the intertwining identities, and the Wronskian route.

use nalgebra::{Matrix2, Matrix3};
use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::green::{GreenValue, Route};
use crate::potential::{PotentialSpec, Wavenumber};
use crate::transfer::{self, ScatteringTriple, TransferMatrix};

pub type Mat3 = Matrix3<Complex64>;
pub type Coef = Complex<Rational64>;

/// Below this multiple of |2ik| the Wronskian is treated as vanishing.
pub const WRONSKIAN_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    JPlus,
    JMinus,
    J3,
    KPlus,
    KMinus,
    K3,
    LPlus,
    LMinus,
    L3,
}

impl Generator {
    pub const ALL: [Generator; 9] = [
        Generator::JPlus,
        Generator::JMinus,
        Generator::J3,
        Generator::KPlus,
        Generator::KMinus,
        Generator::K3,
        Generator::LPlus,
        Generator::LMinus,
        Generator::L3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::JPlus => "J+",
            Generator::JMinus => "J-",
            Generator::J3 => "J3",
            Generator::KPlus => "K+",
            Generator::KMinus => "K-",
            Generator::K3 => "K3",
            Generator::LPlus => "L+",
            Generator::LMinus => "L-",
            Generator::L3 => "L3",
        }
    }

    /// Generator with adjoint g† = sign·adjoint_of(g).
    pub fn adjoint(self) -> (i64, Generator) {
        use Generator::*;
        match self {
            JPlus => (-1, JMinus),
            JMinus => (-1, JPlus),
            KPlus => (1, KMinus),
            KMinus => (1, KPlus),
            LPlus => (-1, LMinus),
            LMinus => (-1, LPlus),
            g => (1, g),
        }
    }
}

/// Linear combination of generators with Gaussian-rational coefficients.
pub type Element = Vec<(Coef, Generator)>;

fn rat(n: i64, d: i64) -> Coef {
    Complex::new(Rational64::new(n, d), Rational64::zero())
}

fn gen(g: Generator) -> Element {
    vec![(rat(1, 1), g)]
}

fn scaled(n: i64, d: i64, g: Generator) -> Element {
    vec![(rat(n, d), g)]
}

pub fn coef_to_f64(c: &Coef) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// [a, b] = rhs.
#[derive(Debug, Clone)]
pub struct Relation {
    pub id: String,
    pub a: Element,
    pub b: Element,
    pub rhs: Element,
}

fn relation(id: impl Into<String>, a: Element, b: Element, rhs: Element) -> Relation {
    Relation { id: id.into(), a, b, rhs }
}

/// The 36 bracket relations among the nine generators.
pub fn sl3_relations() -> Vec<Relation> {
    use Generator::*;
    let families = [("J", JPlus, JMinus, J3), ("K", KPlus, KMinus, K3), ("L", LPlus, LMinus, L3)];
    let mut out = Vec::new();
    for (n, p, m, d) in families {
        out.push(relation(format!("[{n}+,{n}-]=2{n}3"), gen(p), gen(m), scaled(2, 1, d)));
        out.push(relation(format!("[{n}3,{n}+]={n}+"), gen(d), gen(p), gen(p)));
        out.push(relation(format!("[{n}3,{n}-]=-{n}-"), gen(d), gen(m), scaled(-1, 1, m)));
    }
    // Off-family diagonal actions: [X3, Y±] = ∓½Y± for every X ≠ Y.
    for (xn, _, _, x3) in families {
        for (yn, yp, ym, _) in families {
            if xn == yn {
                continue;
            }
            out.push(relation(format!("[{xn}3,{yn}+]=-1/2{yn}+"), gen(x3), gen(yp), scaled(-1, 2, yp)));
            out.push(relation(format!("[{xn}3,{yn}-]=1/2{yn}-"), gen(x3), gen(ym), scaled(1, 2, ym)));
        }
    }
    // Cyclic J → K → L → J.
    let cyc = [(families[0], families[1], families[2]), (families[1], families[2], families[0]), (families[2], families[0], families[1])];
    for ((an, ap, am, _), (bn, bp, bm, _), (cn, cp, cm, _)) in cyc {
        out.push(relation(format!("[{an}+,{bn}+]={cn}-"), gen(ap), gen(bp), gen(cm)));
        out.push(relation(format!("[{an}-,{bn}-]=-{cn}+"), gen(am), gen(bm), scaled(-1, 1, cp)));
        out.push(relation(format!("[{an}+,{bn}-]=0"), gen(ap), gen(bm), vec![]));
        out.push(relation(format!("[{an}-,{bn}+]=0"), gen(am), gen(bp), vec![]));
    }
    for (a, b) in [(J3, K3), (K3, L3), (L3, J3)] {
        out.push(relation(format!("[{},{}]=0", a.name(), b.name()), gen(a), gen(b), vec![]));
    }
    out
}

/// Bracket relations of the two Q pairs with J±, J₃.
pub fn q_relations() -> Vec<Relation> {
    use Generator::*;
    let pairs = [("a", gen(LMinus), gen(KPlus)), ("b", scaled(-1, 1, KMinus), gen(LPlus))];
    let mut out = Vec::new();
    for (tag, qp, qm) in pairs {
        let neg = |e: &Element| e.iter().map(|(c, g)| (-*c, *g)).collect::<Element>();
        let half = |e: &Element, s: i64| e.iter().map(|(c, g)| (*c * rat(s, 2), *g)).collect::<Element>();
        out.push(relation(format!("[Q{tag}+,J3]=-1/2Q{tag}+"), qp.clone(), gen(J3), half(&qp, -1)));
        out.push(relation(format!("[Q{tag}+,J+]=0"), qp.clone(), gen(JPlus), vec![]));
        out.push(relation(format!("[Q{tag}+,J-]=-Q{tag}-"), qp.clone(), gen(JMinus), neg(&qm)));
        out.push(relation(format!("[Q{tag}-,J3]=1/2Q{tag}-"), qm.clone(), gen(J3), half(&qm, 1)));
        out.push(relation(format!("[Q{tag}-,J+]=-Q{tag}+"), qm.clone(), gen(JPlus), neg(&qp)));
        out.push(relation(format!("[Q{tag}-,J-]=0"), qm.clone(), gen(JMinus), vec![]));
    }
    out
}

/// The sl(2) relations in the J1, J2, J3 basis, with J1 = (J+ + J−)/2, J2 = (J+ − J−)/(2i).
pub fn sl2_relations() -> Vec<Relation> {
    use Generator::*;
    let half = rat(1, 2);
    let minus_half_i = Complex::new(Rational64::zero(), Rational64::new(-1, 2));
    let j1: Element = vec![(half, JPlus), (half, JMinus)];
    let j2: Element = vec![(minus_half_i, JPlus), (-minus_half_i, JMinus)];
    let times_i = |e: &Element| e.iter().map(|(c, g)| (*c * Complex::i(), *g)).collect::<Element>();
    vec![
        relation("[J1,J2]=iJ3", j1.clone(), j2.clone(), times_i(&gen(J3))),
        relation("[J2,J3]=iJ1", j2.clone(), gen(J3), times_i(&j1)),
        relation("[J3,J1]=iJ2", gen(J3), j1, times_i(&j2)),
    ]
}

/// Every relation checked by the algebra suite.
pub fn all_relations() -> Vec<Relation> {
    let mut out = sl3_relations();
    out.extend(q_relations());
    out.extend(sl2_relations());
    out
}

#[derive(Debug, Clone)]
pub struct GeneratorSet3 {
    pub j_plus: Mat3,
    pub j_minus: Mat3,
    pub j3: Mat3,
    pub k_plus: Mat3,
    pub k_minus: Mat3,
    pub k3: Mat3,
    pub l_plus: Mat3,
    pub l_minus: Mat3,
    pub l3: Mat3,
}

fn unit(i: usize, j: usize) -> Mat3 {
    let mut m = Mat3::zeros();
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

fn diag(a: f64, b: f64, c: f64) -> Mat3 {
    Mat3::from_diagonal(&nalgebra::Vector3::new(a.into(), b.into(), c.into()))
}

impl GeneratorSet3 {
    pub fn fundamental() -> Self {
        GeneratorSet3 {
            j_plus: -unit(1, 0),
            j_minus: -unit(0, 1),
            j3: diag(-0.5, 0.5, 0.0),
            k_plus: -unit(2, 1),
            k_minus: -unit(1, 2),
            k3: diag(0.0, -0.5, 0.5),
            l_plus: -unit(0, 2),
            l_minus: -unit(2, 0),
            l3: diag(0.5, 0.0, -0.5),
        }
    }

    pub fn get(&self, g: Generator) -> &Mat3 {
        match g {
            Generator::JPlus => &self.j_plus,
            Generator::JMinus => &self.j_minus,
            Generator::J3 => &self.j3,
            Generator::KPlus => &self.k_plus,
            Generator::KMinus => &self.k_minus,
            Generator::K3 => &self.k3,
            Generator::LPlus => &self.l_plus,
            Generator::LMinus => &self.l_minus,
            Generator::L3 => &self.l3,
        }
    }

    pub fn get_mut(&mut self, g: Generator) -> &mut Mat3 {
        match g {
            Generator::JPlus => &mut self.j_plus,
            Generator::JMinus => &mut self.j_minus,
            Generator::J3 => &mut self.j3,
            Generator::KPlus => &mut self.k_plus,
            Generator::KMinus => &mut self.k_minus,
            Generator::K3 => &mut self.k3,
            Generator::LPlus => &mut self.l_plus,
            Generator::LMinus => &mut self.l_minus,
            Generator::L3 => &mut self.l3,
        }
    }

    pub fn element(&self, e: &Element) -> Mat3 {
        e.iter().fold(Mat3::zeros(), |acc, (c, g)| acc + self.get(*g) * coef_to_f64(c))
    }
}

/// (relation id, max-abs residual) pairs.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub entries: Vec<(String, f64)>,
}

impl Report {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

fn max_abs3(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutation_table_check(gens: &GeneratorSet3) -> Report {
    let mut entries: Vec<(String, f64)> = all_relations()
        .iter()
        .map(|r| {
            let (a, b) = (gens.element(&r.a), gens.element(&r.b));
            (r.id.clone(), max_abs3(&(a * b - b * a - gens.element(&r.rhs))))
        })
        .collect();
    entries.push(("J3+K3+L3=0".into(), max_abs3(&(gens.j3 + gens.k3 + gens.l3))));
    let trace = Generator::ALL.iter().map(|g| gens.get(*g).trace().norm()).fold(0.0, f64::max);
    entries.push(("traceless".into(), trace));
    entries.push(("sl2-basis-2x2".into(), sl2_matrix_check()));
    Report { entries }
}

/// The three 2×2 basis matrices, checked directly against [J1,J2] = iJ3 cyclically.
pub fn sl2_matrices() -> [Matrix2<Complex64>; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let z = c(0.0, 0.0);
    [
        Matrix2::new(z, c(-0.5, 0.0), c(-0.5, 0.0), z),
        Matrix2::new(z, c(0.0, -0.5), c(0.0, 0.5), z),
        Matrix2::new(c(-0.5, 0.0), z, z, c(0.5, 0.0)),
    ]
}

fn sl2_matrix_check() -> f64 {
    let j = sl2_matrices();
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for n in 0..3 {
        let (a, b, c) = (&j[n], &j[(n + 1) % 3], &j[(n + 2) % 3]);
        let r = a * b - b * a - c * i;
        worst = worst.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    worst
}

/// 3×3 embedding of a 2×2 evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution3 {
    pub u: Mat3,
    pub x1: f64,
    pub x2: f64,
    pub k: Wavenumber,
}

pub fn embed_transfer(m: &TransferMatrix) -> Evolution3 {
    let z = Complex64::new(0.0, 0.0);
    let u = Mat3::new(
        m.alpha_plus, m.beta_minus, z,
        m.beta_plus, m.alpha_minus, z,
        z, z, Complex64::new(1.0, 0.0),
    );
    Evolution3 { u, x1: m.x1, x2: m.x2, k: m.k }
}

fn check_same_interval(t: &ScatteringTriple, u: &Evolution3) -> Result<()> {
    if t.x1 != u.x1 || t.x2 != u.x2 || t.k != u.k {
        return Err(Error::IntervalMismatch("triple and evolution describe different intervals".into()));
    }
    Ok(())
}

/// exp(−R_r J₊)·τ^{2J₃}·exp(R_l J₋) against u, relative to max(1, |u|).
pub fn gauss_factorization_check(triple: &ScatteringTriple, u: &Evolution3) -> Result<f64> {
    check_same_interval(triple, u)?;
    gauss_residual(&GeneratorSet3::fundamental(), triple, &u.u)
}

fn gauss_residual(g: &GeneratorSet3, t: &ScatteringTriple, u: &Mat3) -> Result<f64> {
    if t.tau == Complex64::new(0.0, 0.0) {
        return Err(Error::LogBranch);
    }
    let log_tau = t.tau.ln();
    let product = (g.j_plus * -t.r_right).exp() * (g.j3 * (log_tau * 2.0)).exp() * (g.j_minus * t.r_left).exp();
    Ok(max_abs3(&(product - u)) / max_abs3(u).max(1.0))
}

/// Intertwining identities of both Q pairs and the commutant of U.
pub fn intertwiner_check(u: &Evolution3, triple: &ScatteringTriple) -> Result<Report> {
    check_same_interval(triple, u)?;
    Ok(intertwiner_report(&GeneratorSet3::fundamental(), &u.u, triple))
}

fn intertwiner_report(g: &GeneratorSet3, u: &Mat3, t: &ScatteringTriple) -> Report {
    let scale = max_abs3(u).max(1.0);
    let pairs = [("a", g.l_minus, g.k_plus), ("b", -g.k_minus, g.l_plus)];
    let mut entries = Vec::new();
    for (tag, qp, qm) in pairs {
        let r1 = u * qp - qp * u * t.tau - u * qm * t.r_left;
        let r2 = qm * u - u * qm * t.tau - qp * u * t.r_right;
        entries.push((format!("UQ{tag}+"), max_abs3(&r1) / scale));
        entries.push((format!("Q{tag}-U"), max_abs3(&r2) / scale));
    }
    let cross = pairs[1].2 * pairs[0].1 - pairs[1].1 * pairs[0].2;
    entries.push(("commutant".into(), max_abs3(&(cross * u - u * cross)) / scale));
    Report { entries }
}

/// Rebuilds both checks from a possibly corrupted generator set.
pub fn gauss_factorization_check_with(gens: &GeneratorSet3, triple: &ScatteringTriple, u: &Evolution3) -> Result<f64> {
    check_same_interval(triple, u)?;
    gauss_residual(gens, triple, &u.u)
}

pub fn intertwiner_check_with(gens: &GeneratorSet3, u: &Evolution3, triple: &ScatteringTriple) -> Result<Report> {
    check_same_interval(triple, u)?;
    Ok(intertwiner_report(gens, &u.u, triple))
}

/// Wronskian of φ₊ and φ₋ evaluated at `point`, both normalized at the support midpoint.
pub fn wronskian_at(spec: &PotentialSpec, point: f64, k: Wavenumber) -> Result<Complex64> {
    let x0 = spec.midpoint();
    let ik = Complex64::new(0.0, 1.0) * k.value();
    let (phi_p, chi_p) = right_solution(spec, point, x0, k)?;
    let (phi_m, chi_m) = left_solution(spec, point, x0, k)?;
    Ok(-ik * (phi_p * chi_m + chi_p * phi_m))
}

// φ₋ and its partner at y, normalized by τ(x0, y).
fn left_solution(spec: &PotentialSpec, y: f64, x0: f64, k: Wavenumber) -> Result<(Complex64, Complex64)> {
    let r = transfer::r_right_from_minus_infinity(spec, y, k)?;
    let t = transfer::coefficients_between(spec, y, x0, k)?;
    let common = t.tau / (1.0 - t.r_left * r);
    Ok(((1.0 + r) * common, (1.0 - r) * common))
}

// φ₊ and its partner at x, normalized by τ(x, x0).
fn right_solution(spec: &PotentialSpec, x: f64, x0: f64, k: Wavenumber) -> Result<(Complex64, Complex64)> {
    let r = transfer::r_left_to_plus_infinity(spec, x, k)?;
    let t = transfer::coefficients_between(spec, x0, x, k)?;
    let common = t.tau / (1.0 - r * t.r_right);
    Ok(((1.0 + r) * common, (1.0 - r) * common))
}

/// 2ik·G = −2ik φ₊(max)φ₋(min)/W.
pub fn green_wronskian(spec: &PotentialSpec, x: f64, y: f64, k: Wavenumber) -> Result<GreenValue> {
    let kk = k.value();
    if kk == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("k = 0 has no Green function normalization".into()));
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let x0 = spec.midpoint();
    let two_ik = Complex64::new(0.0, 2.0) * kk;
    let w = wronskian_at(spec, x0, k)?;
    if w.norm() < WRONSKIAN_THRESHOLD * two_ik.norm() {
        return Err(Error::WronskianZero { magnitude: w.norm() });
    }
    let (phi_p, _) = right_solution(spec, hi, x0, k)?;
    let (phi_m, _) = left_solution(spec, lo, x0, k)?;
    Ok(GreenValue { value: -two_ik * phi_p * phi_m / w, x, y, k, route: Route::Wronskian, truncation_loss: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Segment, Tail};
    use crate::transfer::{coefficients_between, evolution};
    use proptest::prelude::*;

    fn k(re: f64, im: f64) -> Wavenumber {
        Wavenumber::from_parts(re, im).unwrap()
    }

    #[test]
    fn fundamental_table_is_exact() {
        let report = commutation_table_check(&GeneratorSet3::fundamental());
        assert_eq!(sl3_relations().len(), 36);
        for (id, r) in &report.entries {
            assert_eq!(*r, 0.0, "{id}");
        }
    }

    #[test]
    fn j_plus_j_minus_bracket() {
        let g = GeneratorSet3::fundamental();
        assert_eq!(g.j_plus * g.j_minus - g.j_minus * g.j_plus, g.j3 * Complex64::from(2.0));
    }

    #[test]
    fn top_left_blocks_match_the_2x2_basis() {
        let g = GeneratorSet3::fundamental();
        let [j1, _, j3] = sl2_matrices();
        let half = Complex64::from(0.5);
        let g1 = (g.j_plus + g.j_minus) * half;
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g1[(i, j)], j1[(i, j)]);
                assert_eq!(g.j3[(i, j)], j3[(i, j)]);
            }
        }
    }

    #[test]
    fn corruption_is_detected() {
        let mut g = GeneratorSet3::fundamental();
        g.k_plus[(2, 1)] += Complex64::new(1e-3, 0.0);
        assert!(commutation_table_check(&g).max_residual() > 1e-4);
    }

    #[test]
    fn embedding_of_identity_and_free() {
        let kk = k(1.1, 0.2);
        assert_eq!(embed_transfer(&TransferMatrix::identity(0.0, kk)).u, Mat3::identity());
        let e = embed_transfer(&TransferMatrix::free(0.0, 0.7, kk));
        let p = (Complex64::new(0.0, -0.7) * kk.value()).exp();
        assert_eq!(e.u, Mat3::from_diagonal(&nalgebra::Vector3::new(p, p.inv(), Complex64::from(1.0))));
        let spec = PotentialSpec::slabs(0.0, &[(0.5, 1.0), (0.4, -2.0)]).unwrap();
        let e = embed_transfer(&evolution(&spec, 0.0, 0.9, kk).unwrap());
        assert!((e.u.determinant() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn gauss_factorization_identity_and_slab() {
        let kk = k(0.9, 0.4);
        let id = TransferMatrix::identity(0.0, kk);
        let t = transfer::scattering_coefficients(&id).unwrap();
        assert_eq!(gauss_factorization_check(&t, &embed_transfer(&id)).unwrap(), 0.0);
        let m = evolution(&PotentialSpec::slabs(0.0, &[(1.0, 1.3)]).unwrap(), 0.0, 1.0, kk).unwrap();
        let t = transfer::scattering_coefficients(&m).unwrap();
        assert!(gauss_factorization_check(&t, &embed_transfer(&m)).unwrap() < 1e-10);
    }

    #[test]
    fn intertwiners_on_free_slab() {
        let m = TransferMatrix::free(0.0, 1.3, k(1.0, 0.1));
        let t = transfer::scattering_coefficients(&m).unwrap();
        assert!(intertwiner_check(&embed_transfer(&m), &t).unwrap().max_residual() < 1e-12);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let kk = k(1.0, 0.0);
        let t = transfer::scattering_coefficients(&TransferMatrix::free(0.0, 1.0, kk)).unwrap();
        let u = embed_transfer(&TransferMatrix::free(0.0, 2.0, kk));
        assert!(matches!(gauss_factorization_check(&t, &u), Err(Error::IntervalMismatch(_))));
    }

    #[test]
    fn wronskian_route_free_space() {
        let kk = k(1.2, 0.3);
        for (x, y) in [(0.4, -0.3), (-1.0, 2.0), (0.5, 0.5)] {
            let g = green_wronskian(&PotentialSpec::vacuum(), x, y, kk).unwrap();
            let expect = (Complex64::new(0.0, 1.0) * kk.value() * (x - y as f64).abs()).exp();
            assert!((g.value - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn wronskian_right_edge_coincident_point() {
        let spec = PotentialSpec::slabs(0.0, &[(0.3, 1.5), (0.8, -0.7)]).unwrap();
        let kk = k(0.8, 0.2);
        let g = green_wronskian(&spec, 1.1, 1.1, kk).unwrap();
        let r = coefficients_between(&spec, 0.0, 1.1, kk).unwrap().r_right;
        assert!((g.value - (1.0 + r)).norm() < 1e-12);
    }

    #[test]
    fn wronskian_is_position_independent() {
        let spec = PotentialSpec::new(
            vec![Segment::constant(-0.5, 0.2, 1.4), Segment::constant(0.2, 1.0, -0.6)],
            Tail::Constant { c: 0.7 },
            Tail::Vacuum,
        )
        .unwrap();
        let kk = k(1.3, 0.25);
        let w0 = wronskian_at(&spec, spec.midpoint(), kk).unwrap();
        for p in [-2.0, -0.5, 0.0, 0.6, 1.0, 2.5] {
            let w = wronskian_at(&spec, p, kk).unwrap();
            assert!((w - w0).norm() < 1e-11 * w0.norm(), "W({p}) = {w} vs {w0}");
        }
    }

    fn layers() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.1f64..1.0, -2.0f64..2.0), 1..6)
    }

    proptest! {
        #[test]
        fn gauss_and_intertwiners_on_random_stacks(l in layers(), r in 0.3f64..3.0, th in 0.0f64..1.5707) {
            let spec = PotentialSpec::slabs(0.0, &l).unwrap();
            let kk = k(r * th.cos(), r * th.sin());
            let (_, xr) = spec.support().unwrap();
            let m = evolution(&spec, -0.1, xr + 0.1, kk).unwrap();
            let t = transfer::scattering_coefficients(&m).unwrap();
            let e = embed_transfer(&m);
            prop_assert!(gauss_factorization_check(&t, &e).unwrap() < 1e-9);
            prop_assert!(intertwiner_check(&e, &t).unwrap().max_residual() < 1e-9);
        }
    }
}
