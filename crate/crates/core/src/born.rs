//! Fixed-order multiple-scattering series for 2ik·G in powers of f.
//!
//! A path leaves y, turns around at every scattering point z₁, z₂, … and ends at x.
//! Each leg contributes e^{ik|Δ|}; a vertex contributes −f(z) when the wave arrives
//! moving right and +f(z) when it arrives moving left. Region A collects the paths
//! whose first leg runs left (z₁ ≤ y), region B those whose first leg runs right.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::green::{GreenValue, Route};
use crate::potential::{PotentialSpec, Wavenumber};

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// the unscattered wave
    Direct,
    /// first leg leftward
    A,
    /// first leg rightward
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub order: usize,
    pub region: Region,
    /// product of the vertex signs along the path
    pub sign: i32,
    /// signed contribution to 2ikG
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub nodes_per_panel: usize,
    /// largest number of panels allowed across the support
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes_per_panel: 32, max_panels: 64 }
    }
}

/// Region-terms at a given order: the direct wave alone at order 0, then one per initial direction.
pub fn path_term_count(order: usize) -> usize {
    if order == 0 {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Left,
    Right,
}

impl Dir {
    fn flip(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
        }
    }

    /// Vertex sign for a wave arriving while moving in this direction.
    fn vertex_sign(self) -> f64 {
        match self {
            Dir::Right => -1.0,
            Dir::Left => 1.0,
        }
    }
}

struct Integrator<'a> {
    spec: &'a PotentialSpec,
    ik: Complex64,
    x: f64,
    breaks: Vec<f64>,
    /// Gauss–Legendre nodes and weights on [−1, 1]
    rule: Vec<(f64, f64)>,
}

impl Integrator<'_> {
    /// Paths with `remaining` vertices still to place, currently at `pos` moving `dir`.
    fn paths(&self, remaining: usize, pos: f64, dir: Dir) -> Complex64 {
        if remaining == 0 {
            return (self.ik * (self.x - pos).abs()).exp();
        }
        let (s0, s1) = (self.breaks[0], *self.breaks.last().unwrap());
        let (mut a, mut b) = match dir {
            Dir::Right => (pos.max(s0), s1),
            Dir::Left => (s0, pos.min(s1)),
        };
        if remaining == 1 {
            // The last leg must still be able to reach x.
            match dir.flip() {
                Dir::Right => b = b.min(self.x),
                Dir::Left => a = a.max(self.x),
            }
        }
        if !(b > a) {
            return Complex64::new(0.0, 0.0);
        }
        let sign = dir.vertex_sign();
        let mut panel_ends = vec![a];
        panel_ends.extend(self.breaks.iter().copied().filter(|&t| t > a && t < b));
        panel_ends.push(b);
        let mut total = Complex64::new(0.0, 0.0);
        for w in panel_ends.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for &(t, wt) in &self.rule {
                // Interior nodes only, so the side of a jump never matters.
                let z = mid + half * t;
                let leg = (self.ik * (z - pos).abs()).exp();
                total += wt * half * sign * self.spec.evaluate_f(z) * leg * self.paths(remaining - 1, z, dir.flip());
            }
        }
        total
    }
}

/// Partial sum of the series through `max_order`, with the individual region-terms.
pub fn born_series(
    spec: &PotentialSpec,
    x: f64,
    y: f64,
    k: Wavenumber,
    max_order: usize,
    quad: &QuadratureConfig,
) -> Result<(GreenValue, Vec<SeriesTerm>)> {
    if max_order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order must be at most {MAX_ORDER}, got {max_order}")));
    }
    if !spec.is_vacuum_tailed() {
        return Err(Error::DomainViolation("the scattering series needs f = 0 outside a compact support".into()));
    }
    let Some(nodes) = NonZeroUsize::new(quad.nodes_per_panel) else {
        return Err(Error::InvalidArgument("nodes_per_panel must be positive".into()));
    };
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let ik = Complex64::new(0.0, 1.0) * k.value();
    let mut terms = vec![SeriesTerm {
        order: 0,
        region: Region::Direct,
        sign: 1,
        value: (ik * (hi - lo)).exp(),
    }];
    if let Some((s0, s1)) = spec.support().filter(|_| max_order > 0) {
        let mut breaks: Vec<f64> = spec.pieces(s0, s1).iter().flat_map(|p| [p.a, p.b]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let panels = breaks.len().saturating_sub(1);
        if panels > quad.max_panels {
            return Err(Error::QuadratureBudget { needed: panels, budget: quad.max_panels });
        }
        let integ = Integrator { spec, ik, x: hi, breaks, rule: GaussLegendre::new(nodes).as_node_weight_pairs().to_vec() };
        for order in 1..=max_order {
            for (region, first) in [(Region::A, Dir::Left), (Region::B, Dir::Right)] {
                let mut sign = 1;
                let mut d = first;
                for _ in 0..order {
                    sign *= d.vertex_sign() as i32;
                    d = d.flip();
                }
                terms.push(SeriesTerm { order, region, sign, value: integ.paths(order, lo, first) });
            }
        }
    }
    let value = terms.iter().map(|t| t.value).sum();
    let gv = GreenValue { value, x, y, k, route: Route::Born(max_order), truncation_loss: 0.0 };
    Ok((gv, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::green_closed_form;
    use crate::potential::{Profile, Segment, Tail};

    fn k(re: f64, im: f64) -> Wavenumber {
        Wavenumber::from_parts(re, im).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(path_term_count(0), 1);
        assert_eq!(path_term_count(1), 2);
        assert_eq!(path_term_count(2), 2);
        assert_eq!(path_term_count(3), 2);
    }

    #[test]
    fn vacuum_has_only_the_direct_wave() {
        let kk = k(1.2, 0.1);
        let (g, terms) = born_series(&PotentialSpec::vacuum(), 0.7, -0.2, kk, 3, &QuadratureConfig::default()).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((g.value - (Complex64::i() * kk.value() * 0.9).exp()).norm() < 1e-15);
    }

    #[test]
    fn zero_amplitude_slab_gives_zero_terms() {
        let spec = PotentialSpec::slabs(0.0, &[(1.0, 0.0)]).unwrap();
        let (_, terms) = born_series(&spec, 0.5, 0.2, k(1.0, 0.0), 3, &QuadratureConfig::default()).unwrap();
        assert!(terms.iter().skip(1).all(|t| t.value.norm() < 1e-300));
    }

    #[test]
    fn signs_follow_direction_flips() {
        let spec = PotentialSpec::slabs(0.0, &[(1.0, 0.3)]).unwrap();
        let (_, terms) = born_series(&spec, 0.6, 0.4, k(1.0, 0.0), 3, &QuadratureConfig::default()).unwrap();
        let signs: Vec<(usize, Region, i32)> = terms.iter().map(|t| (t.order, t.region, t.sign)).collect();
        assert_eq!(
            signs,
            vec![
                (0, Region::Direct, 1),
                (1, Region::A, 1),
                (1, Region::B, -1),
                (2, Region::A, -1),
                (2, Region::B, -1),
                (3, Region::A, -1),
                (3, Region::B, 1),
            ]
        );
    }

    #[test]
    fn first_order_matches_closed_integrals() {
        // f = c on [0, L]; y and x inside the slab.
        let (c, l, x, y) = (0.4, 1.0, 0.7, 0.2);
        let kk = k(1.3, 0.2);
        let ik = Complex64::i() * kk.value();
        let spec = PotentialSpec::slabs(0.0, &[(l, c)]).unwrap();
        let (_, terms) = born_series(&spec, x, y, kk, 1, &QuadratureConfig::default()).unwrap();
        // +c ∫_0^y e^{ik(x+y−2z)} dz and −c ∫_x^L e^{−ik(x+y−2z)} dz
        let left = c * (ik * (x + y)).exp() * (1.0 - (-2.0 * ik * y).exp()) / (2.0 * ik);
        let right = -c * (-ik * (x + y)).exp() * ((2.0 * ik * l).exp() - (2.0 * ik * x).exp()) / (2.0 * ik);
        assert!((terms[1].value - left).norm() < 1e-14);
        assert!((terms[2].value - right).norm() < 1e-14);
    }

    #[test]
    fn second_order_region_a_factorizes() {
        // A₂ = {z₁ ≤ y} × {z₂ ≥ x} is a product of two single integrals for a slab.
        let (c, x, y) = (0.5, 0.6, 0.3);
        let kk = k(0.9, 0.1);
        let ik = Complex64::i() * kk.value();
        let spec = PotentialSpec::slabs(0.0, &[(1.0, c)]).unwrap();
        let (_, terms) = born_series(&spec, x, y, kk, 2, &QuadratureConfig::default()).unwrap();
        let i1 = c * (ik * y).exp() * (1.0 - (-2.0 * ik * y).exp()) / (2.0 * ik);
        let i2 = c * (-ik * x).exp() * ((2.0 * ik).exp() - (2.0 * ik * x).exp()) / (2.0 * ik);
        assert!((terms[3].value - (-i1 * i2)).norm() < 1e-14);
    }

    #[test]
    fn weak_coupling_error_scaling() {
        let kk = k(1.0, 0.0);
        let err = |c: f64, order: usize| {
            let spec = PotentialSpec::slabs(0.0, &[(1.0, c)]).unwrap();
            let b = green_closed_form(&spec, 0.8, 0.3, kk).unwrap().value;
            let (g, _) = born_series(&spec, 0.8, 0.3, kk, order, &QuadratureConfig::default()).unwrap();
            (g.value - b).norm()
        };
        for order in 1..=2 {
            let ratio = err(0.1, order) / err(0.05, order);
            let nominal = (1u32 << (order + 1)) as f64;
            assert!((0.7 * nominal..=1.4 * nominal).contains(&ratio), "order {order}: {ratio}");
        }
        assert!(err(0.1, 3) < err(0.1, 2));
    }

    #[test]
    fn linear_profile_against_closed_form() {
        let spec = PotentialSpec::new(
            vec![
                Segment { x_start: -0.5, x_end: 0.2, profile: Profile::Linear { c0: 0.05, c1: 0.1 } },
                Segment::constant(0.2, 0.9, -0.06),
            ],
            Tail::Vacuum,
            Tail::Vacuum,
        )
        .unwrap();
        let kk = k(1.1, 0.3);
        let b = green_closed_form(&spec, 0.4, -0.1, kk).unwrap().value;
        let (g, _) = born_series(&spec, 0.4, -0.1, kk, 3, &QuadratureConfig::default()).unwrap();
        assert!((g.value - b).norm() < 1e-4);
    }

    #[test]
    fn rejects_what_it_cannot_do() {
        let q = QuadratureConfig::default();
        let tails = PotentialSpec::new(vec![], Tail::Constant { c: 0.2 }, Tail::Constant { c: 0.2 }).unwrap();
        assert!(matches!(born_series(&tails, 0.0, 0.0, k(1.0, 0.0), 1, &q), Err(Error::DomainViolation(_))));
        let many: Vec<(f64, f64)> = (0..10).map(|i| (0.1, 0.01 * i as f64)).collect();
        let spec = PotentialSpec::slabs(0.0, &many).unwrap();
        let tight = QuadratureConfig { nodes_per_panel: 32, max_panels: 4 };
        assert!(matches!(born_series(&spec, 0.0, 0.0, k(1.0, 0.0), 1, &tight), Err(Error::QuadratureBudget { .. })));
        assert!(born_series(&spec, 0.0, 0.0, k(1.0, 0.0), 4, &q).is_err());
    }
}
