//! The scattering medium, described by f(x) with V_S = f² + f'.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// Shape of f on one segment. `linear` uses the absolute coordinate: f(x) = c0 + c1·x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant { c: f64 },
    Linear { c0: f64, c1: f64 },
    /// (x, f) pairs, linearly interpolated; must cover the segment.
    Sampled { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub x_start: f64,
    pub x_end: f64,
    pub profile: Profile,
}

impl Segment {
    pub fn constant(x_start: f64, x_end: f64, c: f64) -> Self {
        Segment { x_start, x_end, profile: Profile::Constant { c } }
    }

    fn value(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Constant { c } => *c,
            Profile::Linear { c0, c1 } => c0 + c1 * x,
            Profile::Sampled { points } => {
                let i = sample_cell(points, x);
                let ([xa, fa], [xb, fb]) = (points[i], points[i + 1]);
                fa + (fb - fa) * (x - xa) / (xb - xa)
            }
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { c1, .. } => *c1,
            Profile::Sampled { points } => {
                let i = sample_cell(points, x);
                let ([xa, fa], [xb, fb]) = (points[i], points[i + 1]);
                (fb - fa) / (xb - xa)
            }
        }
    }
}

// Index i with points[i].x <= x < points[i+1].x, clamped to the valid cells.
fn sample_cell(points: &[[f64; 2]], x: f64) -> usize {
    let n = points.partition_point(|p| p[0] <= x);
    n.clamp(1, points.len() - 1) - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tail {
    #[default]
    Vacuum,
    Constant { c: f64 },
}

impl Tail {
    pub fn value(self) -> f64 {
        match self {
            Tail::Vacuum => 0.0,
            Tail::Constant { c } => c,
        }
    }
}

/// Piece of f on which it is affine, f = c0 + c1·x on [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub c1: f64,
    /// Index of the originating segment, `None` for tail pieces.
    pub segment: Option<usize>,
}

impl Piece {
    pub fn value(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x
    }

    pub fn is_constant(&self) -> bool {
        self.c1 == 0.0
    }
}

/// Smooth part of V_S at a point plus the delta functions created by jumps of f.
#[derive(Debug, Clone, PartialEq)]
pub struct SchroedingerPotential {
    pub smooth: f64,
    pub delta_weights: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn config_error(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    segments: Vec<Segment>,
    #[serde(default)]
    left_tail: Tail,
    #[serde(default)]
    right_tail: Tail,
}

impl PotentialSpec {
    pub fn new(segments: Vec<Segment>, left_tail: Tail, right_tail: Tail) -> Result<Self> {
        let spec = PotentialSpec { segments, left_tail, right_tail };
        spec.validate().map_err(|e| Error::InvalidPotential(e.to_string()))?;
        Ok(spec)
    }

    pub fn vacuum() -> Self {
        PotentialSpec { segments: Vec::new(), left_tail: Tail::Vacuum, right_tail: Tail::Vacuum }
    }

    /// Stack of constant slabs starting at `x0`, given as (width, amplitude), vacuum tails.
    pub fn slabs(x0: f64, layers: &[(f64, f64)]) -> Result<Self> {
        let mut x = x0;
        let mut segments = Vec::with_capacity(layers.len());
        for &(width, c) in layers {
            segments.push(Segment::constant(x, x + width, c));
            x += width;
        }
        Self::new(segments, Tail::Vacuum, Tail::Vacuum)
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("<document>", e.to_string()))?;
        let spec: PotentialSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            config_error(path_or_root(e.path().to_string()), e.inner().message().to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let spec: PotentialSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            config_error(path_or_root(e.path().to_string()), e.inner().to_string())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a potential file; `.json` is read as JSON, anything else as TOML.
    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("<file>", format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|s| s.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    fn validate(&self) -> std::result::Result<(), ConfigError> {
        let finite = |v: f64, field: String| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(config_error(field, "must be finite"))
            }
        };
        for (side, tail) in [("left_tail", self.left_tail), ("right_tail", self.right_tail)] {
            finite(tail.value(), format!("{side}.c"))?;
        }
        if self.segments.is_empty() && self.left_tail != self.right_tail {
            return Err(config_error("segments", "empty segment list requires identical tails"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            let at = |f: &str| format!("segments[{i}].{f}");
            finite(s.x_start, at("x_start"))?;
            finite(s.x_end, at("x_end"))?;
            if s.x_start >= s.x_end {
                return Err(config_error(at("x_end"), "must exceed x_start"));
            }
            if i > 0 && self.segments[i - 1].x_end != s.x_start {
                return Err(config_error(at("x_start"), "segments must be contiguous"));
            }
            match &s.profile {
                Profile::Constant { c } => finite(*c, at("profile.params.c"))?,
                Profile::Linear { c0, c1 } => {
                    finite(*c0, at("profile.params.c0"))?;
                    finite(*c1, at("profile.params.c1"))?;
                }
                Profile::Sampled { points } => {
                    let field = at("profile.params.points");
                    if points.len() < 2 {
                        return Err(config_error(field, "need at least two points"));
                    }
                    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                        return Err(config_error(field, "must be finite"));
                    }
                    if points.windows(2).any(|w| w[0][0] >= w[1][0]) {
                        return Err(config_error(field, "x values must be strictly increasing"));
                    }
                    if points[0][0] > s.x_start || points[points.len() - 1][0] < s.x_end {
                        return Err(config_error(field, "samples must cover the segment"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn left_tail(&self) -> Tail {
        self.left_tail
    }

    pub fn right_tail(&self) -> Tail {
        self.right_tail
    }

    pub fn is_vacuum_tailed(&self) -> bool {
        self.left_tail == Tail::Vacuum && self.right_tail == Tail::Vacuum
    }

    /// Hull [x_L, x_R] of the segments.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.x_start, self.segments.last()?.x_end))
    }

    /// Normalization anchor: support midpoint, or 0 without segments.
    pub fn midpoint(&self) -> f64 {
        self.support().map_or(0.0, |(a, b)| 0.5 * (a + b))
    }

    fn segment_at(&self, x: f64) -> Option<usize> {
        let (xl, xr) = self.support()?;
        if x < xl || x > xr {
            return None;
        }
        let n = self.segments.partition_point(|s| s.x_start <= x);
        Some(n.max(1) - 1)
    }

    pub fn evaluate_f(&self, x: f64) -> f64 {
        match self.segment_at(x) {
            Some(i) => self.segments[i].value(x),
            None => self.tail_at(x).value(),
        }
    }

    pub fn evaluate_f_derivative(&self, x: f64) -> f64 {
        match self.segment_at(x) {
            Some(i) => self.segments[i].slope(x),
            None => 0.0,
        }
    }

    fn tail_at(&self, x: f64) -> Tail {
        match self.support() {
            Some((xl, _)) if x < xl => self.left_tail,
            Some(_) => self.right_tail,
            None => self.left_tail,
        }
    }

    pub fn schroedinger_potential(&self, x: f64) -> SchroedingerPotential {
        let f = self.evaluate_f(x);
        SchroedingerPotential { smooth: f * f + self.evaluate_f_derivative(x), delta_weights: self.jumps() }
    }

    /// Jump points of f with weights f(x⁺) − f(x⁻).
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let Some((xl, xr)) = self.support() else { return Vec::new() };
        let mut out = Vec::new();
        let mut left = self.left_tail.value();
        for s in &self.segments {
            let w = s.value(s.x_start) - left;
            if w != 0.0 {
                out.push((s.x_start, w));
            }
            left = s.value(s.x_end);
        }
        let w = self.right_tail.value() - left;
        if w != 0.0 {
            out.push((xr, w));
        }
        debug_assert!(out.iter().all(|&(p, _)| p >= xl && p <= xr));
        out
    }

    /// Affine pieces covering [x1, x2] in increasing order, tails included.
    pub fn pieces(&self, x1: f64, x2: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        if x1 >= x2 {
            return out;
        }
        let mut push = |a: f64, b: f64, c0: f64, c1: f64, segment: Option<usize>| {
            let (a, b) = (a.max(x1), b.min(x2));
            if a < b {
                out.push(Piece { a, b, c0, c1, segment });
            }
        };
        let Some((xl, xr)) = self.support() else {
            push(x1, x2, self.left_tail.value(), 0.0, None);
            return out;
        };
        push(f64::NEG_INFINITY, xl, self.left_tail.value(), 0.0, None);
        for (i, s) in self.segments.iter().enumerate() {
            if s.x_end <= x1 || s.x_start >= x2 {
                continue;
            }
            match &s.profile {
                Profile::Constant { c } => push(s.x_start, s.x_end, *c, 0.0, Some(i)),
                Profile::Linear { c0, c1 } => push(s.x_start, s.x_end, *c0, *c1, Some(i)),
                Profile::Sampled { points } => {
                    for w in points.windows(2) {
                        let ([xa, fa], [xb, fb]) = (w[0], w[1]);
                        let (a, b) = (xa.max(s.x_start), xb.min(s.x_end));
                        if a >= b {
                            continue;
                        }
                        let slope = (fb - fa) / (xb - xa);
                        push(a, b, fa - slope * xa, slope, Some(i));
                    }
                }
            }
        }
        push(xr, f64::INFINITY, self.right_tail.value(), 0.0, None);
        out
    }

    /// True when every piece over [x1, x2] is constant.
    pub fn is_piecewise_constant(&self, x1: f64, x2: f64) -> bool {
        self.pieces(x1, x2).iter().all(Piece::is_constant)
    }

    /// χ_[x1,x2]·f with vacuum tails.
    pub fn truncate(&self, x1: f64, x2: f64) -> PotentialSpec {
        let mut segments: Vec<Segment> = Vec::new();
        let mut previous = None;
        for p in self.pieces(x1, x2) {
            let same_segment = p.segment.is_some() && p.segment == previous;
            previous = p.segment;
            let seg = match p.segment.map(|i| &self.segments[i].profile) {
                Some(Profile::Sampled { points }) => {
                    // Keep sampled segments sampled; pieces of one segment are merged below.
                    let mut pts: Vec<[f64; 2]> = vec![[p.a, p.value(p.a)]];
                    pts.extend(points.iter().filter(|q| q[0] > p.a && q[0] < p.b));
                    pts.push([p.b, p.value(p.b)]);
                    Segment { x_start: p.a, x_end: p.b, profile: Profile::Sampled { points: pts } }
                }
                Some(Profile::Linear { .. }) => {
                    Segment { x_start: p.a, x_end: p.b, profile: Profile::Linear { c0: p.c0, c1: p.c1 } }
                }
                _ => Segment::constant(p.a, p.b, p.c0),
            };
            match (segments.last_mut(), &seg.profile) {
                (Some(Segment { x_end, profile: Profile::Sampled { points }, .. }), Profile::Sampled { points: new })
                    if same_segment && *x_end == seg.x_start =>
                {
                    points.extend(new.iter().skip(1));
                    *x_end = seg.x_end;
                }
                _ => segments.push(seg),
            }
        }
        let is_zero = |s: &Segment| matches!(s.profile, Profile::Constant { c } if c == 0.0);
        while segments.first().is_some_and(is_zero) {
            segments.remove(0);
        }
        while segments.last().is_some_and(is_zero) {
            segments.pop();
        }
        PotentialSpec { segments, left_tail: Tail::Vacuum, right_tail: Tail::Vacuum }
    }
}

fn path_or_root(path: String) -> String {
    if path == "." || path.is_empty() {
        "<document>".to_string()
    } else {
        path
    }
}

/// Complex wavenumber restricted to the closed upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber(Complex64);

impl Wavenumber {
    pub fn new(k: Complex64) -> Result<Self> {
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(Error::InvalidArgument("k must be finite".into()));
        }
        if k.im < 0.0 {
            return Err(Error::InvalidArgument(format!("Im k = {} is negative", k.im)));
        }
        Ok(Wavenumber(k))
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}
