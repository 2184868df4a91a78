//! Self-similar sets generated by iterated function systems of planar
//! similarities.
//!
//! Coordinates live in the unit square with the y axis pointing down, so that
//! unit-square coordinates map directly onto image rows and columns.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// A contracting similarity `p ↦ r·R(θ)·F·p + t`, where `F` mirrors the y
/// coordinate when `reflection` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub rotation: f64,
    pub reflection: bool,
    pub translation: [f64; 2],
}

impl Similarity {
    pub fn new(ratio: f64, rotation: f64, reflection: bool, translation: [f64; 2]) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidIfs(format!(
                "contraction ratio {ratio} outside (0, 1)"
            )));
        }
        if !rotation.is_finite() || !translation.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidIfs("non-finite map parameter".into()));
        }
        Ok(Similarity {
            ratio,
            rotation,
            reflection,
            translation,
        })
    }

    fn scaled(ratio: f64, t: [f64; 2]) -> Self {
        Similarity::new(ratio, 0.0, false, t).expect("preset map is valid")
    }

    fn affine(&self) -> Affine {
        let (s, c) = self.rotation.sin_cos();
        let r = self.ratio;
        let f = if self.reflection { -1.0 } else { 1.0 };
        Affine {
            m: [[r * c, -r * s * f], [r * s, r * c * f]],
            t: self.translation,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Affine {
    m: [[f64; 2]; 2],
    t: [f64; 2],
}

impl Affine {
    const IDENTITY: Affine = Affine {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: [0.0, 0.0],
    };

    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.t[0],
            self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.t[1],
        ]
    }

    /// `self ∘ other`
    fn compose(&self, other: &Affine) -> Affine {
        let a = &self.m;
        let b = &other.m;
        Affine {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            t: self.apply(other.t),
        }
    }
}

/// A finite system of contracting similarities.
#[derive(Clone, Debug, PartialEq)]
pub struct IfsSystem {
    pub name: String,
    maps: Vec<Similarity>,
}

impl IfsSystem {
    pub fn new(name: impl Into<String>, maps: Vec<Similarity>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidIfs("an IFS needs at least one map".into()));
        }
        if let Some(bad) = maps.iter().find(|m| !(m.ratio > 0.0 && m.ratio < 1.0)) {
            return Err(Error::InvalidIfs(format!(
                "contraction ratio {} outside (0, 1)",
                bad.ratio
            )));
        }
        Ok(IfsSystem {
            name: name.into(),
            maps,
        })
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    /// Built-in systems by name.
    pub fn preset(name: &str) -> Result<Self> {
        let preset = Preset::from_str(name)?;
        Ok(preset.system())
    }

    /// Parses the plain-text format: one map per line with the fields
    /// `ratio rotation_degrees reflect tx ty` separated by whitespace or commas.
    /// `#` starts a comment; `reflect` is `0`/`1` or `true`/`false`.
    pub fn parse_config(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut maps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let err = |msg: &str| Error::InvalidIfs(format!("line {}: {msg}", lineno + 1));
            if fields.len() != 5 {
                return Err(err("expected 5 fields: ratio rotation_degrees reflect tx ty"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let reflect = match fields[2] {
                "0" | "false" | "no" => false,
                "1" | "true" | "yes" => true,
                _ => return Err(err("reflect flag must be 0/1")),
            };
            let map = Similarity::new(
                num(fields[0])?,
                num(fields[1])?.to_radians(),
                reflect,
                [num(fields[3])?, num(fields[4])?],
            )
            .map_err(|e| err(&e.to_string()))?;
            maps.push(map);
        }
        IfsSystem::new(name, maps)
    }

    /// Inverse of [`parse_config`](Self::parse_config).
    pub fn to_config(&self) -> String {
        let mut out = format!("# {}\n# ratio rotation_degrees reflect tx ty\n", self.name);
        for m in &self.maps {
            out.push_str(&format!(
                "{:?} {:?} {} {:?} {:?}\n",
                m.ratio,
                m.rotation.to_degrees(),
                u8::from(m.reflection),
                m.translation[0],
                m.translation[1]
            ));
        }
        out
    }
}

/// Solves `Σ r_i^s = 1` by bisection on `[0, 64]`.
pub fn similarity_dimension(sys: &IfsSystem) -> f64 {
    dimension_of_ratios(sys.maps.iter().map(|m| m.ratio))
}

fn dimension_of_ratios(ratios: impl Iterator<Item = f64> + Clone) -> f64 {
    let f = |s: f64| ratios.clone().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 64.0f64);
    if f(lo) <= 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() < 1e-15 {
            return mid;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Ratio `r` that makes `Σ fixed^s + count·r^s = 1` for a target dimension.
fn completing_ratio(fixed: &[f64], count: usize, s: f64) -> f64 {
    let rest = 1.0 - fixed.iter().map(|r| r.powf(s)).sum::<f64>();
    (rest / count as f64).powf(1.0 / s)
}

/// Lattice class of the log contraction ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithmeticityKind {
    /// All `-log r_i` lie on `hℤ`; `h` is the largest such spacing.
    Arithmetic { h: f64 },
    NonArithmetic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArithmeticityClass {
    pub kind: ArithmeticityKind,
    pub tolerance: f64,
}

impl ArithmeticityClass {
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            ArithmeticityKind::Arithmetic { h } => Some(h),
            ArithmeticityKind::NonArithmetic => None,
        }
    }
}

/// Denominator bound for the rational reconstruction of log-ratio quotients.
pub const MAX_DENOMINATOR: u64 = 1_000_000;
pub const DEFAULT_ARITHMETICITY_TOL: f64 = 1e-9;

/// Classifies the system as `h`-arithmetic or non-arithmetic.
///
/// Each quotient `a_i / a_0` of the values `a_i = -log r_i` is expanded as a
/// continued fraction; a convergent `p/q` (with `q` at most
/// [`MAX_DENOMINATOR`]) is accepted when the integer relation residual
/// `|q·a_i − p·a_0|` is within `tol`.
pub fn classify_arithmeticity(sys: &IfsSystem, tol: f64) -> ArithmeticityClass {
    let logs: Vec<f64> = sys.maps.iter().map(|m| -m.ratio.ln()).collect();
    let a0 = logs[0];
    // a_i = (p_i / q_i) a0 for every i
    let mut fracs = Vec::with_capacity(logs.len());
    for &a in &logs {
        match rational_relation(a, a0, tol) {
            Some(pq) => fracs.push(pq),
            None => {
                return ArithmeticityClass {
                    kind: ArithmeticityKind::NonArithmetic,
                    tolerance: tol,
                }
            }
        }
    }
    // with L = lcm(q_i): a_i = n_i · (a0 / L), n_i = p_i L / q_i; then the
    // largest lattice spacing is g·a0/L with g = gcd(n_i)
    let l = fracs.iter().fold(1u64, |acc, &(_, q)| lcm(acc, q));
    let g = fracs
        .iter()
        .fold(0u64, |acc, &(p, q)| gcd(acc, p * (l / q)));
    let h = a0 * g as f64 / l as f64;
    ArithmeticityClass {
        kind: ArithmeticityKind::Arithmetic { h },
        tolerance: tol,
    }
}

fn rational_relation(a: f64, a0: f64, tol: f64) -> Option<(u64, u64)> {
    let x = a / a0;
    // convergents of the continued fraction of x
    let (mut p_prev, mut q_prev, mut p, mut q) = (1u64, 0u64, x.floor() as u64, 1u64);
    let mut frac = x - x.floor();
    loop {
        if ((q as f64) * a - (p as f64) * a0).abs() <= tol {
            return Some((p, q));
        }
        if frac < 1e-15 {
            return None;
        }
        let inv = 1.0 / frac;
        let digit = inv.floor();
        frac = inv - digit;
        let digit = digit as u64;
        let (pn, qn) = (
            digit.checked_mul(p)?.checked_add(p_prev)?,
            digit.checked_mul(q)?.checked_add(q_prev)?,
        );
        if qn > MAX_DENOMINATOR {
            return None;
        }
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Built-in fractals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Gasket,
    Carpet,
    ModifiedCarpet,
    Triangle,
    Cross,
    Supergasket,
    FullSquare,
}

impl Preset {
    /// The six sample fractals, in table order.
    pub const SAMPLES: [Preset; 6] = [
        Preset::Gasket,
        Preset::Carpet,
        Preset::ModifiedCarpet,
        Preset::Triangle,
        Preset::Cross,
        Preset::Supergasket,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Gasket => "gasket",
            Preset::Carpet => "carpet",
            Preset::ModifiedCarpet => "modcarpet",
            Preset::Triangle => "triangle",
            Preset::Cross => "cross",
            Preset::Supergasket => "supergasket",
            Preset::FullSquare => "fullsquare",
        }
    }

    pub fn system(self) -> IfsSystem {
        let maps = match self {
            Preset::Gasket => {
                // equilateral triangle, centred vertically in the unit square
                let yb = 0.5 + 3f64.sqrt() / 4.0;
                let verts = [[0.0, yb], [1.0, yb], [0.5, yb - 3f64.sqrt() / 2.0]];
                verts
                    .iter()
                    .map(|v| Similarity::scaled(0.5, [v[0] / 2.0, v[1] / 2.0]))
                    .collect()
            }
            Preset::Carpet | Preset::ModifiedCarpet => {
                let removed = if self == Preset::Carpet { (1, 1) } else { (1, 0) };
                let mut maps = Vec::new();
                for j in 0..3 {
                    for i in 0..3 {
                        if (i, j) != removed {
                            maps.push(Similarity::scaled(
                                1.0 / 3.0,
                                [i as f64 / 3.0, j as f64 / 3.0],
                            ));
                        }
                    }
                }
                maps
            }
            Preset::Triangle => {
                // right triangle with corners (0,1), (1,1), (0,0); two half-size
                // corner copies, a third-size copy at the top corner and a
                // point-reflected copy inside the central hole
                let s = 1.588;
                let q = completing_ratio(&[0.5, 0.5, 1.0 / 3.0], 1, s);
                vec![
                    Similarity::scaled(0.5, [0.0, 0.5]),
                    Similarity::scaled(0.5, [0.5, 0.5]),
                    Similarity::scaled(1.0 / 3.0, [0.0, 0.0]),
                    Similarity::new(q, PI, false, [0.5, 1.0]).expect("valid"),
                ]
            }
            Preset::Cross => {
                // plus sign of five third-size squares with four small corner copies
                let s = 1.794;
                let third = 1.0 / 3.0;
                let c = completing_ratio(&[third; 5], 4, s);
                let mut maps: Vec<Similarity> = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)]
                    .iter()
                    .map(|&(i, j)| Similarity::scaled(third, [i as f64 * third, j as f64 * third]))
                    .collect();
                for t in [[0.0, 0.0], [1.0 - c, 0.0], [0.0, 1.0 - c], [1.0 - c, 1.0 - c]] {
                    maps.push(Similarity::scaled(c, t));
                }
                maps
            }
            Preset::Supergasket => {
                // equilateral gasket plus an inverted copy in the central hole
                let s = 8f64.ln() / 3f64.ln();
                let q = completing_ratio(&[0.5, 0.5, 0.5], 1, s);
                let yb = 0.5 + 3f64.sqrt() / 4.0;
                let verts = [[0.0, yb], [1.0, yb], [0.5, yb - 3f64.sqrt() / 2.0]];
                let g = [
                    (verts[0][0] + verts[1][0] + verts[2][0]) / 3.0,
                    (verts[0][1] + verts[1][1] + verts[2][1]) / 3.0,
                ];
                let mut maps: Vec<Similarity> = verts
                    .iter()
                    .map(|v| Similarity::scaled(0.5, [v[0] / 2.0, v[1] / 2.0]))
                    .collect();
                // p ↦ g − q (p − g)
                maps.push(
                    Similarity::new(q, PI, false, [(1.0 + q) * g[0], (1.0 + q) * g[1]])
                        .expect("valid"),
                );
                maps
            }
            Preset::FullSquare => [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]]
                .iter()
                .map(|&t| Similarity::scaled(0.5, t))
                .collect(),
        };
        IfsSystem::new(self.name(), maps).expect("presets are valid")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gasket" | "sierpinski-gasket" => Preset::Gasket,
            "carpet" | "sierpinski-carpet" => Preset::Carpet,
            "modcarpet" | "modified-carpet" => Preset::ModifiedCarpet,
            "triangle" => Preset::Triangle,
            "cross" => Preset::Cross,
            "supergasket" => Preset::Supergasket,
            "fullsquare" | "square" => Preset::FullSquare,
            _ => return Err(Error::UnknownPreset(s.to_string())),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// When to stop subdividing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepthPolicy {
    /// Until every copy of the unit square has diameter below one pixel.
    Auto,
    Fixed(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct RasterOptions {
    /// Canvas side in pixels.
    pub side: usize,
    /// White border in pixels; the unit square maps onto the remaining
    /// `side - 2·margin` pixels.
    pub margin: usize,
    pub depth: DepthPolicy,
    /// Maximum number of leaf copies.
    pub node_budget: u64,
}

impl RasterOptions {
    pub fn new(side: usize) -> Self {
        RasterOptions {
            side,
            margin: 0,
            depth: DepthPolicy::Auto,
            node_budget: 1 << 32,
        }
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_depth(mut self, depth: DepthPolicy) -> Self {
        self.depth = depth;
        self
    }
}

/// Copies are shrunk by this much (in pixels) before marking, so that an edge
/// lying exactly on a pixel boundary does not mark the neighbouring pixel.
const TIE_SHRINK: f64 = 1e-9;

/// Rasterizes the attractor by deterministic subdivision of the unit square.
///
/// Copies `S_{i1}∘…∘S_{ik}([0,1]²)` are refined depth first until the stopping
/// rule holds; every pixel meeting a final copy is set.
pub fn rasterize(sys: &IfsSystem, opts: &RasterOptions) -> Result<BinaryImage> {
    if opts.side < 16 {
        return Err(Error::InvalidArgument(format!(
            "canvas side {} below the minimum of 16",
            opts.side
        )));
    }
    if 2 * opts.margin >= opts.side {
        return Err(Error::InvalidArgument("margin leaves no drawing area".into()));
    }
    let extent = (opts.side - 2 * opts.margin) as f64;
    let n = sys.maps.len() as u128;
    let budget = u128::from(opts.node_budget);
    if let DepthPolicy::Fixed(d) = opts.depth {
        let leaves = n.checked_pow(d).unwrap_or(u128::MAX);
        if leaves > budget {
            return Err(Error::NodeBudget {
                nodes: leaves,
                budget,
            });
        }
    } else {
        let rmax = sys.maps.iter().map(|m| m.ratio).fold(0.0, f64::max);
        let depth = auto_depth(rmax, extent);
        let leaves = n.checked_pow(depth).unwrap_or(u128::MAX);
        if leaves > budget {
            return Err(Error::NodeBudget {
                nodes: leaves,
                budget,
            });
        }
    }

    let to_canvas = Affine {
        m: [[extent, 0.0], [0.0, extent]],
        t: [opts.margin as f64, opts.margin as f64],
    };
    let affines: Vec<Affine> = sys.maps.iter().map(Similarity::affine).collect();
    let side = opts.side;

    let partial: Vec<Vec<u8>> = affines
        .par_iter()
        .map(|a| {
            let mut bits = vec![0u8; side * side];
            let mut walker = Walker {
                affines: &affines,
                depth: opts.depth,
                extent,
                side,
                bits: &mut bits,
                to_canvas,
            };
            walker.visit(&Affine::IDENTITY.compose(a), 1, affine_scale(a));
            bits
        })
        .collect();
    let mut bits = vec![0u8; side * side];
    for p in partial {
        for (b, v) in bits.iter_mut().zip(p) {
            *b |= v;
        }
    }
    BinaryImage::from_bits(side, side, bits)
}

fn affine_scale(a: &Affine) -> f64 {
    (a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0]).abs().sqrt()
}

fn auto_depth(rmax: f64, extent: f64) -> u32 {
    let mut d = 0;
    let mut diam = extent * 2f64.sqrt();
    while diam >= 1.0 {
        diam *= rmax;
        d += 1;
    }
    d
}

struct Walker<'a> {
    affines: &'a [Affine],
    depth: DepthPolicy,
    extent: f64,
    side: usize,
    bits: &'a mut [u8],
    to_canvas: Affine,
}

impl Walker<'_> {
    fn visit(&mut self, map: &Affine, level: u32, scale: f64) {
        let leaf = match self.depth {
            DepthPolicy::Auto => scale * self.extent * 2f64.sqrt() < 1.0,
            DepthPolicy::Fixed(d) => level >= d,
        };
        if leaf {
            self.mark(map);
            return;
        }
        for a in self.affines {
            let child = map.compose(a);
            self.visit(&child, level + 1, scale * affine_scale(a));
        }
    }

    fn mark(&mut self, map: &Affine) {
        let m = self.to_canvas.compose(map);
        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]].map(|c| m.apply(c));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for c in corners {
            x0 = x0.min(c[0]);
            x1 = x1.max(c[0]);
            y0 = y0.min(c[1]);
            y1 = y1.max(c[1]);
        }
        let range = |lo: f64, hi: f64| -> Option<(usize, usize)> {
            let (a, b) = if hi - lo > 2.0 * TIE_SHRINK {
                ((lo + TIE_SHRINK).floor(), (hi - TIE_SHRINK).floor())
            } else {
                let c = (0.5 * (lo + hi)).floor();
                (c, c)
            };
            let max = (self.side - 1) as f64;
            if b < 0.0 || a > max {
                return None;
            }
            Some((a.max(0.0) as usize, b.min(max) as usize))
        };
        let (Some((xa, xb)), Some((ya, yb))) = (range(x0, x1), range(y0, y1)) else {
            return;
        };
        for y in ya..=yb {
            self.bits[y * self.side + xa..=y * self.side + xb].fill(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_of_presets() {
        let gasket = IfsSystem::preset("gasket").unwrap();
        assert!((similarity_dimension(&gasket) - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
        let carpet = IfsSystem::preset("carpet").unwrap();
        assert!((similarity_dimension(&carpet) - 8f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((similarity_dimension(&Preset::Triangle.system()) - 1.588).abs() < 1e-12);
        assert!((similarity_dimension(&Preset::Cross.system()) - 1.794).abs() < 1e-12);
        let sg = similarity_dimension(&Preset::Supergasket.system());
        assert!((sg - 8f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((similarity_dimension(&Preset::FullSquare.system()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_map_has_dimension_zero() {
        let sys = IfsSystem::new("one", vec![Similarity::scaled(0.3, [0.1, 0.2])]).unwrap();
        assert_eq!(similarity_dimension(&sys), 0.0);
    }

    #[test]
    fn adding_a_map_increases_dimension() {
        let mut maps = vec![Similarity::scaled(0.4, [0.0, 0.0])];
        let mut last = 0.0;
        for k in 0..6 {
            maps.push(Similarity::scaled(0.2 + 0.05 * k as f64, [0.1, 0.1]));
            let s = similarity_dimension(&IfsSystem::new("m", maps.clone()).unwrap());
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn arithmetic_classes() {
        let tol = DEFAULT_ARITHMETICITY_TOL;
        let gasket = classify_arithmeticity(&Preset::Gasket.system(), tol);
        assert!((gasket.period().unwrap() - 2f64.ln()).abs() < 1e-12);
        let carpet = classify_arithmeticity(&Preset::Carpet.system(), tol);
        assert!((carpet.period().unwrap() - 3f64.ln()).abs() < 1e-12);

        let e = IfsSystem::new("e", vec![Similarity::scaled(1.0 / std::f64::consts::E, [0.0; 2])])
            .unwrap();
        assert!((classify_arithmeticity(&e, tol).period().unwrap() - 1.0).abs() < 1e-12);

        let mixed = IfsSystem::new(
            "mixed",
            vec![
                Similarity::scaled(0.5, [0.0; 2]),
                Similarity::scaled(1.0 / 3.0, [0.5, 0.5]),
            ],
        )
        .unwrap();
        assert_eq!(
            classify_arithmeticity(&mixed, tol).kind,
            ArithmeticityKind::NonArithmetic
        );

        // ratios 1/2 and 1/8 share the lattice log 2
        let pow = IfsSystem::new(
            "pow",
            vec![
                Similarity::scaled(0.125, [0.0; 2]),
                Similarity::scaled(0.5, [0.5, 0.5]),
            ],
        )
        .unwrap();
        assert!((classify_arithmeticity(&pow, tol).period().unwrap() - 2f64.ln()).abs() < 1e-12);
        // 1/4 and 1/8: spacing log 2 again (gcd of 2 and 3)
        let pow2 = IfsSystem::new(
            "pow2",
            vec![
                Similarity::scaled(0.25, [0.0; 2]),
                Similarity::scaled(0.125, [0.5, 0.5]),
            ],
        )
        .unwrap();
        assert!((classify_arithmeticity(&pow2, tol).period().unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn non_arithmetic_presets() {
        for p in [Preset::Triangle, Preset::Cross, Preset::Supergasket] {
            let c = classify_arithmeticity(&p.system(), DEFAULT_ARITHMETICITY_TOL);
            assert_eq!(c.kind, ArithmeticityKind::NonArithmetic, "{p}");
        }
    }

    #[test]
    fn config_round_trip() {
        let sys = Preset::Supergasket.system();
        let back = IfsSystem::parse_config("supergasket", &sys.to_config()).unwrap();
        assert_eq!(back.maps().len(), sys.maps().len());
        for (a, b) in back.maps().iter().zip(sys.maps()) {
            assert!((a.ratio - b.ratio).abs() < 1e-15);
            assert!((a.rotation - b.rotation).abs() < 1e-12);
            assert_eq!(a.reflection, b.reflection);
        }
    }

    #[test]
    fn config_errors() {
        assert!(IfsSystem::parse_config("x", "0.5 0 0 0").is_err());
        assert!(IfsSystem::parse_config("x", "1.5 0 0 0 0").is_err());
        assert!(IfsSystem::parse_config("x", "0.5 0 maybe 0 0").is_err());
        assert!(IfsSystem::parse_config("x", "# nothing\n").is_err());
        let ok = IfsSystem::parse_config("x", "0.5, 90, 1, 0.25, 0 # comment\n").unwrap();
        assert!(ok.maps()[0].reflection);
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            IfsSystem::preset("koch"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn single_map_marks_corner_pixel() {
        let sys = IfsSystem::new("pt", vec![Similarity::scaled(0.5, [0.0, 0.0])]).unwrap();
        let img = rasterize(&sys, &RasterOptions::new(64)).unwrap();
        assert_eq!(img.count_black(), 1);
        assert!(img.get(0, 0));
    }

    #[test]
    fn full_square_is_all_black() {
        for side in [16, 100, 128, 129] {
            let img = rasterize(&Preset::FullSquare.system(), &RasterOptions::new(side)).unwrap();
            assert_eq!(img.count_black(), side * side, "side {side}");
        }
    }

    #[test]
    fn fixed_depth_budget() {
        let opts = RasterOptions {
            node_budget: 1000,
            ..RasterOptions::new(64).with_depth(DepthPolicy::Fixed(10))
        };
        assert!(matches!(
            rasterize(&Preset::Carpet.system(), &opts),
            Err(Error::NodeBudget { .. })
        ));
    }

    #[test]
    fn carpet_is_rotation_symmetric() {
        let img = rasterize(&Preset::Carpet.system(), &RasterOptions::new(243)).unwrap();
        assert_eq!(img.rotate90(), img);
        assert_eq!(img.flip_horizontal(), img);
        // level-5 carpet on 3^5 pixels: 8^5 black pixels
        assert_eq!(img.count_black(), 8usize.pow(5));
    }

    #[test]
    fn gasket_is_mirror_symmetric() {
        let img = rasterize(&Preset::Gasket.system(), &RasterOptions::new(256)).unwrap();
        assert_eq!(img.flip_horizontal(), img);
    }

    #[test]
    fn margin_leaves_white_border() {
        let img = rasterize(
            &Preset::FullSquare.system(),
            &RasterOptions::new(64).with_margin(4),
        )
        .unwrap();
        assert_eq!(img.count_black(), 56 * 56);
        assert!(!img.touches_border());
    }
}
