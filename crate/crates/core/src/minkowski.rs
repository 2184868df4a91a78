//! Intrinsic volumes of binary images from 2×2 configuration counts.
//!
//! A binary image is read as the union of the closed unit squares of its black
//! pixels. Under that convention pixels touching at a corner are connected and
//! white pixels are connected only through shared edges.
//!
//! Every vertex of the pixel lattice (including the ring just outside the
//! canvas) sees a 2×2 window of pixels. The 16 window patterns carry enough
//! local information for all three functionals:
//!
//! * area `C2` – the number of black pixels,
//! * Euler characteristic `C0` – `V - E + F` of the cell complex,
//! * half boundary length `C1` – a Cauchy–Crofton estimate from intercept
//!   counts along the directions 0°, 45°, 90° and 135°.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;

use crate::image::BinaryImage;

/// Bit of the top-left pixel in a window pattern.
pub const TL: usize = 1;
pub const TR: usize = 2;
pub const BL: usize = 4;
pub const BR: usize = 8;

/// Steiner normalisation constants, the volumes of the unit balls in
/// dimensions 0, 1 and 2.
pub const KAPPA: [f64; 3] = [1.0, 2.0, PI];

/// Counts of the 16 possible 2×2 window patterns of an image padded with one
/// ring of white pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigHistogram {
    pub counts: [u64; 16],
}

impl ConfigHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn weighted_int(&self, table: &[i64; 16]) -> i64 {
        self.counts
            .iter()
            .zip(table)
            .map(|(&c, &w)| c as i64 * w)
            .sum()
    }
}

/// Area, half boundary length and Euler characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntrinsicVolumes {
    pub c0: i64,
    pub c1: f64,
    pub c2: f64,
}

impl IntrinsicVolumes {
    /// `C_k` as a real number.
    pub fn get(&self, k: usize) -> f64 {
        match k {
            0 => self.c0 as f64,
            1 => self.c1,
            2 => self.c2,
            _ => panic!("intrinsic volume index {k} out of range for the plane"),
        }
    }
}

pub fn config_histogram(img: &BinaryImage) -> ConfigHistogram {
    let (w, h) = (img.width() as isize, img.height() as isize);
    // window rows are indexed by the lattice vertex row j in 0..=h; the window
    // covers pixel rows j-1 and j
    const BAND: isize = 64;
    let bands: Vec<isize> = (0..=h).step_by(BAND as usize).collect();
    let counts = bands
        .into_par_iter()
        .map(|j0| {
            let mut counts = [0u64; 16];
            for j in j0..(j0 + BAND).min(h + 1) {
                let mut left = 0usize; // bits of the column i-1 (tl, bl)
                for i in 0..=w {
                    let top = img.get_padded(i, j - 1);
                    let bot = img.get_padded(i, j);
                    let right = (top as usize) * TR + (bot as usize) * BR;
                    counts[left | right] += 1;
                    left = (top as usize) * TL + (bot as usize) * BL;
                }
            }
            counts
        })
        .reduce(
            || [0u64; 16],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    ConfigHistogram { counts }
}

const fn bit(p: usize, b: usize) -> i64 {
    (p & b != 0) as i64
}

const fn build_tables() -> ([i64; 16], [i64; 16], [i64; 16], [i64; 16]) {
    // Each window owns its vertex, the edges to the right of and below the
    // vertex, and the pixel below-right of it. This assigns every vertex,
    // edge and square of the padded lattice to exactly one window.
    let mut euler = [0i64; 16];
    let mut axis = [0i64; 16];
    let mut diag = [0i64; 16];
    let mut area = [0i64; 16];
    let mut p = 0;
    while p < 16 {
        let (tl, tr, bl, br) = (bit(p, TL), bit(p, TR), bit(p, BL), bit(p, BR));
        let v = (p != 0) as i64;
        let e = (tr | br) + (bl | br);
        let f = br;
        euler[p] = v - e + f;
        // intercepts: the top pixel pair (0°) and the left pixel pair (90°) of
        // every pixel pair in the padded image occur in exactly one window
        axis[p] = (tl ^ tr) + (tl ^ bl);
        diag[p] = (bl ^ tr) + (tl ^ br);
        area[p] = br;
        p += 1;
    }
    (euler, axis, diag, area)
}

const TABLES: ([i64; 16], [i64; 16], [i64; 16], [i64; 16]) = build_tables();

impl ConfigHistogram {
    pub fn euler(&self) -> i64 {
        self.weighted_int(&TABLES.0)
    }

    pub fn area(&self) -> i64 {
        self.weighted_int(&TABLES.3)
    }

    /// Number of black/white transitions between horizontally or vertically
    /// adjacent pixels, i.e. the intercept crossings along 0° and 90°.
    pub fn axis_crossings(&self) -> i64 {
        self.weighted_int(&TABLES.1)
    }

    pub fn diagonal_crossings(&self) -> i64 {
        self.weighted_int(&TABLES.2)
    }

    /// Cauchy–Crofton boundary length estimate.
    ///
    /// With `N(θ)` the number of boundary crossings of the lattice lines in
    /// direction `θ` times the line spacing (1 for the axes, 1/√2 for the
    /// diagonals), the length is `(1/2) Σ_θ (π/4) N(θ)`.
    pub fn crofton_perimeter(&self) -> f64 {
        let axis = self.axis_crossings() as f64;
        let diag = self.diagonal_crossings() as f64 * FRAC_1_SQRT_2;
        PI / 8.0 * (axis + diag)
    }

    pub fn volumes(&self) -> IntrinsicVolumes {
        IntrinsicVolumes {
            c0: self.euler(),
            c1: 0.5 * self.crofton_perimeter(),
            c2: self.area() as f64,
        }
    }
}

pub fn intrinsic_volumes(img: &BinaryImage) -> IntrinsicVolumes {
    config_histogram(img).volumes()
}

/// Euler characteristic by flood fill: 8-connected black components minus
/// bounded 4-connected white components.
pub fn euler_exact(img: &BinaryImage) -> i64 {
    let (w, h) = (img.width() + 2, img.height() + 2);
    // padded copy so that the outside is one white component
    let mut black = vec![false; w * h];
    for y in 0..img.height() {
        for x in 0..img.width() {
            black[(y + 1) * w + x + 1] = img.get(x, y);
        }
    }
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut components = 0i64;
    let mut white_components = 0i64;
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        let colour = black[start];
        if colour {
            components += 1;
        } else {
            white_components += 1;
        }
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if (dx == 0 && dy == 0) || (!colour && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if !seen[q] && black[q] == colour {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
    }
    // the white component touching the padding ring is not a hole
    components - (white_components - 1)
}

/// Number of unit edges separating a black pixel from a white pixel or from
/// the outside. Exact perimeter of the square union, biased for smooth sets.
pub fn perimeter_edgecount(img: &BinaryImage) -> i64 {
    let mut n = 0i64;
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            if img.get_padded(x, y) {
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    if !img.get_padded(x + dx, y + dy) {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_image_histogram() {
        let h = config_histogram(&BinaryImage::new(2, 2));
        let mut expect = [0u64; 16];
        expect[0] = 9;
        assert_eq!(h.counts, expect);
    }

    #[test]
    fn single_pixel_histogram() {
        let h = config_histogram(&BinaryImage::filled(1, 1));
        for p in [TL, TR, BL, BR] {
            assert_eq!(h.counts[p], 1);
        }
        assert_eq!(h.counts[0], 0);
        assert_eq!(h.total(), 4);

        let mut img = BinaryImage::new(3, 3);
        img.set(1, 1, true);
        let h = config_histogram(&img);
        for p in [TL, TR, BL, BR] {
            assert_eq!(h.counts[p], 1);
        }
        assert_eq!(h.counts[0], 12);
    }

    #[test]
    fn empty_image_volumes() {
        let v = intrinsic_volumes(&BinaryImage::new(5, 4));
        assert_eq!(v, IntrinsicVolumes { c0: 0, c1: 0.0, c2: 0.0 });
    }

    #[test]
    fn single_pixel_volumes() {
        let img = BinaryImage::filled(1, 1);
        let v = intrinsic_volumes(&img);
        assert_eq!(v.c0, 1);
        assert_eq!(v.c2, 1.0);
        assert_eq!(perimeter_edgecount(&img), 4);
    }

    #[test]
    fn ring_has_zero_euler_characteristic() {
        let img = BinaryImage::from_rows(&["111", "101", "111"]).unwrap();
        let v = intrinsic_volumes(&img);
        assert_eq!(v.c0, 0);
        assert_eq!(v.c2, 8.0);
        assert_eq!(euler_exact(&img), 0);
    }

    #[test]
    fn diagonal_pixels_touch_at_a_corner() {
        let img = BinaryImage::from_rows(&["10", "01"]).unwrap();
        assert_eq!(euler_exact(&img), 1);
        assert_eq!(intrinsic_volumes(&img).c0, 1);
    }

    #[test]
    fn diagonal_ring_closes_a_hole() {
        // a diamond of four pixels around a white centre
        let img = BinaryImage::from_rows(&["010", "101", "010"]).unwrap();
        assert_eq!(euler_exact(&img), 0);
        assert_eq!(intrinsic_volumes(&img).c0, 0);
    }

    #[test]
    fn block_perimeter_by_edge_count() {
        assert_eq!(perimeter_edgecount(&BinaryImage::filled(2, 2)), 8);
    }

    #[test]
    fn rectangle_crofton_closed_form() {
        // horizontal/vertical crossings 2(w+h), diagonal 4(w+h-1)
        let (w, h) = (13usize, 7usize);
        let v = intrinsic_volumes(&BinaryImage::filled(w, h));
        let expected =
            0.5 * PI / 8.0 * (2.0 * (w + h) as f64 + 4.0 * (w + h - 1) as f64 * FRAC_1_SQRT_2);
        assert!((v.c1 - expected).abs() < 1e-12);
        assert_eq!(v.c0, 1);
        assert_eq!(v.c2, (w * h) as f64);
    }
}
