//! Exact Euclidean distance transform and threshold dilation.
//!
//! The transform is the two-pass separable algorithm of Meijster, Roerdink and
//! Hesselink: a column pass computing vertical distances, then a row pass taking
//! the lower envelope of parabolas. Everything is done on squared distances in
//! integer arithmetic, so the result is exact.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Squared Euclidean distance from every pixel centre to the nearest black
/// pixel centre, in pixel units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    sq: Vec<u32>,
}

impl DistanceMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn squared(&self, x: usize, y: usize) -> u32 {
        self.sq[y * self.width + x]
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        f64::from(self.squared(x, y)).sqrt()
    }

    /// Row-major squared distances.
    pub fn squared_distances(&self) -> &[u32] {
        &self.sq
    }

    pub fn max_squared(&self) -> u32 {
        self.sq.iter().copied().max().unwrap_or(0)
    }
}

pub fn distance_transform(img: &BinaryImage) -> Result<DistanceMap> {
    if img.is_blank() {
        return Err(Error::EmptyImage);
    }
    let (w, h) = (img.width(), img.height());
    // larger than any realisable distance on this canvas
    let inf = (w + h) as i64;

    // Pass 1: vertical distance to the nearest black pixel in the same column.
    // Columns are processed in strips so that each sweep walks rows contiguously.
    const STRIP: usize = 256;
    let mut g = vec![0i64; w * h];
    let strips: Vec<(usize, Vec<i64>)> = (0..w)
        .step_by(STRIP)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x0| {
            let sw = STRIP.min(w - x0);
            let mut col = vec![0i64; sw * h];
            for (x, c) in col[..sw].iter_mut().enumerate() {
                *c = if img.get(x0 + x, 0) { 0 } else { inf };
            }
            for y in 1..h {
                let row = &img.row(y)[x0..x0 + sw];
                for x in 0..sw {
                    col[y * sw + x] = if row[x] != 0 {
                        0
                    } else {
                        col[(y - 1) * sw + x] + 1
                    };
                }
            }
            for y in (0..h - 1).rev() {
                for x in 0..sw {
                    let below = col[(y + 1) * sw + x];
                    if below < col[y * sw + x] {
                        col[y * sw + x] = below + 1;
                    }
                }
            }
            (x0, col)
        })
        .collect();
    for (x0, col) in strips {
        let sw = STRIP.min(w - x0);
        for y in 0..h {
            g[y * w + x0..y * w + x0 + sw].copy_from_slice(&col[y * sw..(y + 1) * sw]);
        }
    }

    // Pass 2: lower envelope of parabolas along each row.
    let mut sq = vec![0u32; w * h];
    sq.par_chunks_mut(w)
        .zip(g.par_chunks(w))
        .for_each_init(
            || (vec![0usize; w], vec![0i64; w]),
            |(s, t), (out, gr)| envelope_row(gr, out, s, t),
        );
    Ok(DistanceMap {
        width: w,
        height: h,
        sq,
    })
}

fn envelope_row(g: &[i64], out: &mut [u32], s: &mut [usize], t: &mut [i64]) {
    let m = g.len();
    let f = |x: i64, i: usize| (x - i as i64).pow(2) + g[i] * g[i];
    let sep = |i: usize, u: usize| {
        let (ii, uu) = (i as i64, u as i64);
        (uu * uu - ii * ii + g[u] * g[u] - g[i] * g[i]).div_euclid(2 * (uu - ii))
    };
    let mut q: isize = 0;
    s[0] = 0;
    t[0] = 0;
    for u in 1..m {
        while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
            q -= 1;
        }
        if q < 0 {
            q = 0;
            s[0] = u;
        } else {
            let wpos = 1 + sep(s[q as usize], u);
            if wpos < m as i64 {
                q += 1;
                s[q as usize] = u;
                t[q as usize] = wpos;
            }
        }
    }
    for u in (0..m).rev() {
        out[u] = f(u as i64, s[q as usize]) as u32;
        if u as i64 == t[q as usize] {
            q -= 1;
        }
    }
}

/// The discrete parallel set: pixels whose distance to the source set is at
/// most `eps`.
pub fn dilate(dmap: &DistanceMap, eps: f64) -> BinaryImage {
    let threshold = squared_threshold(eps);
    let bits = dmap
        .sq
        .par_iter()
        .map(|&d| u8::from(d <= threshold))
        .collect();
    BinaryImage::from_bits(dmap.width, dmap.height, bits).expect("dimensions match")
}

/// Largest integer squared distance `d` with `d <= eps²`.
pub(crate) fn squared_threshold(eps: f64) -> u32 {
    if eps.is_nan() || eps < 0.0 {
        return 0;
    }
    let e2 = eps * eps;
    if e2 >= f64::from(u32::MAX) {
        return u32::MAX;
    }
    let mut d = e2.floor() as u32;
    // guard against eps*eps landing one ulp below an integer it should reach
    while f64::from(d + 1) <= e2 {
        d += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_corner_distances() {
        let mut img = BinaryImage::new(4, 4);
        img.set(0, 0, true);
        let d = distance_transform(&img).unwrap();
        assert_eq!(d.squared(3, 3), 18);
        assert_eq!(d.dist(3, 3), 18f64.sqrt());
        assert_eq!(d.squared(3, 0), 9);
    }

    #[test]
    fn all_black_has_zero_distance() {
        let img = BinaryImage::filled(7, 5);
        let d = distance_transform(&img).unwrap();
        assert!(d.squared_distances().iter().all(|&v| v == 0));
    }

    #[test]
    fn blank_image_is_an_error() {
        assert!(matches!(
            distance_transform(&BinaryImage::new(3, 3)),
            Err(Error::EmptyImage)
        ));
    }

    #[test]
    fn zero_radius_dilation_is_identity() {
        let img = BinaryImage::from_rows(&["0100", "0000", "0011"]).unwrap();
        let d = distance_transform(&img).unwrap();
        assert_eq!(dilate(&d, 0.0), img);
    }

    #[test]
    fn single_point_disk_area() {
        let mut img = BinaryImage::new(121, 121);
        img.set(60, 60, true);
        let d = distance_transform(&img).unwrap();
        // lattice points with x² + y² <= 2500
        assert_eq!(dilate(&d, 50.0).count_black(), 7845);
    }

    #[test]
    fn radius_past_diagonal_fills_canvas() {
        let img = BinaryImage::from_rows(&["1000", "0000", "0000"]).unwrap();
        let d = distance_transform(&img).unwrap();
        assert_eq!(dilate(&d, 100.0).count_black(), 12);
    }

    #[test]
    fn threshold_is_exact_at_integer_squares() {
        assert_eq!(squared_threshold(5.0), 25);
        assert_eq!(squared_threshold(2f64.sqrt()), 2);
        assert_eq!(squared_threshold(0.999), 0);
        assert_eq!(squared_threshold(-1.0), 0);
    }
}
