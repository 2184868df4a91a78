//! Box-counting dimension.

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Number of `delta`×`delta` grid boxes (anchored at the origin, partial boxes
/// at the right and bottom edges included) containing a black pixel.
pub fn box_count(img: &BinaryImage, delta: usize) -> usize {
    assert!(delta > 0, "box size must be positive");
    let bw = img.width().div_ceil(delta);
    let bh = img.height().div_ceil(delta);
    let mut hit = vec![false; bw * bh];
    for y in 0..img.height() {
        let by = y / delta;
        for (x, &v) in img.row(y).iter().enumerate() {
            if v != 0 {
                hit[by * bw + x / delta] = true;
            }
        }
    }
    hit.iter().filter(|&&h| h).count()
}

/// Slope of `log N_δ` against `−log δ` by ordinary least squares.
pub fn box_count_dimension(img: &BinaryImage, deltas: &[usize]) -> Result<f64> {
    if img.is_blank() {
        return Err(Error::EmptyImage);
    }
    let mut ds = deltas.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 3 || ds[0] == 0 {
        return Err(Error::InvalidArgument(
            "box counting needs at least three distinct positive box sizes".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = ds
        .iter()
        .map(|&d| (-(d as f64).ln(), (box_count(img, d) as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Powers of two from 2 up to half the shorter image side.
pub fn default_box_sizes(img: &BinaryImage) -> Vec<usize> {
    let limit = img.width().min(img.height()) / 2;
    std::iter::successors(Some(2usize), |d| Some(d * 2))
        .take_while(|&d| d <= limit.min(128))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_square_has_dimension_two() {
        let img = BinaryImage::filled(256, 256);
        let s = box_count_dimension(&img, &[1, 2, 4, 8, 16]).unwrap();
        assert!((s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_pixel_has_dimension_zero() {
        let mut img = BinaryImage::new(64, 64);
        img.set(5, 9, true);
        assert_eq!(box_count_dimension(&img, &[1, 2, 4, 8]).unwrap(), 0.0);
    }

    #[test]
    fn partial_boxes_count() {
        let img = BinaryImage::filled(5, 5);
        assert_eq!(box_count(&img, 2), 9);
    }

    #[test]
    fn errors() {
        assert!(box_count_dimension(&BinaryImage::new(8, 8), &[1, 2, 4]).is_err());
        assert!(box_count_dimension(&BinaryImage::filled(8, 8), &[1, 2]).is_err());
    }
}
