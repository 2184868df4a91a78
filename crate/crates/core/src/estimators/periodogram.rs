//! Periodogram of detrended regression residuals and period estimation.
//!
//! Frequencies `t` are in radians per sample. On an evenly spaced schedule with
//! step `a` a frequency `t` corresponds to the period `h₀ = 2πa/t` in `x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimators::nre::{even_step, median};
use crate::series::RegressionData;

pub const DEFAULT_PAD: usize = 10;
pub const MIN_PERIODOGRAM_LEN: usize = 8;
/// Peak-to-median periodogram ratio separating a real period from noise.
/// White noise of length 176 reaches ratios of 15 within a few seeds.
pub const DEFAULT_SIGNIFICANCE: f64 = 20.0;
/// A multiple of the harmonic-sum argmax replaces it if it keeps this share
/// of the harmonic sum.
pub const OCTAVE_SHARE: f64 = 0.8;
pub const FREQ_GRID: usize = 4096;
pub const MAX_M: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub pad_factor: usize,
    /// Centred, and for several series variance-normalised, inputs.
    series: Vec<Vec<f64>>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.series[0].is_empty()
    }

    /// `I_n(t)` at an arbitrary frequency.
    pub fn eval(&self, t: f64) -> f64 {
        self.series.iter().map(|y| power_at(y, t)).sum()
    }

    /// Power on the unpadded Fourier grid `2πi/n`, `i = 1..=n/2`.
    pub fn fourier_grid(&self) -> Vec<(f64, f64)> {
        let n = self.len();
        (1..=n / 2)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}

fn power_at(y: &[f64], t: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (j, v) in y.iter().enumerate() {
        let a = j as f64 * t;
        re += v * a.cos();
        im -= v * a.sin();
    }
    (re * re + im * im) / (2.0 * PI * y.len() as f64)
}

/// Periodogram of one or more residual series of equal length.
pub fn periodogram(residuals: &[Vec<f64>], pad_factor: usize) -> Result<Periodogram> {
    let n = residuals.first().map_or(0, Vec::len);
    if n < MIN_PERIODOGRAM_LEN {
        return Err(Error::SeriesTooShort {
            len: n,
            min: MIN_PERIODOGRAM_LEN,
        });
    }
    if residuals.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("residual series differ in length".into()));
    }
    let pad = pad_factor.max(1);
    let normalise = residuals.len() > 1;
    let series: Vec<Vec<f64>> = residuals
        .iter()
        .map(|r| {
            let mean = r.iter().sum::<f64>() / n as f64;
            let mut c: Vec<f64> = r.iter().map(|v| v - mean).collect();
            let sd = (c.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            if normalise && sd > 0.0 {
                c.iter_mut().for_each(|v| *v /= sd);
            }
            c
        })
        .collect();
    let total = pad * n;
    let freqs: Vec<f64> = (1..=total / 2)
        .map(|i| 2.0 * PI * i as f64 / total as f64)
        .collect();
    let mut p = Periodogram {
        freqs,
        power: Vec::new(),
        pad_factor: pad,
        series,
    };
    p.power = p.freqs.iter().map(|&t| p.eval(t)).collect();
    Ok(p)
}

/// Residuals of per-index straight-line fits; requires complete series.
pub fn detrend(data: &RegressionData) -> Result<Vec<Vec<f64>>> {
    let rows = data.dense_rows().ok_or_else(|| {
        Error::InvalidArgument("periodogram needs series without dropped samples".into())
    })?;
    let n = data.x.len() as f64;
    let xm = data.x.iter().sum::<f64>() / n;
    let sxx: f64 = data.x.iter().map(|x| (x - xm).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateDesign("all x values are equal".into()));
    }
    Ok(rows
        .into_iter()
        .map(|y| {
            let ym = y.iter().sum::<f64>() / n;
            let slope = data.x.iter().zip(&y).map(|(x, v)| (x - xm) * v).sum::<f64>() / sxx;
            data.x
                .iter()
                .zip(&y)
                .map(|(x, v)| v - ym - slope * (x - xm))
                .collect()
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodEstimate {
    pub h0: f64,
    /// Fundamental frequency in radians per sample.
    pub t: f64,
    /// Peak-to-median ratio of the periodogram over the candidate band.
    pub ratio: f64,
}

/// `Σ_{j=1..m, jt ≤ π} I(jt)`.
fn harmonic_sum(p: &Periodogram, t: f64, m: usize) -> f64 {
    (1..=m)
        .map(|j| j as f64 * t)
        .take_while(|&u| u <= PI)
        .map(|u| p.eval(u))
        .sum()
}

/// Estimates the period `h₀` maximising the harmonic sum of the periodogram.
///
/// Candidates are periods in `[3a, (n−1)a/2]` where `a` is the schedule step.
/// Fails with [`Error::NoSignificantPeriod`] when the periodogram peak over
/// that band is less than `threshold` times its median. A subharmonic of the
/// true frequency collects the same harmonics, so the argmax is replaced by
/// its highest multiple `kt` (`k ≤ m`) that retains [`OCTAVE_SHARE`] of the
/// harmonic sum.
pub fn estimate_period(p: &Periodogram, m: usize, step: f64, threshold: f64) -> Result<PeriodEstimate> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("schedule step must be positive".into()));
    }
    let n = p.len();
    let t_lo = 2.0 * PI / ((n - 1) as f64 / 2.0);
    let t_hi = 2.0 * PI / 3.0;
    if t_lo >= t_hi {
        return Err(Error::SeriesTooShort { len: n, min: 13 });
    }
    let dt = (t_hi - t_lo) / (FREQ_GRID - 1) as f64;
    let grid: Vec<f64> = (0..FREQ_GRID).map(|i| t_lo + dt * i as f64).collect();

    let plain: Vec<f64> = grid.iter().map(|&t| p.eval(t)).collect();
    let pmax = plain.iter().copied().fold(0.0, f64::max);
    let med = median(&mut plain.clone());
    let ratio = if med > 0.0 {
        pmax / med
    } else if pmax > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if !(ratio >= threshold) {
        return Err(Error::NoSignificantPeriod { ratio, threshold });
    }

    let sum = |t: f64| harmonic_sum(p, t, m);
    let vals: Vec<f64> = grid.iter().map(|&t| sum(t)).collect();
    let imax = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let refine = |t: f64| golden_max(sum, (t - dt).max(t_lo), (t + dt).min(t_hi));
    let mut t = refine(grid[imax]);
    let best = sum(t);
    for k in (2..=m).rev() {
        let tk = k as f64 * t;
        if tk > t_hi {
            continue;
        }
        let tk = refine(tk);
        if sum(tk) >= OCTAVE_SHARE * best {
            t = tk;
            break;
        }
    }
    Ok(PeriodEstimate {
        h0: 2.0 * PI * step / t,
        t,
        ratio,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Number of harmonics from the count of high peaks on the Fourier grid.
///
/// Peaks are local maxima above five times the median power. The one-sided
/// grid shows each harmonic once, so the two-sided count is `l = 2p + 1` and
/// `m̂ = ⌊(l−1)/2⌋ = p`, clamped to `1..=8`.
pub fn estimate_m(p: &Periodogram) -> usize {
    let grid: Vec<f64> = p.fourier_grid().into_iter().map(|(_, v)| v).collect();
    if grid.len() < 3 {
        return 1;
    }
    let med = median(&mut grid.clone());
    let peaks = (0..grid.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { grid[i - 1] };
            let right = grid.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            grid[i] > left && grid[i] >= right && grid[i] > 5.0 * med
        })
        .count();
    peaks.clamp(1, MAX_M)
}

/// Detrends `data`, builds the periodogram and estimates the period.
pub fn period_from_data(
    data: &RegressionData,
    m: usize,
    pad: usize,
    threshold: f64,
) -> Result<(Periodogram, PeriodEstimate)> {
    let step = even_step(&data.x)
        .ok_or_else(|| Error::InvalidArgument("period estimation needs an evenly spaced schedule".into()))?
        .abs();
    let p = periodogram(&detrend(data)?, pad)?;
    let est = estimate_period(&p, m, step, threshold)?;
    Ok((p, est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn constant_series_has_no_power() {
        let p = periodogram(&[vec![3.0; 40]], 10).unwrap();
        assert!(p.power.iter().all(|&v| v.abs() < 1e-20));
    }

    #[test]
    fn cosine_peak() {
        let y: Vec<f64> = (0..500).map(|j| (1.2 * j as f64).cos()).collect();
        let p = periodogram(&[y], 10).unwrap();
        let (i, _) = p
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let step = p.freqs[1] - p.freqs[0];
        assert!((p.freqs[i] - 1.2).abs() <= step);
    }

    #[test]
    fn synthetic_period_recovery() {
        let x: Vec<f64> = (0..500).map(|j| -4.5 + 0.02 * j as f64).collect();
        let h0 = 2f64.ln();
        let y = x
            .iter()
            .map(|v| 0.3 + 1.5 * v + 0.1 * (2.0 * PI * v / h0).cos())
            .collect();
        let data = RegressionData::from_rows(x, vec![(2, y)]).unwrap();
        let (_, est) = period_from_data(&data, 1, 10, DEFAULT_SIGNIFICANCE).unwrap();
        assert!((est.h0 - h0).abs() / h0 < 0.02, "{}", est.h0);
    }

    #[test]
    fn white_noise_is_not_significant() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..176).map(|j| 0.02 * j as f64).collect();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = x.iter().map(|_| normal.sample(&mut rng)).collect();
            let data = RegressionData::from_rows(x.clone(), vec![(0, y)]).unwrap();
            assert!(
                matches!(
                    period_from_data(&data, 4, 10, DEFAULT_SIGNIFICANCE),
                    Err(Error::NoSignificantPeriod { .. })
                ),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn pure_tone_is_not_mistaken_for_a_subharmonic() {
        let x: Vec<f64> = (0..176).map(|j| -4.5 + 0.02 * j as f64).collect();
        let h0 = 2f64.ln();
        let y = x.iter().map(|v| (2.0 * PI * v / h0).sin()).collect();
        let data = RegressionData::from_rows(x, vec![(0, y)]).unwrap();
        let (_, est) = period_from_data(&data, 4, 10, DEFAULT_SIGNIFICANCE).unwrap();
        assert!((est.h0 - h0).abs() / h0 < 0.01, "{}", est.h0);
    }

    #[test]
    fn linear_trend_does_not_change_the_estimate() {
        let x: Vec<f64> = (0..176).map(|j| -4.5 + 0.02 * j as f64).collect();
        let base: Vec<f64> = x.iter().map(|v| 0.2 * (9.06 * v).sin() + 0.05 * (18.1 * v).cos()).collect();
        let tilted: Vec<f64> = x.iter().zip(&base).map(|(v, b)| b + 3.0 - 0.7 * v).collect();
        let a = period_from_data(&RegressionData::from_rows(x.clone(), vec![(0, base)]).unwrap(), 4, 10, 5.0).unwrap();
        let b = period_from_data(&RegressionData::from_rows(x, vec![(0, tilted)]).unwrap(), 4, 10, 5.0).unwrap();
        assert!((a.1.h0 - b.1.h0).abs() < 1e-6 * a.1.h0);
        assert!((a.1.h0 - 2.0 * PI / 9.06).abs() < 0.01, "{}", a.1.h0);
    }

    #[test]
    fn harmonic_count() {
        let one: Vec<f64> = (0..400).map(|j| (0.5 * j as f64).cos()).collect();
        assert_eq!(estimate_m(&periodogram(&[one], 10).unwrap()), 1);
        let two: Vec<f64> = (0..400)
            .map(|j| (2.0 * PI * 20.0 * j as f64 / 400.0).cos() + (2.0 * PI * 40.0 * j as f64 / 400.0).cos())
            .collect();
        assert!(estimate_m(&periodogram(&[two], 10).unwrap()) >= 2);
        assert_eq!(estimate_m(&periodogram(&[vec![1.0; 20]], 10).unwrap()), 1);
    }
}
