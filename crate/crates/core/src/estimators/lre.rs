//! Linear regression estimator: one shared slope `s`, one intercept per index.

use crate::error::{Error, Result};
use crate::series::RegressionData;

#[derive(Clone, Debug, PartialEq)]
pub struct LreResult {
    pub s_hat: f64,
    /// `(k, β̂_k)`.
    pub beta: Vec<(usize, f64)>,
    /// `(k, σ_k exp β̂_k)`.
    pub curvatures: Vec<(usize, f64)>,
    /// Minimised sum of squared residuals.
    pub objective: f64,
    pub index_set: Vec<usize>,
}

impl LreResult {
    pub fn beta_of(&self, k: usize) -> Option<f64> {
        self.beta.iter().find(|(i, _)| *i == k).map(|&(_, b)| b)
    }

    pub fn curvature_of(&self, k: usize) -> Option<f64> {
        self.curvatures.iter().find(|(i, _)| *i == k).map(|&(_, c)| c)
    }
}

struct Moments {
    x_mean: f64,
    y_mean: f64,
}

fn moments(data: &RegressionData) -> Result<Vec<Moments>> {
    if data.series.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    data.series
        .iter()
        .map(|s| {
            if s.samples.len() < 2 {
                return Err(Error::SeriesTooShort {
                    len: s.samples.len(),
                    min: 2,
                });
            }
            let n = s.samples.len() as f64;
            let x_mean = s.samples.iter().map(|&(j, _)| data.x[j]).sum::<f64>() / n;
            let y_mean = s.samples.iter().map(|&(_, y)| y).sum::<f64>() / n;
            Ok(Moments { x_mean, y_mean })
        })
        .collect()
}

/// Least-squares fit of `y_kj = β_k + s x_j` over all `k ∈ J`.
pub fn lre_fit(data: &RegressionData) -> Result<LreResult> {
    let m = moments(data)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (s, mk) in data.series.iter().zip(&m) {
        for &(j, y) in &s.samples {
            let dx = data.x[j] - mk.x_mean;
            num += dx * (y - mk.y_mean);
            den += dx * dx;
        }
    }
    let scale: f64 = data.x.iter().map(|x| x * x).sum::<f64>().max(1.0);
    if !(den > 1e-14 * scale) {
        return Err(Error::DegenerateDesign("all x values are equal".into()));
    }
    finish(data, &m, num / den)
}

/// The intercepts for a known slope `s`.
pub fn lre_fit_fixed_s(data: &RegressionData, s: f64) -> Result<LreResult> {
    let m = moments(data)?;
    finish(data, &m, s)
}

fn finish(data: &RegressionData, m: &[Moments], s_hat: f64) -> Result<LreResult> {
    let beta: Vec<(usize, f64)> = data
        .series
        .iter()
        .zip(m)
        .map(|(s, mk)| (s.k, mk.y_mean - s_hat * mk.x_mean))
        .collect();
    let betas: Vec<f64> = beta.iter().map(|b| b.1).collect();
    let objective = lre_objective(data, s_hat, &betas);
    if !(s_hat.is_finite() && objective.is_finite()) {
        return Err(Error::Numeric("non-finite regression output".into()));
    }
    let curvatures = data
        .series
        .iter()
        .zip(&beta)
        .map(|(s, &(k, b))| (k, s.sign * b.exp()))
        .collect();
    Ok(LreResult {
        s_hat,
        beta,
        curvatures,
        objective,
        index_set: data.index_set(),
    })
}

/// `Σ_k Σ_j (y_kj − β_k − s x_j)²`, with `beta` ordered as `data.series`.
pub fn lre_objective(data: &RegressionData, s: f64, beta: &[f64]) -> f64 {
    data.series
        .iter()
        .zip(beta)
        .map(|(ser, &b)| {
            ser.samples
                .iter()
                .map(|&(j, y)| (y - b - s * data.x[j]).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Separate fits for every index, `(k, ŝ_k)`.
pub fn per_index_slopes(data: &RegressionData) -> Result<Vec<(usize, f64)>> {
    data.series
        .iter()
        .map(|s| {
            let single = RegressionData {
                x: data.x.clone(),
                series: vec![s.clone()],
            };
            Ok((s.k, lre_fit(&single)?.s_hat))
        })
        .collect()
}
