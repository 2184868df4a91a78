//! Monte Carlo checks of the linear estimator on synthetic regressions
//! `y_kj = β_k + s x_j + δ_kj` with controlled error covariance.

use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::diagnostics::{design_eigen_diagnostics, design_matrix};
use crate::estimators::lre::lre_fit;
use crate::series::{fmt_f64, RegressionData};

/// Distribution of the stacked error vector `δ` (index-major: all `j` for
/// `k = 0`, then `k = 1`, ...).
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorModel {
    Iid { sigma: f64 },
    /// `δ_i = σ/√w Σ_{l<w} γ_{i+l}`: unit-lag-correlated errors with
    /// dependence range `w`.
    MovingAverage { sigma: f64, window: usize },
    /// `δ = L γ` with `L Lᵀ = Q`.
    ExplicitCovariance(DMatrix<f64>),
    /// Student-t innovations rescaled to variance `σ²`.
    StudentT { sigma: f64, dof: f64 },
}

impl ErrorModel {
    pub fn validate(&self, len: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidErrorModel(m.into()));
        match self {
            ErrorModel::Iid { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => bad("sigma must be non-negative"),
            ErrorModel::MovingAverage { sigma, window } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    bad("sigma must be non-negative")
                } else if *window == 0 {
                    bad("window must be at least 1")
                } else {
                    Ok(())
                }
            }
            ErrorModel::StudentT { sigma, dof } if !(*sigma >= 0.0 && *dof > 2.0) => {
                bad("Student-t errors need sigma >= 0 and more than two degrees of freedom")
            }
            ErrorModel::ExplicitCovariance(q) => {
                if q.nrows() != len || q.ncols() != len {
                    return Err(Error::InvalidErrorModel(format!(
                        "covariance is {}x{}, expected {len}x{len}",
                        q.nrows(),
                        q.ncols()
                    )));
                }
                if (q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
                    return bad("covariance is not symmetric");
                }
                if q.clone().cholesky().is_none() {
                    return bad("covariance is not positive definite");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Upper bound `ν*` on the covariance eigenvalues.
    pub fn nu_star(&self) -> f64 {
        match self {
            ErrorModel::Iid { sigma } | ErrorModel::StudentT { sigma, .. } => sigma * sigma,
            ErrorModel::MovingAverage { sigma, window } => sigma * sigma * *window as f64,
            ErrorModel::ExplicitCovariance(q) => q.clone().symmetric_eigen().eigenvalues.max(),
        }
    }

    pub fn sample<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<f64> {
        let mut gauss = |m: usize| -> Vec<f64> { (0..m).map(|_| rng.sample(StandardNormal)).collect() };
        match self {
            ErrorModel::Iid { sigma } => gauss(len).into_iter().map(|g| sigma * g).collect(),
            ErrorModel::MovingAverage { sigma, window } => {
                let g = gauss(len + window - 1);
                let c = sigma / (*window as f64).sqrt();
                let mut acc: f64 = g[..*window].iter().sum();
                let mut out = Vec::with_capacity(len);
                for i in 0..len {
                    if i > 0 {
                        acc += g[i + window - 1] - g[i - 1];
                    }
                    out.push(c * acc);
                }
                out
            }
            ErrorModel::ExplicitCovariance(q) => {
                let l = q.clone().cholesky().expect("validated").unpack();
                (l * DVector::from_vec(gauss(len))).iter().copied().collect()
            }
            ErrorModel::StudentT { sigma, dof } => {
                let t = StudentT::new(*dof).expect("validated");
                let c = sigma * ((dof - 2.0) / dof).sqrt();
                (0..len).map(|_| c * t.sample(rng)).collect()
            }
        }
    }
}

impl ErrorModel {
    /// Covariance from row vectors; validated against the design length later.
    pub fn from_covariance_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidErrorModel("covariance must be a non-empty square matrix".into()));
        }
        Ok(ErrorModel::ExplicitCovariance(DMatrix::from_fn(n, n, |i, j| rows[i][j])))
    }
}

/// `iid:SIGMA`, `ma:SIGMA:WINDOW` or `t:SIGMA:DOF`.
impl FromStr for ErrorModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || Error::InvalidErrorModel(format!("cannot parse '{text}'; use iid:SIGMA, ma:SIGMA:WINDOW or t:SIGMA:DOF"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let model = match parts.as_slice() {
            ["iid", sigma] => ErrorModel::Iid { sigma: num(sigma)? },
            ["ma", sigma, w] => ErrorModel::MovingAverage {
                sigma: num(sigma)?,
                window: w.parse().map_err(|_| bad())?,
            },
            ["t", sigma, dof] => ErrorModel::StudentT {
                sigma: num(sigma)?,
                dof: num(dof)?,
            },
            _ => return Err(bad()),
        };
        model.validate(0)?;
        Ok(model)
    }
}

/// Abscissae as a function of the sample size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleFamily {
    /// `x_j = c j^δ`, `j = 1..=n`.
    Power { c: f64, delta: f64 },
    /// `x_j = a0 + a j`, `j = 1..=n`.
    Arithmetic { a0: f64, a: f64 },
}

impl ScheduleFamily {
    pub fn xs(&self, n: usize) -> Vec<f64> {
        match *self {
            ScheduleFamily::Power { c, delta } => (1..=n).map(|j| c * (j as f64).powf(delta)).collect(),
            ScheduleFamily::Arithmetic { a0, a } => (1..=n).map(|j| a0 + a * j as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub s: f64,
    /// One intercept per index `k = 0..d`.
    pub beta: Vec<f64>,
}

impl Truth {
    /// Parameter vector `(β_0, …, β_d, s)`.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.beta.clone();
        t.push(self.s);
        t
    }

    fn data(&self, x: &[f64], delta: &[f64]) -> RegressionData {
        let n = x.len();
        let rows = self
            .beta
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let y = x
                    .iter()
                    .enumerate()
                    .map(|(j, xj)| b + self.s * xj + delta[k * n + j])
                    .collect();
                (k, y)
            })
            .collect();
        RegressionData::from_rows(x.to_vec(), rows).expect("rows match x")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub n: usize,
    pub rmse_s: f64,
    pub rmse_beta: Vec<f64>,
    /// `(ε, P̂(|θ̂ − θ| > ε), bound)` with `θ = (β, s)`.
    pub exceedance: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub trials: usize,
    pub rows: Vec<TrialRow>,
}

impl TrialReport {
    pub fn row(&self, n: usize) -> Option<&TrialRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// True if every exceedance frequency is non-increasing in `n`.
    pub fn exceedance_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].exceedance
                .iter()
                .zip(&w[1].exceedance)
                .all(|(a, b)| b.1 <= a.1)
        })
    }
}

pub const MIN_TRIALS: usize = 100;

/// Independent stream per `(seed, n, trial)`.
fn trial_rng(seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabConfig {
    pub truth: Truth,
    pub family: ScheduleFamily,
    pub error: ErrorModel,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub eps: Vec<f64>,
    pub seed: u64,
}

pub fn simulate_lre(cfg: &LabConfig) -> Result<TrialReport> {
    if cfg.trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_TRIALS} trials are required"
        )));
    }
    if cfg.truth.beta.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let d = cfg.truth.beta.len() - 1;
    let theta = cfg.truth.theta();
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let x = cfg.family.xs(n);
        let len = (d + 1) * n;
        cfg.error.validate(len)?;
        let diag = design_eigen_diagnostics(&x, d)?;
        let errors: Vec<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| -> Result<Vec<f64>> {
                let mut rng = trial_rng(cfg.seed, n, t);
                let delta = cfg.error.sample(len, &mut rng);
                let fit = lre_fit(&cfg.truth.data(&x, &delta))?;
                let mut est: Vec<f64> = fit.beta.iter().map(|b| b.1).collect();
                est.push(fit.s_hat);
                Ok(est.iter().zip(&theta).map(|(a, b)| a - b).collect())
            })
            .collect::<Result<_>>()?;
        let tn = cfg.trials as f64;
        let rmse = |i: usize| (errors.iter().map(|e| e[i] * e[i]).sum::<f64>() / tn).sqrt();
        let nu = cfg.error.nu_star();
        let exceedance = cfg
            .eps
            .iter()
            .map(|&eps| {
                let hits = errors
                    .iter()
                    .filter(|e| e.iter().map(|v| v * v).sum::<f64>().sqrt() > eps)
                    .count();
                (eps, hits as f64 / tn, diag.bound(nu, eps))
            })
            .collect();
        rows.push(TrialRow {
            n,
            rmse_s: rmse(d + 1),
            rmse_beta: (0..=d).map(rmse).collect(),
            exceedance,
        });
    }
    Ok(TrialReport {
        trials: cfg.trials,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityReport {
    pub statistics: Vec<f64>,
    /// Kolmogorov–Smirnov distance to the standard normal.
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    /// `(standard normal decile, empirical decile)` for 10%, …, 90%.
    pub deciles: Vec<(f64, f64)>,
}

impl NormalityReport {
    pub fn max_decile_error(&self) -> f64 {
        self.deciles
            .iter()
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Standardised statistic `tᵀ(θ̂−θ) / (σ √(tᵀ(XᵀX)⁻¹t))` over `trials` runs
/// with iid Gaussian errors of standard deviation `sigma`.
pub fn simulate_normality(
    truth: &Truth,
    family: ScheduleFamily,
    sigma: f64,
    n: usize,
    trials: usize,
    t: &[f64],
    seed: u64,
) -> Result<NormalityReport> {
    let d = truth.beta.len().checked_sub(1).ok_or(Error::EmptyIndexSet)?;
    if t.len() != d + 2 {
        return Err(Error::InvalidArgument(format!(
            "t must have {} components",
            d + 2
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("at least two trials are required".into()));
    }
    let x = family.xs(n);
    let xm = design_matrix(&x, d);
    let inv = (xm.transpose() * &xm)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateDesign("XᵀX is singular".into()))?;
    let tv = DVector::from_column_slice(t);
    let scale = (tv.transpose() * &inv * &tv)[(0, 0)].sqrt();
    let theta = truth.theta();
    let model = ErrorModel::Iid { sigma };
    let statistics: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = trial_rng(seed, n, i);
            let delta = model.sample((d + 1) * n, &mut rng);
            let fit = lre_fit(&truth.data(&x, &delta))?;
            let mut est: Vec<f64> = fit.beta.iter().map(|b| b.1).collect();
            est.push(fit.s_hat);
            let num: f64 = est.iter().zip(&theta).zip(t).map(|((a, b), w)| w * (a - b)).sum();
            Ok(if sigma > 0.0 { num / (sigma * scale) } else { 0.0 })
        })
        .collect::<Result<_>>()?;

    let mut sorted = statistics.clone();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let m = sorted.len() as f64;
    let ks_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    let deciles = (1..10)
        .map(|q| {
            let p = q as f64 / 10.0;
            (normal.inverse_cdf(p), quantile(&sorted, p))
        })
        .collect();
    Ok(NormalityReport {
        statistics,
        ks_statistic,
        ks_p_value: kolmogorov_p_value(ks_statistic, sorted.len()),
        deciles,
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Asymptotic p-value of the one-sample KS test.
fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = 2.0 * (-1f64).powi(j - 1) * (-2.0 * jf * jf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// CSV with one row per `(n, ε)`:
/// `n,rmse_s,rmse_beta_0..,eps,exceed_freq,bound`.
pub fn write_trial_csv<W: Write>(report: &TrialReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    let nb = report.rows.first().map_or(0, |r| r.rmse_beta.len());
    let mut header = vec!["n".to_string(), "rmse_s".to_string()];
    header.extend((0..nb).map(|k| format!("rmse_beta_{k}")));
    header.extend(["eps", "exceed_freq", "bound"].map(String::from));
    w.write_record(&header).map_err(err)?;
    for r in &report.rows {
        for &(eps, freq, bound) in &r.exceedance {
            let mut rec = vec![r.n.to_string(), fmt_f64(r.rmse_s)];
            rec.extend(r.rmse_beta.iter().map(|v| fmt_f64(*v)));
            rec.extend([fmt_f64(eps), fmt_f64(freq), fmt_f64(bound)]);
            w.write_record(&rec).map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::MalformedCsv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Truth {
        Truth {
            s: 1.585,
            beta: vec![-9.5, 11.7, 13.2],
        }
    }

    fn config(error: ErrorModel, family: ScheduleFamily, n_values: Vec<usize>) -> LabConfig {
        LabConfig {
            truth: truth(),
            family,
            error,
            n_values,
            trials: 200,
            eps: vec![0.05],
            seed: 11,
        }
    }

    #[test]
    fn noiseless_recovery() {
        let r = simulate_lre(&config(
            ErrorModel::Iid { sigma: 0.0 },
            ScheduleFamily::Power { c: 1.0, delta: 0.4 },
            vec![20],
        ))
        .unwrap();
        assert!(r.rows[0].rmse_s < 1e-12);
        assert_eq!(r.rows[0].exceedance[0].1, 0.0);
    }

    #[test]
    fn reproducible_and_schedule_independent() {
        let cfg = config(
            ErrorModel::Iid { sigma: 0.1 },
            ScheduleFamily::Power { c: 1.0, delta: 0.4 },
            vec![30],
        );
        assert_eq!(simulate_lre(&cfg).unwrap(), simulate_lre(&cfg).unwrap());
    }

    #[test]
    fn moving_average_exceedance_decreases() {
        let r = simulate_lre(&config(
            ErrorModel::MovingAverage { sigma: 0.1, window: 5 },
            ScheduleFamily::Arithmetic { a0: 0.0, a: 1.0 },
            vec![10, 40, 160],
        ))
        .unwrap();
        assert!(r.exceedance_monotone(), "{r:?}");
        assert!(r.rows[2].exceedance[0].1 < r.rows[0].exceedance[0].1);
    }

    #[test]
    fn explicit_covariance_sample_matches() {
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 2.0, 0.3, 0.2, 0.3, 1.5]);
        let model = ErrorModel::ExplicitCovariance(q.clone());
        model.validate(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = DMatrix::<f64>::zeros(3, 3);
        let trials = 10_000;
        for _ in 0..trials {
            let v = DVector::from_vec(model.sample(3, &mut rng));
            acc += &v * v.transpose();
        }
        acc /= trials as f64;
        for i in 0..3 {
            for j in 0..3 {
                assert!((acc[(i, j)] - q[(i, j)]).abs() <= 0.05 * q[(i, j)].abs(), "{i},{j}");
            }
        }
    }

    #[test]
    fn moving_average_variance() {
        let model = ErrorModel::MovingAverage { sigma: 0.5, window: 5 };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = model.sample(200_000, &mut rng);
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((var - 0.25).abs() < 0.01);
    }

    #[test]
    fn invalid_models() {
        assert!(ErrorModel::Iid { sigma: -1.0 }.validate(3).is_err());
        assert!(ErrorModel::MovingAverage { sigma: 1.0, window: 0 }.validate(3).is_err());
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(ErrorModel::ExplicitCovariance(q.clone()).validate(2).is_err());
        assert!(ErrorModel::ExplicitCovariance(DMatrix::identity(2, 2)).validate(3).is_err());
        assert!(ErrorModel::StudentT { sigma: 1.0, dof: 2.0 }.validate(3).is_err());
    }

    #[test]
    fn bound_dominates_frequency() {
        let r = simulate_lre(&LabConfig {
            eps: vec![0.05, 0.1, 0.2],
            ..config(
                ErrorModel::Iid { sigma: 0.1 },
                ScheduleFamily::Power { c: 1.0, delta: 0.4 },
                vec![50, 200],
            )
        })
        .unwrap();
        for row in &r.rows {
            for &(_, freq, bound) in &row.exceedance {
                assert!(freq <= bound);
            }
        }
    }

    #[test]
    fn zero_noise_normality_is_a_point_mass() {
        let r = simulate_normality(
            &truth(),
            ScheduleFamily::Power { c: 1.0, delta: 0.4 },
            0.0,
            50,
            10,
            &[1.0, 0.0, 0.0, 0.0],
            1,
        )
        .unwrap();
        assert!(r.statistics.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trial_csv_layout() {
        let r = simulate_lre(&config(
            ErrorModel::Iid { sigma: 0.1 },
            ScheduleFamily::Power { c: 1.0, delta: 0.4 },
            vec![10, 20],
        ))
        .unwrap();
        let mut buf = Vec::new();
        write_trial_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,rmse_s,rmse_beta_0,rmse_beta_1,rmse_beta_2,eps,exceed_freq,bound\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn error_model_specs() {
        assert_eq!("iid:0.1".parse::<ErrorModel>().unwrap(), ErrorModel::Iid { sigma: 0.1 });
        assert_eq!(
            "ma:0.2:3".parse::<ErrorModel>().unwrap(),
            ErrorModel::MovingAverage { sigma: 0.2, window: 3 }
        );
        assert!(matches!("t:0.1:2".parse::<ErrorModel>(), Err(Error::InvalidErrorModel(_))));
        assert!(matches!("iid:-1".parse::<ErrorModel>(), Err(Error::InvalidErrorModel(_))));
        assert!(matches!("gauss".parse::<ErrorModel>(), Err(Error::InvalidErrorModel(_))));
        assert!(ErrorModel::from_covariance_rows(vec![vec![1.0, 0.0], vec![0.0]]).is_err());
    }

}
