//! Dimension and curvature estimators.
//!
//! * [`lre`] – linear regression with a shared slope (the sausage method is
//!   the special case `J = {2}`),
//! * [`nre`] – linear regression with a periodic seasonal part, for
//!   arithmetic sets whose log-scale data oscillate,
//! * [`periodogram`] – period and harmonic-count estimation for NRE,
//! * [`boxcount`] – box-counting dimension for comparison,
//! * [`diagnostics`] – design eigenvalues and curvature relations.

pub mod boxcount;
pub mod diagnostics;
pub mod lre;
pub mod nre;
pub mod periodogram;
pub mod report;

use crate::error::{Error, Result};
use crate::series::RegressionData;

pub use boxcount::box_count_dimension;
pub use diagnostics::{check_halfdim_relation, design_eigen_diagnostics, design_matrix, EigenDiagnostics};
pub use lre::{lre_fit, lre_fit_fixed_s, LreResult};
pub use nre::{nre_fit, FourierTerm, NreMode, NreOptions, NreResult};
pub use periodogram::{estimate_m, estimate_period, periodogram, PeriodEstimate, Periodogram};

/// Number of harmonics used when none is requested.
pub const DEFAULT_M: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    Lre,
    Nre,
    /// NRE if the periodogram shows a significant period, LRE otherwise.
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HarmonicCount {
    Fixed(usize),
    /// Counted from periodogram peaks.
    Estimated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    pub method: Method,
    pub m: HarmonicCount,
    /// Known period; estimated from the periodogram when absent.
    pub h0: Option<f64>,
    pub mode: NreMode,
    pub fixed_s: Option<f64>,
    /// Indices whose residuals feed the periodogram; defaults to `{0}` when
    /// available, else all of `J`.
    pub period_indices: Option<Vec<usize>>,
    pub pad: usize,
    pub threshold: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            method: Method::Auto,
            m: HarmonicCount::Fixed(DEFAULT_M),
            h0: None,
            mode: NreMode::Simultaneous,
            fixed_s: None,
            period_indices: None,
            pad: periodogram::DEFAULT_PAD,
            threshold: periodogram::DEFAULT_SIGNIFICANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Lre(LreResult),
    Nre(NreResult),
}

impl Estimate {
    pub fn s_hat(&self) -> f64 {
        match self {
            Estimate::Lre(r) => r.s_hat,
            Estimate::Nre(r) => r.s_hat,
        }
    }

    pub fn curvature_of(&self, k: usize) -> Option<f64> {
        match self {
            Estimate::Lre(r) => r.curvature_of(k),
            Estimate::Nre(r) => r.curvature_of(k),
        }
    }

    pub fn beta_of(&self, k: usize) -> Option<f64> {
        match self {
            Estimate::Lre(r) => r.beta_of(k),
            Estimate::Nre(r) => r.fit_of(k).map(|f| f.beta),
        }
    }

    pub fn index_set(&self) -> Vec<usize> {
        match self {
            Estimate::Lre(r) => r.index_set.clone(),
            Estimate::Nre(r) => r.index_set(),
        }
    }

    pub fn objective(&self) -> f64 {
        match self {
            Estimate::Lre(r) => r.objective,
            Estimate::Nre(r) => r.objective,
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self {
            Estimate::Lre(_) => "lre",
            Estimate::Nre(_) => "nre",
        }
    }
}

/// Everything produced by one estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub estimate: Estimate,
    pub period: Option<PeriodEstimate>,
    /// Set when the auto method fell back to LRE.
    pub fallback: Option<String>,
    /// Slopes of independent per-index linear fits, `(k, ŝ_k)`.
    pub per_index_slopes: Vec<(usize, f64)>,
    /// `|Ĉ₁ − ((2−ŝ)/2)Ĉ₂| / |Ĉ₁|` when both curvatures were estimated.
    pub halfdim_discrepancy: Option<f64>,
}

fn period_data(data: &RegressionData, opts: &EstimateOptions) -> Result<RegressionData> {
    let wanted = match &opts.period_indices {
        Some(ks) => ks.clone(),
        None if data.get(0).is_some() => vec![0],
        None => data.index_set(),
    };
    let series = wanted
        .iter()
        .map(|&k| data.get(k).cloned().ok_or(Error::MissingIndex(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegressionData {
        x: data.x.clone(),
        series,
    })
}

/// Runs the selected estimator on `data`.
pub fn estimate(data: &RegressionData, opts: &EstimateOptions) -> Result<EstimationResult> {
    let mut period = None;
    let mut fallback = None;
    let estimate = match opts.method {
        Method::Lre => Estimate::Lre(fit_lre(data, opts)?),
        Method::Nre | Method::Auto => {
            let attempt = nre_with_period(data, opts, &mut period);
            match (attempt, opts.method) {
                (Ok(r), _) => Estimate::Nre(r),
                (Err(e @ Error::NoSignificantPeriod { .. }), Method::Auto) => {
                    fallback = Some(e.to_string());
                    Estimate::Lre(fit_lre(data, opts)?)
                }
                (Err(e), _) => return Err(e),
            }
        }
    };
    let per_index_slopes = lre::per_index_slopes(data)?;
    let halfdim_discrepancy = match (estimate.curvature_of(1), estimate.curvature_of(2)) {
        (Some(c1), Some(c2)) => check_halfdim_relation(estimate.s_hat(), c1, c2).ok(),
        _ => None,
    };
    Ok(EstimationResult {
        estimate,
        period,
        fallback,
        per_index_slopes,
        halfdim_discrepancy,
    })
}

fn fit_lre(data: &RegressionData, opts: &EstimateOptions) -> Result<LreResult> {
    match opts.fixed_s {
        Some(s) => lre_fit_fixed_s(data, s),
        None => lre_fit(data),
    }
}

/// Residuals at the level of floating-point rounding carry no period.
fn is_rounding_noise(data: &RegressionData, resid: &[Vec<f64>]) -> bool {
    let scale = data
        .series
        .iter()
        .flat_map(|s| s.samples.iter().map(|&(_, y)| y.abs()))
        .chain(data.x.iter().map(|x| x.abs()))
        .fold(1.0, f64::max);
    resid.iter().flatten().all(|r| r.abs() <= 1e-10 * scale)
}

fn nre_with_period(
    data: &RegressionData,
    opts: &EstimateOptions,
    period: &mut Option<PeriodEstimate>,
) -> Result<NreResult> {
    let needs_pgram = opts.h0.is_none() || opts.m == HarmonicCount::Estimated;
    let pgram = if needs_pgram {
        let pd = period_data(data, opts)?;
        let resid = periodogram::detrend(&pd)?;
        if opts.h0.is_none() && is_rounding_noise(&pd, &resid) {
            return Err(Error::NoSignificantPeriod {
                ratio: 0.0,
                threshold: opts.threshold,
            });
        }
        Some(periodogram::periodogram(&resid, opts.pad)?)
    } else {
        None
    };
    let m = match opts.m {
        HarmonicCount::Fixed(m) => m,
        HarmonicCount::Estimated => estimate_m(pgram.as_ref().expect("built above")),
    };
    let h0 = match opts.h0 {
        Some(h) => h,
        None => {
            let step = nre::even_step(&data.x)
                .ok_or_else(|| {
                    Error::InvalidArgument(
                        "period estimation needs an evenly spaced schedule; pass h0".into(),
                    )
                })?
                .abs();
            let est = estimate_period(pgram.as_ref().expect("built above"), m.max(1), step, opts.threshold)?;
            *period = Some(est);
            est.h0
        }
    };
    let mut nopts = NreOptions::new(h0, m).mode(opts.mode);
    nopts.fixed_s = opts.fixed_s;
    nre_fit(data, &nopts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn xs() -> Vec<f64> {
        (0..176).map(|j| -4.5 + 0.02 * j as f64).collect()
    }

    #[test]
    fn auto_picks_nre_for_periodic_data() {
        let x = xs();
        let h0 = 2f64.ln();
        let rows = (0..3)
            .map(|k| {
                (
                    k,
                    x.iter()
                        .map(|v| k as f64 + 1.585 * v + 0.2 * (2.0 * PI * v / h0 + k as f64).cos())
                        .collect(),
                )
            })
            .collect();
        let data = RegressionData::from_rows(x, rows).unwrap();
        let r = estimate(&data, &EstimateOptions::default()).unwrap();
        assert_eq!(r.estimate.method_name(), "nre");
        assert!((r.period.unwrap().h0 - h0).abs() / h0 < 0.01);
        assert!((r.estimate.s_hat() - 1.585).abs() < 1e-3);
    }

    #[test]
    fn auto_falls_back_to_lre_on_linear_data() {
        let x = xs();
        let rows = vec![(2, x.iter().map(|v| 0.5 + 1.3 * v).collect())];
        let data = RegressionData::from_rows(x, rows).unwrap();
        let r = estimate(&data, &EstimateOptions::default()).unwrap();
        assert_eq!(r.estimate.method_name(), "lre");
        assert!(r.fallback.is_some());
        assert!((r.estimate.s_hat() - 1.3).abs() < 1e-12);
        assert!(r.halfdim_discrepancy.is_none());
    }
}
