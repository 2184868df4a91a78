//! Quasi-linear regression estimator with a periodic (Fourier) seasonal part.
//!
//! Model per index `k`:
//! `y_kj = β_k + s x_j + Σ_{i=1..m} (α_ki cos(iμx_j) − γ_ki sin(iμx_j))`
//! with `μ = 2π/h₀`. Writing `α = b cos φ`, `γ = b sin φ` the seasonal part is
//! `f_k(x) = Σ b_ki cos(iμx + φ_ki)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::series::RegressionData;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NreMode {
    /// Shared slope, per-index intercepts and seasonal parts.
    #[default]
    Simultaneous,
    /// Independent fits per index; `ŝ` is the median of the per-index slopes.
    Separate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NreOptions {
    pub h0: f64,
    pub m: usize,
    pub mode: NreMode,
    /// Holds `s` fixed instead of estimating it.
    pub fixed_s: Option<f64>,
}

impl NreOptions {
    pub fn new(h0: f64, m: usize) -> Self {
        NreOptions {
            h0,
            m,
            mode: NreMode::Simultaneous,
            fixed_s: None,
        }
    }

    pub fn mode(mut self, mode: NreMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn fixed_s(mut self, s: f64) -> Self {
        self.fixed_s = Some(s);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTerm {
    pub alpha: f64,
    pub gamma: f64,
}

impl FourierTerm {
    pub fn amplitude(&self) -> f64 {
        self.alpha.hypot(self.gamma)
    }

    /// Phase in `(-π, π]`.
    pub fn phase(&self) -> f64 {
        self.gamma.atan2(self.alpha)
    }

    pub fn from_polar(b: f64, phi: f64) -> Self {
        FourierTerm {
            alpha: b * phi.cos(),
            gamma: b * phi.sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NreIndexFit {
    pub k: usize,
    pub sign: f64,
    pub beta: f64,
    /// Slope used for this index (shared in simultaneous mode).
    pub s: f64,
    pub fourier: Vec<FourierTerm>,
    /// `σ_k |Ĉ_k|`.
    pub curvature: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NreResult {
    pub s_hat: f64,
    pub fits: Vec<NreIndexFit>,
    pub h0: f64,
    pub m: usize,
    pub mode: NreMode,
    pub objective: f64,
}

impl NreResult {
    pub fn fit_of(&self, k: usize) -> Option<&NreIndexFit> {
        self.fits.iter().find(|f| f.k == k)
    }

    pub fn curvature_of(&self, k: usize) -> Option<f64> {
        self.fit_of(k).map(|f| f.curvature)
    }

    pub fn index_set(&self) -> Vec<usize> {
        self.fits.iter().map(|f| f.k).collect()
    }
}

/// Simpson panels for the period integral.
pub const SIMPSON_PANELS: usize = 1024;

/// Tolerance for the aliasing check on log-arithmetic schedules.
const ALIAS_TOL: f64 = 1e-9;

/// Evaluates `f(x) = Σ b_i cos(iμx + φ_i)`.
pub fn seasonal_value(terms: &[FourierTerm], h0: f64, x: f64) -> f64 {
    let mu = 2.0 * PI / h0;
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let a = mu * (i + 1) as f64 * x;
            t.alpha * a.cos() - t.gamma * a.sin()
        })
        .sum()
}

/// `exp(β)/h₀ ∫₀^{h₀} exp f(x) dx` by composite Simpson.
pub fn period_average(beta: f64, terms: &[FourierTerm], h0: f64) -> Result<f64> {
    let n = SIMPSON_PANELS;
    let h = h0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * seasonal_value(terms, h0, i as f64 * h).exp();
    }
    let value = beta.exp() * acc * h / 3.0 / h0;
    if !value.is_finite() {
        return Err(Error::Numeric("period integral is not finite".into()));
    }
    Ok(value)
}

/// Checks that no seasonal frequency aliases onto the sampling lattice of an
/// evenly spaced schedule, i.e. `a·j/h₀ ∉ ℤ` for `j = 1..2m`.
pub fn check_aliasing(x: &[f64], h0: f64, m: usize) -> Result<()> {
    let Some(a) = even_step(x) else {
        return Ok(());
    };
    for j in 1..=2 * m {
        let r = a * j as f64 / h0;
        if (r - r.round()).abs() < ALIAS_TOL * r.abs().max(1.0) {
            return Err(Error::DegenerateDesign(format!(
                "schedule step {a} times {j} is a multiple of the period {h0}; \
                 seasonal columns are collinear"
            )));
        }
    }
    Ok(())
}

/// Common step of an evenly spaced sequence.
pub fn even_step(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let a = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let tol = 1e-9 * a.abs().max(1e-300);
    x.windows(2)
        .all(|w| ((w[1] - w[0]) - a).abs() <= tol.max(1e-12))
        .then_some(a)
}

pub fn nre_fit(data: &RegressionData, opts: &NreOptions) -> Result<NreResult> {
    if !(opts.h0 > 0.0 && opts.h0.is_finite()) {
        return Err(Error::InvalidArgument("period h0 must be positive".into()));
    }
    if data.series.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let min = 2 * opts.m + 2;
    for s in &data.series {
        if s.samples.len() < min {
            return Err(Error::SeriesTooShort {
                len: s.samples.len(),
                min,
            });
        }
    }
    check_aliasing(&data.x, opts.h0, opts.m)?;
    match opts.mode {
        NreMode::Simultaneous => fit_block(data, opts),
        NreMode::Separate => {
            let mut fits = Vec::with_capacity(data.series.len());
            let mut objective = 0.0;
            for s in &data.series {
                let single = RegressionData {
                    x: data.x.clone(),
                    series: vec![s.clone()],
                };
                let r = fit_block(&single, opts)?;
                objective += r.objective;
                fits.extend(r.fits);
            }
            let mut slopes: Vec<f64> = fits.iter().map(|f| f.s).collect();
            Ok(NreResult {
                s_hat: median(&mut slopes),
                fits,
                h0: opts.h0,
                m: opts.m,
                mode: NreMode::Separate,
                objective,
            })
        }
    }
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Joint least-squares fit over all series of `data` with a shared slope.
fn fit_block(data: &RegressionData, opts: &NreOptions) -> Result<NreResult> {
    let kn = data.series.len();
    let m = opts.m;
    let mu = 2.0 * PI / opts.h0;
    let s_cols = usize::from(opts.fixed_s.is_none());
    let p = kn + s_cols + 2 * m * kn;
    let rows: usize = data.series.iter().map(|s| s.samples.len()).sum();
    if rows < p {
        return Err(Error::SeriesTooShort { len: rows, min: p });
    }
    let mut a = DMatrix::<f64>::zeros(rows, p);
    let mut b = DVector::<f64>::zeros(rows);
    let mut r = 0;
    for (ki, s) in data.series.iter().enumerate() {
        let four = kn + s_cols + 2 * m * ki;
        for &(j, y) in &s.samples {
            let x = data.x[j];
            a[(r, ki)] = 1.0;
            if s_cols == 1 {
                a[(r, kn)] = x;
            }
            for i in 0..m {
                let arg = mu * (i + 1) as f64 * x;
                a[(r, four + 2 * i)] = arg.cos();
                a[(r, four + 2 * i + 1)] = -arg.sin();
            }
            b[r] = y - opts.fixed_s.map_or(0.0, |sv| sv * x);
            r += 1;
        }
    }
    let theta = least_squares(a.clone(), &b)?;
    let resid = &a * &theta - &b;
    let s_hat = opts.fixed_s.unwrap_or_else(|| theta[kn]);

    let mut fits = Vec::with_capacity(kn);
    let mut objective = 0.0;
    let mut r = 0;
    for (ki, s) in data.series.iter().enumerate() {
        let four = kn + s_cols + 2 * m * ki;
        let fourier: Vec<FourierTerm> = (0..m)
            .map(|i| FourierTerm {
                alpha: theta[four + 2 * i],
                gamma: theta[four + 2 * i + 1],
            })
            .collect();
        let obj: f64 = resid.rows(r, s.samples.len()).norm_squared();
        r += s.samples.len();
        objective += obj;
        let beta = theta[ki];
        fits.push(NreIndexFit {
            k: s.k,
            sign: s.sign,
            beta,
            s: s_hat,
            curvature: s.sign * period_average(beta, &fourier, opts.h0)?,
            fourier,
            objective: obj,
        });
    }
    if !s_hat.is_finite() {
        return Err(Error::Numeric("non-finite slope".into()));
    }
    Ok(NreResult {
        s_hat,
        fits,
        h0: opts.h0,
        m,
        mode: NreMode::Simultaneous,
        objective,
    })
}

/// Least squares via Householder QR on a column-equilibrated design.
fn least_squares(mut a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let p = a.ncols();
    let mut scale = vec![1.0; p];
    for (c, sc) in scale.iter_mut().enumerate() {
        let norm = a.column(c).norm();
        if norm == 0.0 {
            return Err(Error::DegenerateDesign(format!("column {c} is zero")));
        }
        *sc = norm;
        a.column_mut(c).scale_mut(1.0 / norm);
    }
    let (q, r) = a.qr().unpack();
    let diag_max = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..p).any(|i| r[(i, i)].abs() <= 1e-10 * diag_max) {
        return Err(Error::DegenerateDesign("design matrix is rank deficient".into()));
    }
    let qtb = q.transpose() * b;
    let mut theta = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::DegenerateDesign("singular triangular factor".into()))?;
    for (t, sc) in theta.iter_mut().zip(&scale) {
        *t /= sc;
    }
    Ok(theta)
}
