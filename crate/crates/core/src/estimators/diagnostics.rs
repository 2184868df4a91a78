//! Design-matrix eigenvalues and the weak-consistency bound of the linear
//! estimator, and the relation between the boundary and area curvatures.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues of `XᵀX` for the stacked design with `d+1` intercepts and one
/// shared slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenDiagnostics {
    pub n: usize,
    pub d: usize,
    /// `λ₀ = n`, multiplicity `d`.
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_min: f64,
    /// `tr(XᵀX) = n(d+1) + (d+1)Σx²`.
    pub trace: f64,
    /// `S̃²_n = (1/n) Σ (x_j − x̄)²`.
    pub spread: f64,
}

impl EigenDiagnostics {
    /// Chebyshev-type bound on `P(|β̂ − β| > ε)` for errors with covariance
    /// eigenvalues at most `nu_star`: `ν*·tr(XᵀX)/(ε² λ_min²)`.
    pub fn bound(&self, nu_star: f64, eps: f64) -> f64 {
        nu_star * self.trace / (eps * eps * self.lambda_min * self.lambda_min)
    }

    /// All eigenvalues in ascending order, with multiplicities.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut v = vec![self.lambda0; self.d];
        v.push(self.lambda1);
        v.push(self.lambda2);
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn design_eigen_diagnostics(x: &[f64], d: usize) -> Result<EigenDiagnostics> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    let nf = n as f64;
    let xm = x.iter().sum::<f64>() / nf;
    let spread = x.iter().map(|v| (v - xm).powi(2)).sum::<f64>() / nf;
    let q = (d + 1) as f64;
    let v = q * x.iter().map(|v| v * v).sum::<f64>();
    let half = (nf + v) / 2.0;
    let det = nf * nf * q * spread;
    let root = (half * half - det).max(0.0).sqrt();
    let lambda1 = half + root;
    // product form avoids cancellation in the small root
    let lambda2 = if lambda1 > 0.0 { det / lambda1 } else { 0.0 };
    Ok(EigenDiagnostics {
        n,
        d,
        lambda0: nf,
        lambda1,
        lambda2,
        lambda_min: lambda2.min(nf),
        trace: nf * q + v,
        spread,
    })
}

/// The explicit stacked design `X` (rows `(e_k, x_j)` for `k = 0..=d`).
pub fn design_matrix(x: &[f64], d: usize) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn((d + 1) * n, d + 2, |r, c| {
        let (k, j) = (r / n, r % n);
        if c == d + 1 {
            x[j]
        } else if c == k {
            1.0
        } else {
            0.0
        }
    })
}

/// `|Ĉ₁ − ((2−ŝ)/2)Ĉ₂| / |Ĉ₁|`.
pub fn check_halfdim_relation(s: f64, c1: f64, c2: f64) -> Result<f64> {
    if c1 == 0.0 || !c1.is_finite() || !c2.is_finite() || !s.is_finite() {
        return Err(Error::InvalidArgument(
            "relation needs finite curvatures with C1 nonzero".into(),
        ));
    }
    Ok((c1 - (2.0 - s) / 2.0 * c2).abs() / c1.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_example() {
        let e = design_eigen_diagnostics(&[1.0, 2.0, 3.0], 2).unwrap();
        let x = design_matrix(&[1.0, 2.0, 3.0], 2);
        let mut direct: Vec<f64> = (x.transpose() * &x).symmetric_eigen().eigenvalues.iter().copied().collect();
        direct.sort_by(f64::total_cmp);
        for (a, b) in e.spectrum().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!((e.lambda1 - 44.596_380).abs() < 1e-5);
        assert!((e.lambda2 - 0.403_620).abs() < 1e-5);
        assert_eq!(e.lambda0, 3.0);
    }

    #[test]
    fn root_product() {
        let x: Vec<f64> = (1..=50).map(|j| (j as f64).powf(0.4)).collect();
        let e = design_eigen_diagnostics(&x, 2).unwrap();
        let prod = e.n as f64 * e.n as f64 * 3.0 * e.spread;
        assert!((e.lambda1 * e.lambda2 - prod).abs() < 1e-9 * prod);
        assert!(e.lambda_min <= e.n as f64);
    }

    #[test]
    fn halfdim_relation() {
        let r = check_halfdim_relation(3f64.ln() / 2f64.ln(), 117230.0, 564100.0).unwrap();
        assert!((r - 0.0014).abs() < 1e-4, "{r}");
        assert_eq!(check_halfdim_relation(2.0, 5.0, 9.0).unwrap(), 1.0);
        // 0.00045 with s rounded to 1.8928, 0.00035 with the exact dimension
        let r = check_halfdim_relation(1.8928, 262770.0, 4900200.0).unwrap();
        assert!((r - 0.00045).abs() < 1e-5, "{r}");
        let r = check_halfdim_relation(8f64.ln() / 3f64.ln(), 262770.0, 4900200.0).unwrap();
        assert!((r - 0.00035).abs() < 1e-5, "{r}");
    }
}
