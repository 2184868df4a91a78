//! CSV and text output of estimation results.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::estimators::{Estimate, EstimationResult, Periodogram};
use crate::series::fmt_f64;

/// Long-format CSV: `quantity,k,j,value`. Empty `k`/`j` cells mean "not
/// applicable".
pub fn write_result_csv<W: Write>(res: &EstimationResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(["quantity", "k", "j", "value"]).map_err(err)?;
    let mut row = |q: &str, k: Option<usize>, j: Option<usize>, v: String| {
        let k = k.map(|k| k.to_string()).unwrap_or_default();
        let j = j.map(|j| j.to_string()).unwrap_or_default();
        w.write_record([q, &k, &j, &v]).map_err(err)
    };
    let est = &res.estimate;
    row("method", None, None, est.method_name().into())?;
    row("s_hat", None, None, fmt_f64(est.s_hat()))?;
    for k in est.index_set() {
        row("beta", Some(k), None, fmt_f64(est.beta_of(k).expect("k in J")))?;
        row("curvature", Some(k), None, fmt_f64(est.curvature_of(k).expect("k in J")))?;
    }
    if let Estimate::Nre(r) = est {
        row("h0", None, None, fmt_f64(r.h0))?;
        row("m", None, None, r.m.to_string())?;
        for f in &r.fits {
            row("s_k", Some(f.k), None, fmt_f64(f.s))?;
            for (i, t) in f.fourier.iter().enumerate() {
                row("b", Some(f.k), Some(i + 1), fmt_f64(t.amplitude()))?;
                row("phi", Some(f.k), Some(i + 1), fmt_f64(t.phase()))?;
            }
        }
    }
    row("objective", None, None, fmt_f64(est.objective()))?;
    for &(k, s) in &res.per_index_slopes {
        row("separate_slope", Some(k), None, fmt_f64(s))?;
    }
    if let Some(p) = &res.period {
        row("period_ratio", None, None, fmt_f64(p.ratio))?;
    }
    if let Some(d) = res.halfdim_discrepancy {
        row("halfdim_discrepancy", None, None, fmt_f64(d))?;
    }
    w.flush().map_err(|e| Error::MalformedCsv(e.to_string()))
}

pub fn format_report(res: &EstimationResult) -> String {
    let est = &res.estimate;
    let mut s = String::new();
    let _ = writeln!(s, "method: {}", est.method_name().to_uppercase());
    if let Some(reason) = &res.fallback {
        let _ = writeln!(s, "  (fell back to LRE: {reason})");
    }
    let _ = writeln!(s, "dimension s_hat: {:.4}", est.s_hat());
    if let Estimate::Nre(r) = est {
        let _ = writeln!(s, "period h0: {:.5}  harmonics m: {}  mode: {:?}", r.h0, r.m, r.mode);
    }
    if let Some(p) = &res.period {
        let _ = writeln!(s, "periodogram peak/median ratio: {:.2}", p.ratio);
    }
    let _ = writeln!(s, "{:>3} {:>12} {:>16}", "k", "beta", "curvature");
    for k in est.index_set() {
        let _ = writeln!(
            s,
            "{:>3} {:>12.5} {:>16.2}",
            k,
            est.beta_of(k).unwrap_or(f64::NAN),
            est.curvature_of(k).unwrap_or(f64::NAN)
        );
    }
    if let Estimate::Nre(r) = est {
        for f in &r.fits {
            let pairs: Vec<String> = f
                .fourier
                .iter()
                .map(|t| format!("({:.4}, {:.3})", t.amplitude(), t.phase()))
                .collect();
            let _ = writeln!(s, "  k={} (b, phi): {}", f.k, pairs.join(" "));
        }
    }
    let slopes: Vec<String> = res
        .per_index_slopes
        .iter()
        .map(|(k, v)| format!("s_{k}={v:.4}"))
        .collect();
    let _ = writeln!(s, "separate slopes: {}", slopes.join(", "));
    if let Some(d) = res.halfdim_discrepancy {
        let _ = writeln!(s, "C1 vs (2-s)/2 C2 discrepancy: {d:.4}");
    }
    let _ = writeln!(s, "residual sum of squares: {:.6e}", est.objective());
    s
}

/// `freq,period_samples,power` rows; the second column is `2π/t` in samples.
pub fn write_periodogram_csv<W: Write>(p: &Periodogram, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record(["freq", "period_samples", "power"]).map_err(err)?;
    for (t, v) in p.freqs.iter().zip(&p.power) {
        w.write_record([fmt_f64(*t), fmt_f64(2.0 * std::f64::consts::PI / t), fmt_f64(*v)])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::MalformedCsv(e.to_string()))
}
